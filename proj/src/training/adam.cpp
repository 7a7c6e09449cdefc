#include "eflow/training/adam.hpp"

#include <cmath>

#include "eflow/core/error.hpp"

namespace eflow::training {

void AdamConfig::validate() const {
  require(learning_rate > 0.0, ErrorKind::config, "learning rate must be > 0");
  require(beta1 >= 0.0 && beta1 < 1.0, ErrorKind::config, "adam beta1 must lie in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, ErrorKind::config, "adam beta2 must lie in [0, 1)");
  require(eps > 0.0, ErrorKind::config, "adam eps must be > 0");
}

AdamState AdamState::zeros(const std::vector<Matrix *> &params) {
  AdamState s;
  for (const auto *p : params) {
    s.first_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
    s.second_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
  return s;
}

void adam_step(const std::vector<Matrix *> &params, const std::vector<Matrix> &grads,
               AdamState &state, const AdamConfig &cfg) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    raise(ErrorKind::contract, "adam: parameter, gradient and state counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params[i]->rows() || grads[i].cols() != params[i]->cols()) {
      raise(ErrorKind::dimension, "adam: gradient shape does not match parameter " + std::to_string(i));
    }
    if (!grads[i].allFinite()) raise(ErrorKind::numeric, "adam: non-finite gradient");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix &m = state.first_moment[i];
    Matrix &v = state.second_moment[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grads[i];
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grads[i].cwiseAbs2();
    params[i]->array() -=
        cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.eps);
  }
}

double clip_global_norm(std::vector<Matrix> &grads, double max_norm) {
  double sq = 0.0;
  for (const auto &g : grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (auto &g : grads) g *= factor;
  }
  return norm;
}

}  // namespace eflow::training
