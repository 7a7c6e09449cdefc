#include "eflow/diffcore/gradcheck.hpp"

#include <cmath>

#include "eflow/core/error.hpp"

namespace eflow::diffcore {

namespace {

double evaluate(const ScalarFn &f, std::span<const Matrix> params) {
  std::vector<Tensor> constants;
  constants.reserve(params.size());
  for (const auto &p : params) {
    constants.emplace_back(p);
  }
  const double v = f(constants).scalar();
  if (!std::isfinite(v)) {
    raise(ErrorKind::numeric, "finite-difference evaluation is not finite");
  }
  return v;
}

}  // namespace

double finite_difference_check(const ScalarFn &f, std::span<const Matrix> params, double h) {
  require(h > 0.0, ErrorKind::domain, "finite-difference step must be positive");

  Tape tape;
  std::vector<Tensor> leaves;
  for (const auto &p : params) {
    leaves.push_back(tape.parameter(p));
  }
  const Tensor root = f(leaves);
  const GradientMap grads = tape.backward(root);

  std::vector<Matrix> work(params.begin(), params.end());
  double worst = 0.0;
  for (std::size_t k = 0; k < work.size(); ++k) {
    const Matrix analytic = grads.get(leaves[k]);
    for (Index i = 0; i < work[k].size(); ++i) {
      double &entry = work[k].data()[i];
      const double saved = entry;
      entry = saved + h;
      const double up = evaluate(f, work);
      entry = saved - h;
      const double down = evaluate(f, work);
      entry = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.data()[i];
      const double rel =
          std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

double finite_difference_check(const std::function<Tensor(const Tensor &)> &f,
                               const Matrix &theta, double h) {
  const ScalarFn wrapped = [&f](std::span<const Tensor> p) { return f(p[0]); };
  return finite_difference_check(wrapped, std::span<const Matrix>(&theta, 1), h);
}

}  // namespace eflow::diffcore
