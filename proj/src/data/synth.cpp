#include "eflow/data/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/QR>

#include "eflow/core/error.hpp"
#include "eflow/core/rng.hpp"

namespace eflow::data {

SynthSpec parse_synth(const std::string &name) {
  if (name == "two_moons") return {SynthKind::two_moons, 0};
  if (name == "checkerboard") return {SynthKind::checkerboard, 0};
  if (name == "gauss_ring") return {SynthKind::gauss_ring, 8};
  const std::string prefix = "gauss_ring";
  if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size() + 1) {
    std::string rest = name.substr(prefix.size());
    if (rest.front() == ':') {
      rest = rest.substr(1);
    } else if (rest.front() == '(' && rest.back() == ')') {
      rest = rest.substr(1, rest.size() - 2);
    } else {
      rest.clear();
    }
    std::size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(rest, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used > 0 && used == rest.size() && k >= 1) return {SynthKind::gauss_ring, k};
  }
  raise(ErrorKind::config, "unknown synthetic dataset '" + name + "'");
}

std::string to_string(const SynthSpec &spec) {
  switch (spec.kind) {
    case SynthKind::two_moons: return "two_moons";
    case SynthKind::checkerboard: return "checkerboard";
    case SynthKind::gauss_ring: return "gauss_ring(" + std::to_string(spec.components) + ")";
  }
  return "unknown";
}

Dataset synth(const SynthSpec &spec, Index n, std::uint64_t seed) {
  require(n >= 1, ErrorKind::config, "synthetic dataset size must be >= 1");
  Engine engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double pi = std::numbers::pi;
  Matrix x(n, 2);
  for (Index i = 0; i < n; ++i) {
    switch (spec.kind) {
      case SynthKind::two_moons: {
        const double t = pi * unit(engine);
        if (unit(engine) < 0.5) {
          x(i, 0) = std::cos(t);
          x(i, 1) = std::sin(t);
        } else {
          x(i, 0) = 1.0 - std::cos(t);
          x(i, 1) = 0.5 - std::sin(t);
        }
        x(i, 0) += 0.1 * normal(engine);
        x(i, 1) += 0.1 * normal(engine);
        break;
      }
      case SynthKind::gauss_ring: {
        require(spec.components >= 1, ErrorKind::config, "gauss_ring needs >= 1 component");
        std::uniform_int_distribution<int> pick(0, spec.components - 1);
        const double angle = 2.0 * pi * pick(engine) / spec.components;
        x(i, 0) = 4.0 * std::cos(angle) + 0.2 * normal(engine);
        x(i, 1) = 4.0 * std::sin(angle) + 0.2 * normal(engine);
        break;
      }
      case SynthKind::checkerboard: {
        const double a = 4.0 * unit(engine) - 2.0;
        const double b = unit(engine) - 2.0 * std::floor(2.0 * unit(engine));
        const double parity = std::fmod(std::floor(a) + 4.0, 2.0);
        x(i, 0) = 2.0 * a;
        x(i, 1) = 2.0 * (b + parity);
        break;
      }
    }
  }
  return make_dataset(std::move(x), to_string(spec));
}

Dataset embed(const Dataset &ds, Index d_out, double noise, std::uint64_t seed) {
  require(ds.transform.is_identity(), ErrorKind::contract, "embed expects raw data");
  if (d_out < ds.dim()) raise(ErrorKind::dimension, "embedding cannot reduce dimension");
  require(noise >= 0.0, ErrorKind::config, "embedding noise must be >= 0");
  Engine engine(seed);
  const Matrix g = standard_normal(d_out, ds.dim(), engine);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ() * Matrix::Identity(d_out, ds.dim());
  Matrix lifted = ds.points * q.transpose();
  if (noise > 0.0) lifted += noise * standard_normal(lifted.rows(), lifted.cols(), engine);
  return make_dataset(std::move(lifted), ds.name + "@" + std::to_string(d_out));
}

}  // namespace eflow::data
