#include "eflow/losses/kernel.hpp"

#include <cmath>

#include "eflow/core/error.hpp"

namespace eflow::losses {

KernelSpec KernelSpec::euclidean(double beta) {
  KernelSpec k;
  k.kind = KernelKind::euclidean_beta;
  k.beta = beta;
  return k;
}

KernelSpec KernelSpec::rbf(double gamma) {
  KernelSpec k;
  k.kind = KernelKind::rbf;
  k.gamma = gamma;
  return k;
}

KernelSpec KernelSpec::rbf_mixture(std::vector<double> bandwidths) {
  KernelSpec k;
  k.kind = KernelKind::rbf_mixture;
  k.bandwidths = std::move(bandwidths);
  return k;
}

KernelSpec KernelSpec::default_mixture() { return rbf_mixture({2, 5, 10, 20, 40, 80}); }

void KernelSpec::validate() const {
  switch (kind) {
    case KernelKind::euclidean_beta:
      require(beta > 0.0 && beta < 2.0, ErrorKind::domain, "beta must lie in (0, 2)");
      break;
    case KernelKind::rbf:
      require(gamma > 0.0, ErrorKind::domain, "rbf gamma must be positive");
      break;
    case KernelKind::rbf_mixture:
      require(!bandwidths.empty(), ErrorKind::domain, "rbf mixture needs bandwidths");
      for (double h : bandwidths) {
        require(h > 0.0, ErrorKind::domain, "rbf bandwidths must be positive");
      }
      break;
  }
}

double KernelSpec::similarity(double sq_dist) const {
  switch (kind) {
    case KernelKind::rbf:
      return std::exp(-gamma * sq_dist);
    case KernelKind::rbf_mixture: {
      double acc = 0.0;
      for (double h : bandwidths) acc += std::exp(-sq_dist / (2.0 * h * h));
      return acc;
    }
    case KernelKind::euclidean_beta:
      break;
  }
  raise(ErrorKind::contract, "euclidean_beta is a distance, not a similarity kernel");
}

double KernelSpec::similarity_slope(double sq_dist) const {
  switch (kind) {
    case KernelKind::rbf:
      return -gamma * std::exp(-gamma * sq_dist);
    case KernelKind::rbf_mixture: {
      double acc = 0.0;
      for (double h : bandwidths) {
        const double c = 1.0 / (2.0 * h * h);
        acc -= c * std::exp(-sq_dist * c);
      }
      return acc;
    }
    case KernelKind::euclidean_beta:
      break;
  }
  raise(ErrorKind::contract, "euclidean_beta is a distance, not a similarity kernel");
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::euclidean_beta: return "euclidean";
    case KernelKind::rbf: return "rbf";
    case KernelKind::rbf_mixture: return "rbf_mixture";
  }
  return "?";
}

KernelKind parse_kernel_kind(const std::string &text) {
  if (text == "euclidean") return KernelKind::euclidean_beta;
  if (text == "rbf") return KernelKind::rbf;
  if (text == "rbf_mixture") return KernelKind::rbf_mixture;
  raise(ErrorKind::config, "unknown kernel '" + text + "'");
}

}  // namespace eflow::losses
