#pragma once

#include <string>
#include <vector>

namespace eflow::losses {

enum class KernelKind { euclidean_beta, rbf, rbf_mixture };

/// Kernel used by the energy-type objectives and MMD.
///
/// - euclidean_beta: distance form ||x - y||^beta with 0 < beta < 2.
/// - rbf: exp(-gamma ||x - y||^2).
/// - rbf_mixture: sum over bandwidths h of exp(-||x - y||^2 / (2 h^2)).
struct KernelSpec {
  KernelKind kind = KernelKind::euclidean_beta;
  double beta = 1.0;
  double gamma = 1.0;
  std::vector<double> bandwidths;

  static KernelSpec euclidean(double beta = 1.0);
  static KernelSpec rbf(double gamma);
  static KernelSpec rbf_mixture(std::vector<double> bandwidths);
  /// Bandwidths {2, 5, 10, 20, 40, 80}.
  static KernelSpec default_mixture();

  bool is_similarity() const { return kind != KernelKind::euclidean_beta; }
  void validate() const;

  /// Similarity kernels only: value as a function of the squared distance,
  /// and its derivative with respect to the squared distance.
  double similarity(double sq_dist) const;
  double similarity_slope(double sq_dist) const;
};

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string &text);

}  // namespace eflow::losses
