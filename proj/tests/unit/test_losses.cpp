#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "../oracles.hpp"
#include "eflow/core/rng.hpp"
#include "eflow/diffcore/gradcheck.hpp"
#include "eflow/diffcore/ops.hpp"
#include "eflow/losses/energy.hpp"
#include "eflow/losses/mmd.hpp"
#include "eflow/losses/scores.hpp"
#include "eflow/losses/sliced.hpp"
#include "eflow/losses/statistics.hpp"
#include "test_util.hpp"

namespace eflow::losses {
namespace {

using diffcore::finite_difference_check;
using diffcore::ScalarFn;

Matrix column(std::initializer_list<double> values) {
  Matrix m(static_cast<Index>(values.size()), 1);
  Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

RowVector row(std::initializer_list<double> values) {
  RowVector r(static_cast<Index>(values.size()));
  Index i = 0;
  for (double v : values) r(i++) = v;
  return r;
}

std::vector<double> as_vector(const Matrix &m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

TEST(test_losses, energy_score_hand_values) {
  EXPECT_NEAR(energy_score(Tensor(column({0, 2})), row({1}), 1.0).scalar(), 0.0, 1e-12);
  EXPECT_NEAR(energy_score(Tensor(column({0, 2})), row({3}), 1.0).scalar(), 1.0, 1e-12);
  const Matrix point_mass = Matrix::Constant(2, 3, 0.7);
  EXPECT_EQ(energy_score(Tensor(point_mass), RowVector::Constant(3, 0.7), 1.0).scalar(), 0.0);
}

TEST(test_losses, energy_score_errors) {
  EXPECT_ERROR_KIND(energy_score(Tensor(column({1})), row({1}), 1.0), ErrorKind::sample_size);
  EXPECT_ERROR_KIND(energy_score(Tensor(column({0, 1})), row({1}), 2.0), ErrorKind::domain);
  EXPECT_ERROR_KIND(energy_score(Tensor(column({0, 1})), row({1}), 0.0), ErrorKind::domain);
  EXPECT_ERROR_KIND(energy_score(Tensor(column({0, 1, 2})), row({1}), 1.0, Pairing::paired),
                    ErrorKind::sample_size);
  EXPECT_ERROR_KIND(energy_score(Tensor(column({0, 1})), row({1, 2}), 1.0), ErrorKind::dimension);
}

TEST(test_losses, energy_score_point_mass_reduces_to_distance) {
  const Matrix point_mass = (Matrix(2, 2) << 1.0, -2.0, 1.0, -2.0).finished();
  const RowVector y = row({4.0, 2.0});
  for (double beta : {0.5, 1.0, 1.5}) {
    EXPECT_NEAR(energy_score(Tensor(point_mass), y, beta).scalar(), std::pow(5.0, beta), 1e-12);
  }
}

TEST(test_losses, energy_score_paired_mode) {
  // Copies (0, 2) paired with (2, 0): intra mean 2, fit mean 1 at datum 1.
  const Tensor model(column({0, 2, 2, 0}));
  EXPECT_NEAR(energy_score(model, row({1}), 1.0, Pairing::paired).scalar(), -1.0 + 1.0, 1e-12);
}

TEST(test_losses, energy_score_matches_oracle) {
  Engine rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 1 + trial % 5;
    const Index m = 2 + trial % 7;
    const Matrix model = standard_normal(m, d, rng);
    const RowVector y = standard_normal(1, d, rng);
    const double beta = 0.3 + 0.03 * trial;
    EXPECT_NEAR(energy_score(Tensor(model), y, beta).scalar(),
                oracle::energy_score(model, y.transpose(), beta), 1e-12);
  }
}

TEST(test_losses, kernelized_energy_hand_values) {
  const Tensor same(Matrix::Constant(2, 2, 1.5));
  const RowVector a = RowVector::Constant(2, 1.5);
  EXPECT_NEAR(kernelized_energy_loss(same, a, KernelSpec::rbf(1.0)).scalar(), -0.5, 1e-12);
  EXPECT_NEAR(kernelized_energy_loss(same, RowVector::Constant(2, 1e3), KernelSpec::rbf(1.0))
                  .scalar(),
              0.5, 1e-12);
  EXPECT_NEAR(kernelized_energy_loss(same, a, KernelSpec::default_mixture()).scalar(), -3.0,
              1e-12);
  EXPECT_ERROR_KIND(kernelized_energy_loss(same, a, KernelSpec::euclidean(1.0)),
                    ErrorKind::contract);
}

TEST(test_losses, crps_1d_hand_values) {
  const std::vector<double> two = {0.0, 2.0};
  EXPECT_NEAR(crps_1d(two, 1.0), 0.5, 1e-12);
  const std::vector<double> same = {1.25, 1.25};
  EXPECT_EQ(crps_1d(same, 1.25), 0.0);
  const std::vector<double> one = {0.0};
  EXPECT_EQ(crps_1d(one, 1.0), 1.0);
  EXPECT_ERROR_KIND(crps_1d(std::vector<double>{}, 1.0), ErrorKind::sample_size);
}

TEST(test_losses, crps_1d_matches_oracle) {
  Engine rng(9);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(1 + trial % 13);
    for (auto &v : x) v = normal(rng);
    const double y = normal(rng);
    EXPECT_NEAR(crps_1d(x, y), oracle::crps_1d(x, y), 1e-12);
  }
}

TEST(test_losses, check_score_hand_values) {
  EXPECT_DOUBLE_EQ(check_score(0.0, 0.5, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(check_score(0.0, 0.5, -2.0), 1.0);
  EXPECT_NEAR(check_score(0.0, 0.9, 1.0), 0.9, 1e-15);
  EXPECT_ERROR_KIND(check_score(0.0, 1.5, 1.0), ErrorKind::domain);
  EXPECT_ERROR_KIND(check_score(0.0, -0.1, 1.0), ErrorKind::domain);
}

TEST(test_losses, ks_hand_values) {
  const std::vector<double> a = {0, 2}, b = {1, 3}, zeros = {0, 0}, ones = {1, 1};
  EXPECT_EQ(ks_statistic(a, a), 0.0);
  EXPECT_EQ(ks_statistic(zeros, ones), 1.0);
  EXPECT_EQ(ks_statistic(a, b), 0.5);
}

TEST(test_losses, hotelling_hand_values) {
  const Tensor a(column({0, 2}));
  const Tensor b(column({1, 3}));
  EXPECT_EQ(hotelling_statistic(a, a).scalar(), 0.0);
  EXPECT_NEAR(hotelling_statistic(a, b).scalar(), 0.5, 1e-12);
  EXPECT_ERROR_KIND(hotelling_statistic(Tensor(column({0, 0})), Tensor(column({2, 2}))),
                    ErrorKind::singular);
  EXPECT_ERROR_KIND(hotelling_statistic(Tensor(column({0})), b), ErrorKind::sample_size);
}

TEST(test_losses, frechet_hand_values) {
  const Tensor a(column({0, 2}));
  const Tensor b(column({1, 3}));
  EXPECT_NEAR(frechet_statistic(a, a).scalar(), 0.0, 1e-12);
  EXPECT_NEAR(frechet_statistic(a, b).scalar(), 1.0, 1e-12);
  // Variances 1 and 4 with equal means: tr(1 + 4 - 2 * 2) = 1.
  const double s = std::sqrt(0.5);
  EXPECT_NEAR(frechet_statistic(Tensor(column({-s, s})), Tensor(column({-2 * s, 2 * s}))).scalar(),
              1.0, 1e-12);
}

TEST(test_losses, univariate_statistics_hand_values) {
  const std::vector<double> a = {0, 2}, b = {1, 3};
  EXPECT_NEAR(hotelling_1d(a, b), 0.5, 1e-12);
  EXPECT_EQ(hotelling_1d(a, a), 0.0);
  const std::vector<double> zeros = {0, 0}, ones = {1, 1};
  EXPECT_ERROR_KIND(hotelling_1d(zeros, ones), ErrorKind::singular);

  EXPECT_NEAR(frechet_1d(a, b), 1.0, 1e-12);
  EXPECT_EQ(frechet_1d(a, a), 0.0);
  const double s = std::sqrt(0.5);
  const std::vector<double> var1 = {-s, s}, var2 = {-1.0, 1.0};
  EXPECT_NEAR(frechet_1d(var1, var2), 1.0, 1e-12);
}

TEST(test_losses, mmd_hand_values) {
  const Matrix pq = (Matrix(2, 2) << 0.0, 0.0, 1.0, 0.0).finished();
  EXPECT_NEAR(mmd_squared(pq, pq, KernelSpec::rbf(1.0), MmdEstimator::unbiased),
              std::exp(-1.0) - 1.0, 1e-12);
  EXPECT_NEAR(mmd_squared(pq, pq, KernelSpec::rbf(1.0), MmdEstimator::biased), 0.0, 1e-15);
  EXPECT_ERROR_KIND(mmd_squared(pq.topRows(1), pq, KernelSpec::rbf(1.0)), ErrorKind::sample_size);
}

TEST(test_losses, statistics_match_brute_force_oracles) {
  Engine rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = 1 + trial % 3;
    const Index m = d + 2 + trial % 5;
    const Index n = d + 2 + (trial / 3) % 6;
    const Matrix a = standard_normal(m, d, rng);
    const Matrix b = standard_normal(n, d, rng) * 1.3;
    EXPECT_NEAR(hotelling_statistic(Tensor(a), Tensor(b)).scalar(), oracle::hotelling(a, b),
                1e-10);
    EXPECT_NEAR(frechet_statistic(Tensor(a), Tensor(b)).scalar(), oracle::frechet(a, b), 1e-10);
    const Matrix a1 = a.col(0);
    const Matrix b1 = b.col(0);
    EXPECT_NEAR(ks_statistic(as_vector(a1), as_vector(b1)),
                oracle::ks(as_vector(a1), as_vector(b1)), 1e-12);
    EXPECT_NEAR(mmd_squared(a, b, KernelSpec::rbf(0.7), MmdEstimator::unbiased),
                oracle::mmd2(a, b, 0.7, true), 1e-10);
    EXPECT_NEAR(mmd_squared(a, b, KernelSpec::rbf(0.7), MmdEstimator::biased),
                oracle::mmd2(a, b, 0.7, false), 1e-10);
  }
}

TEST(test_losses, ks_handles_ties_like_oracle) {
  Engine rng(4);
  std::uniform_int_distribution<int> small(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(1 + trial % 6), b(1 + trial % 4);
    for (auto &v : a) v = small(rng);
    for (auto &v : b) v = small(rng);
    EXPECT_EQ(ks_statistic(a, b), oracle::ks(a, b));
  }
}

TEST(test_losses, kernelized_energy_is_half_mmd_plus_constant) {
  // Averaging the loss over the data and adding half the (unbiased) data
  // self-similarity gives half the unbiased MMD^2.
  Engine rng(13);
  const KernelSpec kernel = KernelSpec::rbf(0.4);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 1 + trial % 4;
    const Index m = 3 + trial % 5;
    const Index n = 2 + trial % 6;
    const Matrix model = standard_normal(m, d, rng);
    const Matrix data = standard_normal(n, d, rng) + Matrix::Constant(n, d, 0.5);
    double loss = 0.0;
    for (Index i = 0; i < n; ++i) {
      loss += kernelized_energy_loss(Tensor(model), data.row(i), kernel).scalar();
    }
    loss /= static_cast<double>(n);
    double data_self = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j) data_self += kernel_value(kernel, data.row(i).data(), data.row(j).data(), d);
    data_self /= static_cast<double>(n * (n - 1));
    EXPECT_NEAR(loss + 0.5 * data_self,
                0.5 * mmd_squared(model, data, kernel, MmdEstimator::unbiased), 1e-12);
  }
}

TEST(test_losses, grouped_score_is_mean_of_per_datum_scores) {
  Engine rng(17);
  const Index n = 4, k = 3, d = 2;
  const Matrix samples = standard_normal(n * k, d, rng);
  const Matrix data = standard_normal(n, d, rng);
  double expected = 0.0;
  for (Index i = 0; i < n; ++i) {
    expected += energy_score(Tensor(Matrix(samples.middleRows(i * k, k))), data.row(i), 1.0)
                    .scalar();
  }
  EXPECT_NEAR(
      grouped_energy_score(Tensor(samples), data, k, KernelSpec::euclidean(1.0)).scalar(),
      expected / n, 1e-12);
  EXPECT_ERROR_KIND(grouped_energy_score(Tensor(samples), data, 2, KernelSpec::euclidean(1.0)),
                    ErrorKind::dimension);
}

TEST(test_losses, sliced_loss_in_one_dimension_is_the_raw_objective) {
  Engine rng(23);
  const Matrix model = standard_normal(9, 1, rng);
  const Matrix data = standard_normal(7, 1, rng) + Matrix::Constant(7, 1, 0.3);
  const SliceConfig slice{5, ProjectionLaw::standard_normal, 99};
  const auto a = as_vector(model);
  const auto b = as_vector(data);

  EXPECT_NEAR(sliced_loss(SliceBase::ks, Tensor(model), data, slice).scalar(),
              ks_statistic(a, b), 1e-12);
  EXPECT_NEAR(sliced_loss(SliceBase::hotelling_1d, Tensor(model), data, slice).scalar(),
              hotelling_1d(a, b), 1e-12);
  EXPECT_NEAR(sliced_loss(SliceBase::frechet_1d, Tensor(model), data, slice).scalar(),
              frechet_1d(a, b), 1e-12);
  // Energy: U-statistic over the model, fit term over all model-data pairs.
  double raw = 0.0;
  for (Index j = 0; j < data.rows(); ++j) {
    raw += energy_score(Tensor(model), data.row(j), 1.0).scalar();
  }
  raw /= static_cast<double>(data.rows());
  EXPECT_NEAR(sliced_loss(SliceBase::energy, Tensor(model), data, slice).scalar(), raw, 1e-12);
}

TEST(test_losses, sliced_properties) {
  Engine rng(29);
  const Matrix model = standard_normal(12, 4, rng);
  const Matrix data = standard_normal(10, 4, rng);
  const SliceConfig slice{1, ProjectionLaw::standard_normal, 5};

  EXPECT_EQ(sliced_loss(SliceBase::ks, Tensor(data), data, slice).scalar(), 0.0);
  EXPECT_EQ(sliced_loss(SliceBase::energy, Tensor(model), data, slice).scalar(),
            sliced_loss(SliceBase::energy, Tensor(model), data, slice).scalar());

  const SliceConfig many{16, ProjectionLaw::standard_normal, 5};
  Matrix shuffled_model = model;
  Matrix shuffled_data = data;
  shuffled_model.row(0).swap(shuffled_model.row(7));
  shuffled_model.row(3).swap(shuffled_model.row(11));
  shuffled_data.row(1).swap(shuffled_data.row(9));
  for (auto base : {SliceBase::energy, SliceBase::ks, SliceBase::hotelling_1d,
                    SliceBase::frechet_1d}) {
    EXPECT_NEAR(sliced_loss(base, Tensor(model), data, many).scalar(),
                sliced_loss(base, Tensor(shuffled_model), shuffled_data, many).scalar(), 1e-12);
  }
  EXPECT_ERROR_KIND(sliced_loss(SliceBase::energy, Tensor(model), Matrix(data.leftCols(3)), many),
                    ErrorKind::dimension);

  const Matrix v = draw_projections(4, many);
  for (Index c = 0; c < v.cols(); ++c) EXPECT_NEAR(v.col(c).norm(), 1.0, 1e-14);
}

TEST(test_losses, sorted_energy_matches_pairwise_energy) {
  Engine rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix y = standard_normal(2 + trial % 9, 3, rng);
    const Matrix x = standard_normal(1 + trial % 5, 3, rng);
    // beta = 1 takes the sorted sweep; beta -> 1 from above uses pairs.
    const double fast = energy_1d_columns(Tensor(y), x, 1.0).scalar();
    const double slow = energy_1d_columns(Tensor(y), x, 1.0 + 1e-12).scalar();
    EXPECT_NEAR(fast, slow, 1e-9);
  }
}

TEST(test_losses, energy_properness_recovers_location) {
  // Location family N(theta, 1) against data from N(mu, 1). The grid
  // minimizer of the Monte-Carlo energy score approaches mu.
  const double mu = 0.8;
  const Index m = 4096;
  Engine rng(37);
  const Matrix z = standard_normal(m, 1, rng);
  const Matrix data = standard_normal(m, 1, rng).array() + mu;
  double best_theta = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int step = -100; step <= 100; ++step) {
    const double theta = mu + 0.01 * step;
    const Matrix model = z.array() + theta;
    const double score = energy_1d_columns(Tensor(model), data, 1.0).scalar();
    if (score < best) {
      best = score;
      best_theta = theta;
    }
  }
  EXPECT_LE(std::abs(best_theta - mu), 0.05);
}

// Gradients of every differentiable loss against central differences.
TEST(test_losses, losses_match_finite_differences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Engine rng(seed);
    std::uniform_int_distribution<int> dim(1, 6);
    std::uniform_int_distribution<int> count(2, 8);
    const Index d = dim(rng);
    const Index m = count(rng);
    const Index n = count(rng);
    const Matrix model = standard_normal(m, d, rng);
    const Matrix big_model = standard_normal(m + d + 2, d, rng);
    const Matrix data = standard_normal(n, d, rng);
    const Matrix big_data = standard_normal(n + d + 2, d, rng) * 1.2;
    const RowVector datum = data.row(0);
    const double beta = 0.5 + 1.0 * (seed % 10) / 10.0;
    const Matrix projections = draw_projections(d, 3, rng);
    const Index k = 2 * (1 + static_cast<Index>(seed % 3));
    const Matrix grouped = standard_normal(n * k, d, rng);

    const std::vector<std::pair<const char *, std::function<Tensor(const Tensor &)>>> cases = {
        {"energy", [&](const Tensor &t) { return energy_score(t, datum, beta); }},
        {"energy_paired",
         [&](const Tensor &t) {
           return grouped_energy_score(t, data, k, KernelSpec::euclidean(beta), Pairing::paired);
         }},
        {"kernelized_rbf",
         [&](const Tensor &t) { return kernelized_energy_loss(t, datum, KernelSpec::rbf(0.3)); }},
        {"kernelized_mixture",
         [&](const Tensor &t) {
           return grouped_energy_score(t, data, k, KernelSpec::rbf_mixture({0.5, 1.0, 2.0}));
         }},
        {"grouped_per_coordinate",
         [&](const Tensor &t) {
           // |x|^beta with beta < 1 is too sharp per coordinate for central differences.
           return grouped_energy_score(t, data, k, KernelSpec::euclidean(std::max(beta, 1.0)),
                                       Pairing::u_statistic, Distance::per_coordinate);
         }},
        {"sliced_energy",
         [&](const Tensor &t) { return sliced_loss(SliceBase::energy, t, data, projections); }},
        {"sliced_energy_beta",
         [&](const Tensor &t) {
           return sliced_loss(SliceBase::energy, t, data, projections, beta);
         }},
        {"sliced_hotelling",
         [&](const Tensor &t) {
           return sliced_loss(SliceBase::hotelling_1d, t, data, projections);
         }},
        {"sliced_frechet",
         [&](const Tensor &t) { return sliced_loss(SliceBase::frechet_1d, t, data, projections); }},
    };
    for (const auto &[name, f] : cases) {
      const bool is_grouped = std::string(name) == "energy_paired" ||
                              std::string(name) == "kernelized_mixture" ||
                              std::string(name) == "grouped_per_coordinate";
      const Matrix &theta = is_grouped ? grouped : model;
      EXPECT_LE(finite_difference_check(f, theta, 1e-5), 1e-5) << name << " seed " << seed;
    }

    const ScalarFn two_sample = [](std::span<const Tensor> p) {
      return diffcore::add(hotelling_statistic(p[0], p[1]), frechet_statistic(p[0], p[1]));
    };
    const std::vector<Matrix> pair = {big_model, big_data};
    EXPECT_LE(finite_difference_check(two_sample, pair, 1e-5), 1e-5) << "seed " << seed;

    const Matrix targets = standard_normal(m, 1, rng);
    std::vector<double> taus(static_cast<std::size_t>(m));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto &t : taus) t = unit(rng);
    const auto quantile = [&](const Tensor &q) { return check_score_loss(q, taus, targets); };
    EXPECT_LE(finite_difference_check(quantile, Matrix(standard_normal(m, 1, rng)), 1e-5), 1e-5);
  }
}

TEST(test_losses, ks_objective_has_zero_gradient) {
  Engine rng(41);
  diffcore::Tape tape;
  const Tensor model = tape.parameter(standard_normal(6, 2, rng));
  const Matrix data = standard_normal(5, 2, rng);
  const SliceConfig slice{4, ProjectionLaw::standard_normal, 1};
  const auto grads = tape.backward(sliced_loss(SliceBase::ks, model, data, slice));
  EXPECT_EQ(grads.get(model), Matrix::Zero(6, 2));
}

TEST(test_losses, loss_spec_validation) {
  LossSpec spec;
  spec.objective = Objective::sliced_energy;
  EXPECT_ERROR_KIND(spec.validate(), ErrorKind::config);
  spec.slice = SliceConfig{};
  spec.validate();
  spec.objective = Objective::kernelized_energy;
  EXPECT_ERROR_KIND(spec.validate(), ErrorKind::config);
  spec.kernel = KernelSpec::default_mixture();
  spec.validate();
  spec.kernel = KernelSpec::rbf_mixture({});
  EXPECT_ERROR_KIND(spec.validate(), ErrorKind::domain);
  EXPECT_EQ(parse_objective("sliced_frechet"), Objective::sliced_frechet);
  EXPECT_ERROR_KIND(parse_objective("wasserstein"), ErrorKind::config);
}

}  // namespace
}  // namespace eflow::losses
