#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "eflow/core/rng.hpp"
#include "eflow/diffcore/gradcheck.hpp"
#include "eflow/diffcore/linalg.hpp"
#include "eflow/diffcore/ops.hpp"
#include "test_util.hpp"

namespace eflow::diffcore {
namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto &r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

TEST(test_diffcore, matmul_examples) {
  const Tensor id(Matrix::Identity(2, 2));
  const Tensor x(mat({{1}, {2}}));
  EXPECT_EQ(matmul(id, x).value(), mat({{1}, {2}}));
  EXPECT_EQ(matmul(Tensor(mat({{1, 2}, {3, 4}})), Tensor(mat({{1}, {1}}))).value(),
            mat({{3}, {7}}));
  EXPECT_ERROR_KIND(matmul(Tensor(Matrix::Zero(2, 3)), Tensor(Matrix::Zero(2, 3))),
                    ErrorKind::dimension);
}

TEST(test_diffcore, elementwise_examples) {
  EXPECT_DOUBLE_EQ(leaky_relu(Tensor(mat({{-1}})), 0.01).scalar(), -0.01);
  EXPECT_DOUBLE_EQ(sigmoid(Tensor(mat({{0}}))).scalar(), 0.5);

  Tape tape;
  const Tensor x = tape.parameter(mat({{-3}}));
  const auto grads = tape.backward(sum(abs(x)));
  EXPECT_DOUBLE_EQ(grads.get(x)(0, 0), -1.0);

  EXPECT_ERROR_KIND(add(Tensor(Matrix::Zero(2, 2)), Tensor(Matrix::Zero(2, 1))),
                    ErrorKind::dimension);
  EXPECT_ERROR_KIND(leaky_relu(Tensor(mat({{1}})), 0.0), ErrorKind::domain);
}

TEST(test_diffcore, reduce_examples) {
  EXPECT_DOUBLE_EQ(l2_norm_rows(Tensor(mat({{3, 4}}))).scalar(), 5.0);
  EXPECT_DOUBLE_EQ(sum(Tensor(Matrix::Zero(3, 2))).scalar(), 0.0);
  EXPECT_ERROR_KIND(sum(Tensor(Matrix(0, 0))), ErrorKind::domain);

  Tape tape;
  const Tensor z = tape.parameter(mat({{0, 0}}));
  const Tensor n = l2_norm_rows(z);
  EXPECT_DOUBLE_EQ(n.scalar(), 0.0);
  const auto grads = tape.backward(sum(n));
  EXPECT_EQ(grads.get(z), Matrix::Zero(1, 2));
}

TEST(test_diffcore, backward_linear_map) {
  Tape tape;
  const Matrix w0 = mat({{1, 2, 3}, {4, 5, 6}});
  const Tensor w = tape.parameter(w0);
  const Tensor x(mat({{0.5}, {-1.0}, {2.0}}));
  const auto grads = tape.backward(sum(matmul(w, x)));
  const Matrix g = grads.get(w);
  for (Index r = 0; r < 2; ++r) {
    EXPECT_EQ(g.row(r), x.value().transpose());
  }
}

TEST(test_diffcore, backward_constant_root_and_contracts) {
  Tape tape;
  const auto grads = tape.backward(Tensor(mat({{4.0}})));
  EXPECT_TRUE(grads.empty());

  const Tensor p = tape.parameter(mat({{1.0, 2.0}}));
  EXPECT_ERROR_KIND(tape.backward(p), ErrorKind::contract);

  const Tensor q(mat({{1.0, 2.0}}));
  const auto g = tape.backward(sum(l2_norm_rows(sub(p, q))));
  EXPECT_EQ(g.get(p), Matrix::Zero(1, 2));
}

TEST(test_diffcore, finite_difference_examples) {
  const auto square_fn = [](const Tensor &t) { return sum(square(t)); };
  EXPECT_LT(finite_difference_check(square_fn, mat({{3.0}}), 1e-5), 1e-8);

  const auto constant_fn = [](const Tensor &) { return Tensor(mat({{2.0}})); };
  EXPECT_EQ(finite_difference_check(constant_fn, mat({{3.0}}), 1e-5), 0.0);

  const auto blowup = [](const Tensor &t) { return sum(log(t)); };
  EXPECT_ERROR_KIND(finite_difference_check(blowup, mat({{1e-6}}), 1e-5), ErrorKind::domain);
}

TEST(test_diffcore, lu_examples) {
  EXPECT_DOUBLE_EQ(lu_decompose(Matrix::Identity(3, 3)).log_abs_det(), 0.0);
  EXPECT_NEAR(lu_decompose(mat({{2, 0}, {0, 3}})).log_abs_det(), std::log(6.0), 1e-15);
  EXPECT_ERROR_KIND(lu_decompose(mat({{1, 1}, {1, 1}})), ErrorKind::singular);
  EXPECT_ERROR_KIND(lu_decompose(Matrix::Zero(2, 3)), ErrorKind::dimension);

  EXPECT_EQ(lu_solve(lu_decompose(Matrix::Identity(2, 2)), mat({{1}, {2}})), mat({{1}, {2}}));
  EXPECT_EQ(lu_solve(lu_decompose(mat({{2, 0}, {0, 4}})), mat({{2}, {4}})), mat({{1}, {1}}));

  LuFactorization broken = lu_decompose(Matrix::Identity(2, 2));
  broken.lu(1, 1) = 0.0;
  EXPECT_ERROR_KIND(lu_solve(broken, mat({{1}, {1}})), ErrorKind::singular);
}

TEST(test_diffcore, lu_factors_reconstruct_permuted_matrix) {
  Engine rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 1 + trial % 7;
    const Matrix a = standard_normal(n, n, rng);
    const auto f = lu_decompose(a);
    Matrix pa(n, n);
    for (Index i = 0; i < n; ++i) pa.row(i) = a.row(f.permutation[i]);
    EXPECT_LT((f.lower() * f.upper() - pa).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(f.det(), a.determinant(), 1e-10 * std::max(1.0, std::abs(a.determinant())));
  }
}

TEST(test_diffcore, lu_solve_recovers_solution) {
  Engine rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + (trial * 5) % 32;
    // Diagonal shift keeps the random matrix well conditioned.
    const Matrix a = standard_normal(n, n, rng) / std::sqrt(static_cast<double>(n)) +
                     3.0 * Matrix::Identity(n, n);
    const Matrix x = standard_normal(n, 3, rng);
    const auto f = lu_decompose(a);
    EXPECT_LT((lu_solve(f, a * x) - x).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((lu_solve_transposed(f, a.transpose() * x) - x).cwiseAbs().maxCoeff(), 1e-9);
  }
}

// Every primitive against central differences on random small instances.
TEST(test_diffcore, primitives_match_finite_differences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Engine rng(seed);
    std::uniform_int_distribution<int> dim(1, 6);
    std::uniform_int_distribution<int> count(1, 8);
    const Index d = dim(rng);
    const Index m = count(rng);
    const Matrix a = standard_normal(m, d, rng);
    const Matrix b = standard_normal(m, d, rng);
    const Matrix w = standard_normal(d, d, rng) + 3.0 * Matrix::Identity(d, d);
    const Matrix row = standard_normal(1, d, rng);
    const Matrix positive = a.cwiseAbs().array() + 0.5;
    const std::vector<Matrix> params = {a, b, w, row, positive};

    const ScalarFn f = [m](std::span<const Tensor> p) {
      const Tensor &x = p[0];
      const Tensor &y = p[1];
      const Tensor &w = p[2];
      const Tensor h = add_row(matmul(x, transpose(w)), p[3]);
      Tensor acc = sum(mul(tanh(h), sigmoid(y)));
      acc = add(acc, mean(leaky_relu(sub(x, y), 0.1)));
      acc = add(acc, sum(l2_norm_rows(sub(x, y))));
      acc = add(acc, sum(l1_norm_rows(scale(add(x, y), 0.5))));
      acc = add(acc, sum(sqrt(p[4])));
      acc = add(acc, sum(log(p[4])));
      acc = add(acc, mean(exp(scale(x, 0.3))));
      acc = add(acc, sum(square(slice_cols(y, 0, 1))));
      const Tensor parts[] = {x, y};
      acc = add(acc, mean(abs(add_scalar(concat_cols(parts), 0.05))));
      acc = add(acc, sum(mul(repeat_rows(p[3], m), x)));
      acc = add(acc, sum(solve(w, transpose(y))));
      acc = add(acc, log_abs_det(w));
      return add(acc, sum(neg(sum_rows(x))));
    };
    EXPECT_LE(finite_difference_check(f, params, 1e-5), 1e-5) << "seed " << seed;
  }
}

TEST(test_diffcore, backward_is_bitwise_deterministic) {
  const auto run = [] {
    Engine rng(3);
    Tape tape;
    const Tensor w = tape.parameter(standard_normal(4, 4, rng));
    const Tensor x(standard_normal(8, 4, rng));
    const Tensor loss = sum(l2_norm_rows(tanh(matmul(x, w))));
    return tape.backward(loss).get(w);
  };
  const Matrix g1 = run();
  const Matrix g2 = run();
  EXPECT_EQ(0, std::memcmp(g1.data(), g2.data(), sizeof(double) * g1.size()));
}

TEST(test_diffcore, tape_keeps_topological_order) {
  Tape tape;
  const Tensor a = tape.parameter(mat({{1.0}}));
  const Tensor b = square(a);
  const Tensor c = add(a, b);
  EXPECT_LT(a.node(), b.node());
  EXPECT_LT(b.node(), c.node());
  EXPECT_EQ(tape.node_count(), 3u);
  // Operations on constants only are not recorded.
  const Tensor k = square(Tensor(mat({{2.0}})));
  EXPECT_FALSE(k.on_tape());
  EXPECT_EQ(tape.node_count(), 3u);
}

TEST(test_diffcore, non_finite_results_are_rejected) {
  EXPECT_ERROR_KIND(exp(Tensor(mat({{1000.0}}))), ErrorKind::numeric);
}

}  // namespace
}  // namespace eflow::diffcore
