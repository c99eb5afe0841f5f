#include <gtest/gtest.h>

#include <cmath>

#include "gen.hpp"
#include "nlel/elasticity.hpp"

using namespace nlel;

namespace {

Eigen::MatrixXd random_matrix(int n, gen::Gen& g) {
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = g.uniform(-1, 1);
  return M;
}

// isotropic tensor entries from the definition, independent of Tensor::at
double iso_entry(double mu, double lambda, int i, int j, int k, int l) {
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  return lambda * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
}

}  // namespace

TEST(Elasticity, IsotropicActionOnSpecialMatrices) {
  for (int n : {1, 2, 3}) {
    const double mu = 1.3, lambda = 0.4;
    const Tensor C = Tensor::iso(n, mu, lambda);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    EXPECT_LT((apply_tensor(C, I) - (2 * mu + n * lambda) * I).norm(), 1e-14);
    if (n > 1) {
      Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
      W(0, 1) = 1, W(1, 0) = -1;
      EXPECT_LT(apply_tensor(C, W).norm(), 1e-14);  // skew part is invisible
    }
  }
  // traceless symmetric: C[M] = 2 mu M
  const Tensor C = Tensor::iso(2, 1.0, 7.0);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2, 2);
  M(0, 1) = M(1, 0) = 1;
  EXPECT_LT((apply_tensor(C, M) - 2 * M).norm(), 1e-14);
}

TEST(Elasticity, GeneralTableMatchesIsotropic) {
  gen::Gen g(41);
  for (int c = 0; c < gen::kCases; ++c) {
    const int n = g.integer(1, 3);
    const double mu = g.uniform(0.1, 3), lambda = g.uniform(-0.5, 3);
    std::vector<double> tab;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) tab.push_back(iso_entry(mu, lambda, i, j, k, l));
    const Tensor A = Tensor::iso(n, mu, lambda), B = Tensor::general(n, tab);
    const Eigen::MatrixXd M = random_matrix(n, g);
    EXPECT_LT((apply_tensor(A, M) - apply_tensor(B, M)).norm(), 1e-13);
    EXPECT_NEAR(voigt_c1(A), voigt_c1(B), 1e-12);
  }
}

TEST(Elasticity, StrongEllipticityThreshold) {
  EXPECT_TRUE(strong_ellipticity(Tensor::iso(2, 1, 0)).ok);
  EXPECT_TRUE(strong_ellipticity(Tensor::iso(2, 1, -1.5)).ok);
  EXPECT_FALSE(strong_ellipticity(Tensor::iso(2, 1, -2)).ok);  // 2 mu + lambda = 0
  EXPECT_FALSE(strong_ellipticity(Tensor::iso(2, -0.1, 3)).ok);
  const Ellipticity e = strong_ellipticity(Tensor::iso(3, 2, -1));
  EXPECT_NEAR(e.margin, 2.0, 1e-14);
  EXPECT_GE(e.sampled_min, e.margin - 1e-12);
}

TEST(Elasticity, CoercivityConstantOnSymmetricMatrices) {
  gen::Gen g(42);
  for (int c = 0; c < gen::kCases; ++c) {
    const int n = g.integer(1, 3);
    const double mu = g.uniform(0.1, 3), lambda = g.uniform(-2 * mu / n + 0.05, 3);
    const Tensor C = Tensor::iso(n, mu, lambda);
    // eigenvalues of C on Sym: 2 mu (deviatoric) and 2 mu + n lambda (spherical)
    const double expect = n == 1 ? 2 * mu + lambda : std::min(2 * mu, 2 * mu + n * lambda);
    EXPECT_NEAR(voigt_c1(C), expect, 1e-12 * (1 + std::abs(expect)));
    for (int t = 0; t < 20; ++t) {
      Eigen::MatrixXd M = random_matrix(n, g);
      M = 0.5 * (M + M.transpose()).eval();
      const double q = (apply_tensor(C, M).array() * M.array()).sum();
      EXPECT_GE(q, voigt_c1(C) * M.squaredNorm() - 1e-12);
    }
  }
}

TEST(Elasticity, MinorSymmetry) {
  gen::Gen g(43);
  EXPECT_LT(minor_symmetry_defect(Tensor::iso(3, 1.2, 0.7)), 1e-14);
  std::vector<double> tab(16);
  for (double& x : tab) x = g.uniform(-1, 1);
  EXPECT_GT(minor_symmetry_defect(Tensor::general(2, tab)), 1e-3);
}

TEST(Elasticity, GeneralTableRejectsWrongSize) {
  EXPECT_THROW(Tensor::general(2, std::vector<double>(15, 0.0)), std::invalid_argument);
}

TEST(Elasticity, BilinearFormMatchesIsotropicExpansion) {
  gen::Gen g(44);
  for (int c = 0; c < gen::kCases; ++c) {
    const int n = g.integer(1, 2);
    const double h = n == 1 ? 1.0 / 64 : 1.0 / 16;
    auto dom = std::make_shared<Domain>(build_domain(Box{n, {0, 0}, {1, 1}}, 2 * h, h, 2));
    QuadOp op(make_truncated_fractional(n, g.uniform(0.2, 0.8), 2 * h, 0.5), dom);
    Field v = zeros(dom->lat, Rank::Vector), w = v;
    for (int k = 0; k < dom->size(); ++k)
      if (dom->in_omega_closure(k))
        for (int i = 0; i < n; ++i) v.v(k, i) = g.uniform(-1, 1), w.v(k, i) = g.uniform(-1, 1);
    const double mu = g.uniform(0.2, 2), lambda = g.uniform(-0.3, 2);
    const Tensor C = Tensor::iso(n, mu, lambda);
    for (FormScope sc : {FormScope::Whole, FormScope::Omega}) {
      const Eigen::VectorXd wts = form_weights(*dom, sc);
      const double a = bilinear(C, op, v, w, wts), b = bilinear_iso_expanded(mu, lambda, op, v, w, wts);
      EXPECT_NEAR(a, b, 1e-11 * (1 + std::abs(a)));
      EXPECT_NEAR(a, bilinear(C, op, w, v, wts), 1e-11 * (1 + std::abs(a)));  // symmetric
      EXPECT_GE(bilinear(C, op, v, v, wts), 0.0);
    }
  }
}

TEST(Elasticity, EnergyOfZeroAndUnloadedFields) {
  const double h = 1.0 / 32;
  auto dom = std::make_shared<Domain>(build_domain(Box{1, {0, 0}, {1, 1}}, 4 * h, h, 2));
  QuadOp op(make_truncated_fractional(1, 0.5, 4 * h, 0.5), dom);
  const Tensor C = Tensor::iso(1, 1, 0);
  const Eigen::VectorXd wts = form_weights(*dom, FormScope::Whole);
  const Field z = zeros(dom->lat, Rank::Vector);
  Field f = z;
  f.v.setOnes();
  EXPECT_EQ(energy(C, op, z, f, wts), 0.0);
  Field v = interpolate(dom->lat, Rank::Vector, [](const double* x, double* o) {
    o[0] = (x[0] > 0 && x[0] < 1) ? std::sin(M_PI * x[0]) : 0.0;
  });
  EXPECT_GT(energy(C, op, v, z, wts), 0.0);
  EXPECT_NEAR(energy(C, op, v, z, wts), 0.5 * bilinear(C, op, v, v, wts), 1e-14);
}

TEST(Elasticity, StressIsTensorOfSymmetricGradient) {
  const double h = 1.0 / 16;
  auto dom = std::make_shared<Domain>(build_domain(Box{2, {0, 0}, {1, 1}}, 2 * h, h, 2));
  QuadOp op(make_truncated_fractional(2, 0.4, 2 * h, 0.5), dom);
  const Tensor C = Tensor::iso(2, 0.8, 1.1);
  const Field v = interpolate(dom->lat, Rank::Vector, [](const double* x, double* o) {
    o[0] = x[0] * x[1];
    o[1] = std::sin(x[0]) - x[1] * x[1];
  });
  const Field S = stress(C, op, v), E = op.sym_grad(v);
  for (int k = 0; k < dom->size(); k += 7) {
    Eigen::MatrixXd M(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) M(i, j) = E.v(k, 2 * i + j);
    const Eigen::MatrixXd CM = apply_tensor(C, M);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(S.v(k, 2 * i + j), CM(i, j), 1e-12);
  }
}
