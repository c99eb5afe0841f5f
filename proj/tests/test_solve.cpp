#include <gtest/gtest.h>

#include <cmath>

#include "gen.hpp"
#include "nlel/solve.hpp"

using namespace nlel;

namespace {

std::shared_ptr<Domain> domain(int n, double delta, double h, double lo = 0, double hi = 1) {
  return std::make_shared<Domain>(build_domain(Box{n, {lo, lo}, {hi, hi}}, delta, h, 2));
}

Eigen::VectorXd randn(int m, unsigned seed) {
  gen::Gen g(seed);
  Eigen::VectorXd x(m);
  for (int i = 0; i < m; ++i) x(i) = g.uniform(-1, 1);
  return x;
}

const SolverOptions kTight{1e-12, 20000, false};

Field load_cos(const Domain& d, int n) {
  return interpolate(d.lat, Rank::Vector, [n](const double* x, double* o) {
    for (int c = 0; c < n; ++c) o[c] = std::cos(2 * x[0] + c) + (n == 2 ? x[1] : 0.0);
  });
}

}  // namespace

TEST(Dirichlet, ZeroLoadGivesZero) {
  for (int n : {1, 2}) {
    auto dom = domain(n, 0.125, n == 1 ? 1.0 / 64 : 1.0 / 16);
    QuadOp op(make_truncated_fractional(n, 0.5, 0.125, 0.5), dom);
    for (Constraint t : {Constraint::ZeroOnComplement, Constraint::ZeroOnCollar}) {
      const SolveReport r = solve_dirichlet(Tensor::iso(n, 1, 0.5), op, zeros(dom->lat, Rank::Vector), t);
      EXPECT_EQ(r.v.v.cwiseAbs().maxCoeff(), 0.0);
      EXPECT_EQ(r.energy, 0.0);
    }
  }
}

TEST(Dirichlet, StiffnessIsSymmetricPositive) {
  gen::Gen g(51);
  for (int c = 0; c < 6; ++c) {
    const int n = g.integer(1, 2);
    const double h = n == 1 ? 1.0 / 64 : 1.0 / 16, delta = h * g.integer(2, 4);
    auto dom = domain(n, delta, h);
    QuadOp op(make_truncated_fractional(n, g.uniform(0.2, 0.8), delta, 0.5), dom);
    const double mu = g.uniform(0.3, 2);
    const Tensor C = Tensor::iso(n, mu, g.uniform(-0.9 * 2 * mu / n, 2));
    const StiffnessSystem sys = assemble_dirichlet(C, op, load_cos(*dom, n), Constraint::ZeroOnComplement);
    EXPECT_LT(sys.symmetry_defect, 1e-13);
    EXPECT_GT(min_ritz_value(sys.K), 0.0);
    EXPECT_TRUE(random_spd_check(sys.K, 20, 100 + c));
  }
}

TEST(Dirichlet, ManufacturedSolutionIsRecovered) {
  for (int n : {1, 2}) {
    auto dom = domain(n, 0.125, n == 1 ? 1.0 / 64 : 1.0 / 16);
    QuadOp op(make_truncated_fractional(n, 0.4, 0.125, 0.5), dom);
    const StiffnessSystem sys =
        assemble_dirichlet(Tensor::iso(n, 1, 0.5), op, zeros(dom->lat, Rank::Vector), Constraint::ZeroOnComplement);
    const Eigen::VectorXd xs = randn(static_cast<int>(sys.K.rows()), 7 + n);
    const CGResult r = cg([&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return sys.K * x; }, sys.K * xs,
                          Eigen::VectorXd::Zero(xs.size()), kTight);
    EXPECT_TRUE(r.converged);
    EXPECT_LT((r.x - xs).norm() / xs.norm(), 1e-8);
  }
}

TEST(Dirichlet, SolutionIsTheEnergyMinimizer) {
  auto dom = domain(1, 0.125, 1.0 / 64);
  QuadOp op(make_truncated_fractional(1, 0.6, 0.125, 0.5), dom);
  const Tensor C = Tensor::iso(1, 1, 0);
  const Field f = load_cos(*dom, 1);
  const SolveReport a = solve_dirichlet(C, op, f, Constraint::ZeroOnComplement, kTight);
  const StiffnessSystem sys = assemble_dirichlet(C, op, f, Constraint::ZeroOnComplement);
  const Eigen::VectorXd w = form_weights(*dom, FormScope::Whole);
  const double e0 = energy(C, op, a.v, f, w);
  EXPECT_NEAR(e0, a.energy, 1e-12 * std::abs(e0));
  EXPECT_LT(e0, 0.0);  // E(u) = -a(u, u) / 2
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd dx = randn(static_cast<int>(sys.K.rows()), 300 + t);
    const Field p = sys.scatter(sys.gather(a.v) + 0.01 * dx * a.v.v.norm() / dx.norm(), dom->lat);
    EXPECT_GT(energy(C, op, p, f, w), e0);
  }
}

TEST(Dirichlet, InitialGuessDoesNotMatter) {
  auto dom = domain(2, 0.125, 1.0 / 16);
  QuadOp op(make_truncated_fractional(2, 0.5, 0.125, 0.5), dom);
  const Tensor C = Tensor::iso(2, 1, 0.5);
  const Field f = load_cos(*dom, 2);
  const SolveReport a = solve_dirichlet(C, op, f, Constraint::ZeroOnComplement, kTight);
  const Eigen::VectorXd x0 = randn(a.dofs, 9);
  const SolveReport b = solve_dirichlet(C, op, f, Constraint::ZeroOnComplement, kTight, &x0);
  EXPECT_LT((a.v.v - b.v.v).norm() / a.v.v.norm(), 1e-8);
}

TEST(Dirichlet, EvenLoadGivesEvenSolution) {
  const double h = 1.0 / 80;
  auto dom = domain(1, 0.1, h);
  QuadOp op(make_truncated_fractional(1, 0.5, 0.1, 0.5), dom);
  const Field f = interpolate(dom->lat, Rank::Vector, [](const double* x, double* o) { o[0] = 1 + (x[0] - 0.5) * (x[0] - 0.5); });
  for (Constraint t : {Constraint::ZeroOnComplement, Constraint::ZeroOnCollar}) {
    const SolveReport r = solve_dirichlet(Tensor::iso(1, 1, 0.5), op, f, t, kTight);
    const int N = dom->size();
    // the lattice is symmetric about x = 1/2
    ASSERT_NEAR(dom->lat->x(0, 0) + dom->lat->x(N - 1, 0), 1.0, 1e-12);
    for (int k = 0; k < N; ++k) EXPECT_NEAR(r.v.v(k, 0), r.v.v(N - 1 - k, 0), 1e-10);
  }
}

TEST(Dirichlet, StrongAndWeakFormsAgree) {
  for (int n : {1, 2}) {
    auto dom = domain(n, 0.125, n == 1 ? 1.0 / 64 : 1.0 / 16);
    QuadOp op(make_truncated_fractional(n, 0.5, 0.125, 0.5), dom);
    const Field f = load_cos(*dom, n);
    const SolveReport w = solve_dirichlet(Tensor::iso(n, 1, -0.5), op, f, Constraint::ZeroOnComplement, kTight);
    const SolveReport s = solve_dirichlet_strongform_isotropic(1, -0.5, op, f, Constraint::ZeroOnComplement, kTight);
    EXPECT_LT((w.v.v - s.v.v).norm() / w.v.v.norm(), 1e-8) << n;
  }
}

TEST(Dirichlet, NearlyIncompressibleLameStillSolves) {
  // mu = 1, lambda = -1 keeps 2 mu + n lambda = 0 in 2-D: only the deviatoric part is coercive
  auto dom = domain(2, 0.125, 1.0 / 16);
  QuadOp op(make_truncated_fractional(2, 0.5, 0.125, 0.5), dom);
  const SolveReport r = solve_dirichlet(Tensor::iso(2, 1, -1), op, load_cos(*dom, 2), Constraint::ZeroOnComplement, kTight);
  EXPECT_TRUE(r.converged);
  EXPECT_GT(r.v.v.norm(), 0.0);
}

TEST(Dirichlet, FreeTagIsRejected) {
  auto dom = domain(1, 0.125, 1.0 / 32);
  QuadOp op(make_truncated_fractional(1, 0.5, 0.125, 0.5), dom);
  EXPECT_THROW(solve_dirichlet(Tensor::iso(1, 1, 0), op, zeros(dom->lat, Rank::Vector), Constraint::Free),
               std::invalid_argument);
}

TEST(NullSpace, ContainsConstantsAndMore) {
  for (int n : {1, 2}) {
    auto dom = domain(n, 0.125, n == 1 ? 1.0 / 64 : 1.0 / 16);
    QuadOp op(make_truncated_fractional(n, 0.5, 0.125, 0.5), dom);
    const NullSpaceBasis nb = compute_nullspace(op);
    EXPECT_GT(nb.dim(), n);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(static_cast<int>(nb.dofs.size()));
    EXPECT_LT(project_out(nb, one).norm(), 1e-9 * one.norm());
    // basis vectors are mass-orthonormal
    const Eigen::MatrixXd G = nb.mass * nb.B.transpose() * nb.B;
    EXPECT_LT((G - Eigen::MatrixXd::Identity(nb.dim(), nb.dim())).cwiseAbs().maxCoeff(), 1e-10);
    // some basis element is not constant
    double spread = 0;
    for (int j = 0; j < nb.dim(); ++j) spread = std::max(spread, nb.B.col(j).maxCoeff() - nb.B.col(j).minCoeff());
    EXPECT_GT(spread, 1e-3);
  }
}

TEST(NullSpace, MembersHaveZeroGradientOnClosedOmega) {
  auto dom = domain(1, 0.125, 1.0 / 64);
  QuadOp op(make_truncated_fractional(1, 0.5, 0.125, 0.5), dom);
  const NullSpaceBasis nb = compute_nullspace(op);
  for (int j = 0; j < nb.dim(); ++j) {
    Field u = zeros(dom->lat, Rank::Scalar);
    for (std::size_t i = 0; i < nb.dofs.size(); ++i) u.v(nb.dofs[i], 0) = nb.B(static_cast<int>(i), j);
    const Field D = op.grad(u);
    for (int k = 0; k < dom->size(); ++k)
      if (dom->in_omega_closure(k)) ASSERT_LT(std::abs(D.v(k, 0)), 1e-8 * nb.sigma_max * nb.B.col(j).norm());
  }
}

TEST(NullSpace, ProjectionIsIdempotentAndKillsTheSpan) {
  auto dom = domain(1, 0.125, 1.0 / 64);
  QuadOp op(make_truncated_fractional(1, 0.3, 0.125, 0.5), dom);
  const NullSpaceBasis nb = compute_nullspace(op);
  const int m = static_cast<int>(nb.dofs.size());
  const Eigen::VectorXd x = randn(m, 3);
  const Eigen::VectorXd p = project_out(nb, x);
  EXPECT_LT((project_out(nb, p) - p).norm(), 1e-12 * x.norm());
  EXPECT_LT((nb.mass * nb.B.transpose() * p).cwiseAbs().maxCoeff(), 1e-12 * x.norm());
  const Eigen::VectorXd span = nb.B * randn(nb.dim(), 4);
  EXPECT_LT(project_out(nb, span).norm(), 1e-10 * span.norm());
}

TEST(NullSpace, PoincareWirtingerConstantBoundsTheComplement) {
  const double h = 1.0 / 64;
  auto dom = domain(1, 0.125, h);
  QuadOp op(make_truncated_fractional(1, 0.5, 0.125, 0.5), dom);
  const NullSpaceBasis nb = compute_nullspace(op);
  const double cpw = poincare_wirtinger_constant(nb, h);
  ASSERT_TRUE(std::isfinite(cpw));
  ASSERT_GT(cpw, 0.0);
  // random fields: ||u - pi u|| <= C ||D u||_closed Omega
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd x = randn(static_cast<int>(nb.dofs.size()), 50 + t);
    Field u = zeros(dom->lat, Rank::Scalar);
    for (std::size_t i = 0; i < nb.dofs.size(); ++i) u.v(nb.dofs[i], 0) = x(static_cast<int>(i));
    const Field D = op.grad(u);
    double dn = 0;
    for (int k = 0; k < dom->size(); ++k)
      if (dom->in_omega_closure(k)) dn += h * D.v(k, 0) * D.v(k, 0);
    const double un = std::sqrt(h) * project_out(nb, x).norm();
    EXPECT_LE(un, cpw * std::sqrt(dn) * (1 + 1e-9));
  }
}

TEST(Neumann, ZeroLoadGivesZero) {
  auto dom = domain(1, 0.125, 1.0 / 64);
  QuadOp op(make_truncated_fractional(1, 0.5, 0.125, 0.5), dom);
  const SolveReport r = solve_neumann(Tensor::iso(1, 1, 0.5), op, zeros(dom->lat, Rank::Vector));
  EXPECT_EQ(r.v.v.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(r.nullspace_dim, 1);
}

TEST(Neumann, ManufacturedSolutionIsRecoveredModuloNullSpace) {
  auto dom = domain(1, 0.125, 1.0 / 64);
  QuadOp op(make_truncated_fractional(1, 0.5, 0.125, 0.5), dom);
  const Tensor C = Tensor::iso(1, 1, 0.5);
  const NullSpaceBasis nb = compute_nullspace(op);
  const StiffnessSystem sys = assemble_neumann(C, op, zeros(dom->lat, Rank::Vector));
  const Eigen::VectorXd xs = project_out(nb, randn(static_cast<int>(sys.K.rows()), 21));
  const SolveReport r = solve_neumann_system(C, op, sys, nb, sys.K * xs, kTight);
  EXPECT_LT((project_out(nb, sys.gather(r.v)) - xs).norm() / xs.norm(), 1e-8);
  // the reported solution is the minimal one
  EXPECT_LT((nb.B.transpose() * sys.gather(r.v)).cwiseAbs().maxCoeff(), 1e-8 * xs.norm());
}

TEST(Neumann, LoadRulesAreEnforced) {
  auto dom = domain(1, 0.125, 1.0 / 64);
  QuadOp op(make_truncated_fractional(1, 0.5, 0.125, 0.5), dom);
  const Tensor C = Tensor::iso(1, 1, 0.5);
  Field collar = zeros(dom->lat, Rank::Vector);
  for (int k = 0; k < dom->size(); ++k)
    if (dom->region[k] == Region::InnerCollar) collar.v(k, 0) = 1;
  EXPECT_THROW(solve_neumann(C, op, collar), std::invalid_argument);
  Field ones = zeros(dom->lat, Rank::Vector);
  for (int k = 0; k < dom->size(); ++k)
    if (dom->region[k] == Region::Inner) ones.v(k, 0) = 1;
  EXPECT_THROW(solve_neumann(C, op, ones), HypothesisError);  // constants are in the null space
  const SolveReport r = solve_neumann(C, op, ones, kTight, true);
  EXPECT_TRUE(r.converged);
}

TEST(Neumann, OddLoadIsCompatibleAndFluxIsReported) {
  auto dom = domain(1, 0.125, 1.0 / 64);
  QuadOp op(make_truncated_fractional(1, 0.5, 0.125, 0.5), dom);
  Field f = zeros(dom->lat, Rank::Vector);
  for (int k = 0; k < dom->size(); ++k)
    if (dom->region[k] == Region::Inner) f.v(k, 0) = std::sin(2 * M_PI * dom->lat->x(k, 0));
  const SolveReport r = solve_neumann(Tensor::iso(1, 1, 0.5), op, f, kTight, true);
  EXPECT_TRUE(r.converged);
  EXPECT_GT(r.v.v.norm(), 0.0);
  EXPECT_TRUE(std::isfinite(r.collar_flux_max));
  EXPECT_LT(r.energy, 0.0);  // minimizer of 1/2 a(v, v) - <f, v> with a non-zero load
}

TEST(LocalOracle, ParabolaIsExactAtNodes) {
  for (int cells : {16, 32}) {
    const double h = 1.0 / cells;
    auto dom = domain(1, 2 * h, h);
    const double mu = 1, lambda = 0.5;
    Field f = interpolate(dom->lat, Rank::Vector, [](const double*, double* o) { o[0] = 1; });
    const SolveReport r = solve_local_oracle(*dom, Tensor::iso(1, mu, lambda), f, LocalBC::Dirichlet, kTight);
    for (int k = 0; k < dom->size(); ++k) {
      const double x = dom->lat->x(k, 0);
      if (x < -1e-12 || x > 1 + 1e-12) continue;
      EXPECT_NEAR(r.v.v(k, 0), x * (1 - x) / (2 * (2 * mu + lambda)), 1e-11);
    }
  }
}

TEST(LocalOracle, SecondOrderConvergence) {
  const double mu = 1, lambda = 0.5;
  std::vector<double> err;
  for (int cells : {16, 32, 64}) {
    const double h = 1.0 / cells;
    auto dom = domain(1, 2 * h, h);
    Field f = interpolate(dom->lat, Rank::Vector, [](const double* x, double* o) { o[0] = std::sin(M_PI * x[0]); });
    const SolveReport r = solve_local_oracle(*dom, Tensor::iso(1, mu, lambda), f, LocalBC::Dirichlet, kTight);
    double e = 0;
    for (int k = 0; k < dom->size(); ++k) {
      const double x = dom->lat->x(k, 0);
      if (x < -1e-12 || x > 1 + 1e-12) continue;
      e = std::max(e, std::abs(r.v.v(k, 0) - std::sin(M_PI * x) / ((2 * mu + lambda) * M_PI * M_PI)));
    }
    err.push_back(e);
  }
  for (std::size_t i = 1; i < err.size(); ++i) EXPECT_GE(std::log2(err[i - 1] / err[i]), 1.9);
}

TEST(Restrict, NestedGridsAndOutsideNodes) {
  auto fine = domain(1, 0.125, 1.0 / 64), coarse = domain(1, 0.125, 1.0 / 32);
  const Field f = interpolate(fine->lat, Rank::Vector, [](const double* x, double* o) { o[0] = x[0] * x[0]; });
  const Field g = restrict_to(f, coarse->lat);
  for (int k = 0; k < coarse->size(); ++k) EXPECT_NEAR(g.v(k, 0), std::pow(coarse->lat->x(k, 0), 2), 1e-14);
  auto wide = domain(1, 0.25, 1.0 / 32);
  EXPECT_THROW(restrict_to(f, wide->lat), std::invalid_argument);
  EXPECT_NO_THROW(restrict_to(f, wide->lat, true));
}
