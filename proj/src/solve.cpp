#include "nlel/solve.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>

namespace nlel {

namespace {

using Trip = Eigen::Triplet<double>;

// Dsym as a matrix: rows (row node r, comp i*n+j) -> r*n^2 + i*n + j,
// cols (dof d, comp c) -> c*m + d
SpMat sym_grad_matrix(const QuadOp& op, const std::vector<int>& rows, const std::vector<int>& dofs) {
  const int n = op.n();
  const int m = static_cast<int>(dofs.size());
  std::vector<SpMat> G;
  for (int d = 0; d < n; ++d) G.push_back(op.grad_matrix(d, rows, dofs));
  std::vector<Trip> t;
  for (int j = 0; j < n; ++j)
    for (int r = 0; r < G[j].outerSize(); ++r)
      for (SpMat::InnerIterator it(G[j], r); it; ++it)
        for (int i = 0; i < n; ++i) {
          // (Dsym v)_ij gets 1/2 G_j v_i and 1/2 G_i v_j
          t.emplace_back(r * n * n + i * n + j, i * m + it.col(), 0.5 * it.value());
          t.emplace_back(r * n * n + j * n + i, i * m + it.col(), 0.5 * it.value());
        }
  SpMat B(static_cast<int>(rows.size()) * n * n, n * m);
  B.setFromTriplets(t.begin(), t.end());
  return B;
}

// block diagonal w_r * C_(ij),(kl)
SpMat tensor_blocks(const Tensor& C, const std::vector<double>& w) {
  const int n = C.n, nn = n * n;
  std::vector<Trip> t;
  for (std::size_t r = 0; r < w.size(); ++r) {
    if (w[r] == 0.0) continue;
    for (int a = 0; a < nn; ++a)
      for (int b = 0; b < nn; ++b) {
        const double c = C.at(a / n, a % n, b / n, b % n);
        if (c != 0.0) t.emplace_back(int(r) * nn + a, int(r) * nn + b, w[r] * c);
      }
  }
  SpMat D(static_cast<int>(w.size()) * nn, static_cast<int>(w.size()) * nn);
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

double symmetry_defect(const SpMat& K) {
  SpMat Kt = K.transpose();
  const double nk = K.norm();
  return nk > 0 ? (K - Kt).norm() / nk : 0.0;
}

std::vector<int> dirichlet_dofs(const Domain& dom, Constraint tag) {
  if (tag == Constraint::Free) throw std::invalid_argument("solve_dirichlet: a constraint tag is required");
  return dom.nodes_where([&](Region r) {
    return r == Region::Inner || (tag == Constraint::ZeroOnComplement && r == Region::InnerCollar);
  });
}

const Domain& need_domain(const QuadOp& op) {
  if (!op.domain()) throw std::invalid_argument("solve: the operator must live on a bounded domain");
  return *op.domain();
}

Eigen::VectorXd load_vector(const Field& f, const std::vector<int>& dofs, double hn, int comps) {
  const int m = static_cast<int>(dofs.size());
  Eigen::VectorXd F(comps * m);
  for (int c = 0; c < comps; ++c)
    for (int i = 0; i < m; ++i) F[c * m + i] = hn * f.v(dofs[i], c);
  return F;
}

}  // namespace

Eigen::VectorXd StiffnessSystem::gather(const Field& v) const {
  const int m = static_cast<int>(dofs.size());
  Eigen::VectorXd x(comps * m);
  for (int c = 0; c < comps; ++c)
    for (int i = 0; i < m; ++i) x[c * m + i] = v.v(dofs[i], c);
  return x;
}

Field StiffnessSystem::scatter(const Eigen::VectorXd& x, std::shared_ptr<const Lattice> lat) const {
  const int m = static_cast<int>(dofs.size());
  Field v = zeros(std::move(lat), Rank::Vector);
  for (int c = 0; c < comps; ++c)
    for (int i = 0; i < m; ++i) v.v(dofs[i], c) = x[c * m + i];
  v.tag = tag;
  return v;
}

CGResult cg(const LinOp& A, const Eigen::VectorXd& b, const Eigen::VectorXd& x0, const SolverOptions& opt,
            const Eigen::VectorXd* inv_diag, const LinOp* project) {
  CGResult res;
  auto P = [&](Eigen::VectorXd v) { return project ? (*project)(v) : v; };
  auto prec = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    if (!inv_diag) return r;
    return P(inv_diag->cwiseProduct(r));
  };
  Eigen::VectorXd x = P(x0);
  const Eigen::VectorXd bp = P(b);
  const double bn = bp.norm();
  if (bn == 0.0) {
    res.x = Eigen::VectorXd::Zero(b.size());
    res.converged = true;
    return res;
  }
  Eigen::VectorXd r = P(bp - A(x));
  Eigen::VectorXd z = prec(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    if (r.norm() <= opt.tol * bn) break;
    Eigen::VectorXd Ap = P(A(p));
    const double pAp = p.dot(Ap);
    if (!(pAp > 0)) {
      res.nonpositive = true;
      break;
    }
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    // refresh the recursive residual now and then
    if ((it + 1) % 200 == 0) r = P(bp - A(x));
    z = prec(r);
    const double rz2 = r.dot(z);
    p = z + (rz2 / rz) * p;
    rz = rz2;
  }
  res.x = x;
  res.iterations = it;
  res.residual = P(bp - A(x)).norm() / bn;
  res.converged = !res.nonpositive && res.residual <= 10 * opt.tol;
  return res;
}

// ---------------- Dirichlet ----------------

StiffnessSystem assemble_dirichlet(const Tensor& C, const QuadOp& op, const Field& f, Constraint tag) {
  const Domain& dom = need_domain(op);
  if (C.n != op.n()) throw std::invalid_argument("assemble_dirichlet: tensor dimension differs from the grid");
  StiffnessSystem sys;
  sys.tag = tag;
  sys.comps = op.n();
  sys.dofs = dirichlet_dofs(dom, tag);
  std::vector<int> rows(dom.size());
  for (int k = 0; k < dom.size(); ++k) rows[k] = k;
  SpMat B = sym_grad_matrix(op, rows, sys.dofs);
  std::vector<double> w(dom.size(), dom.lat->cell_volume());
  SpMat D = tensor_blocks(C, w);
  SpMat DB = D * B;
  sys.K = SpMat(B.transpose()) * DB;
  sys.K.prune(0.0);
  sys.symmetry_defect = symmetry_defect(sys.K);
  sys.F = load_vector(f, sys.dofs, dom.lat->cell_volume(), sys.comps);
  return sys;
}

namespace {

SolveReport finish_solve(const SpMat& K, const Eigen::VectorXd& F, const StiffnessSystem& sys, const QuadOp& op,
                         const SolverOptions& opt, const Eigen::VectorXd* x0) {
  SolveReport rep;
  rep.dofs = static_cast<int>(F.size());
  Eigen::VectorXd start = x0 ? *x0 : Eigen::VectorXd::Zero(F.size());
  Eigen::VectorXd invd;
  if (opt.diagonal_precond) invd = K.diagonal().cwiseInverse();
  LinOp A = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return K * v; };
  CGResult r = cg(A, F, start, opt, opt.diagonal_precond ? &invd : nullptr, nullptr);
  if (r.nonpositive) throw SolverError("solve: non-positive curvature, the stiffness matrix is not SPD");
  if (!r.converged)
    throw SolverError("solve: CG stagnated at relative residual " + std::to_string(r.residual) + " after " +
                      std::to_string(r.iterations) + " iterations");
  rep.iterations = r.iterations;
  rep.residual = r.residual;
  rep.converged = true;
  rep.energy = 0.5 * r.x.dot(K * r.x) - F.dot(r.x);
  rep.v = sys.scatter(r.x, op.domain()->lat);
  return rep;
}

}  // namespace

SolveReport solve_dirichlet(const Tensor& C, const QuadOp& op, const Field& f, Constraint tag, const SolverOptions& opt,
                            const Eigen::VectorXd* x0) {
  StiffnessSystem sys = assemble_dirichlet(C, op, f, tag);
  return finish_solve(sys.K, sys.F, sys, op, opt, x0);
}

SpMat assemble_strong_iso(double mu, double lambda, const QuadOp& op, const std::vector<int>& dofs) {
  const int n = op.n();
  const int m = static_cast<int>(dofs.size());
  const double hn = op.lattice().cell_volume();
  std::vector<SpMat> GG(n * n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) GG[i * n + k] = SpMat(op.grad_matrix(i) * op.grad_matrix(k));
  std::vector<int> pos(op.lattice().size(), -1);
  for (int i = 0; i < m; ++i) pos[dofs[i]] = i;
  std::vector<Trip> t;
  auto add = [&](const SpMat& M, int bi, int bk, double scale) {
    for (int i = 0; i < m; ++i)
      for (SpMat::InnerIterator it(M, dofs[i]); it; ++it)
        if (pos[it.col()] >= 0) t.emplace_back(bi * m + i, bk * m + pos[it.col()], scale * it.value());
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) add(GG[j * n + j], i, i, -mu * hn);
    for (int k = 0; k < n; ++k) add(GG[i * n + k], i, k, -(mu + lambda) * hn);
  }
  SpMat S(n * m, n * m);
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

SolveReport solve_dirichlet_strongform_isotropic(double mu, double lambda, const QuadOp& op, const Field& f,
                                                 Constraint tag, const SolverOptions& opt) {
  const Domain& dom = need_domain(op);
  StiffnessSystem sys = assemble_dirichlet(Tensor::iso(op.n(), mu, lambda), op, f, tag);
  (void)dom;
  SpMat S = assemble_strong_iso(mu, lambda, op, sys.dofs);
  const double disc = (sys.K - S).norm() / sys.K.norm();
  SpMat Ssym = 0.5 * (S + SpMat(S.transpose()));
  SolveReport rep = finish_solve(Ssym, sys.F, sys, op, opt, nullptr);
  rep.operator_discrepancy = disc;
  return rep;
}

double min_ritz_value(const SpMat& K, int steps, unsigned seed) {
  const int N = static_cast<int>(K.rows());
  steps = std::min(steps, N);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd Qm(N, steps);
  Eigen::VectorXd q(N);
  for (int i = 0; i < N; ++i) q[i] = nd(rng);
  q.normalize();
  std::vector<double> alpha, beta;
  for (int j = 0; j < steps; ++j) {
    Qm.col(j) = q;
    Eigen::VectorXd w = K * q;
    const double a = q.dot(w);
    alpha.push_back(a);
    // full reorthogonalization
    w -= Qm.leftCols(j + 1) * (Qm.leftCols(j + 1).transpose() * w);
    w -= Qm.leftCols(j + 1) * (Qm.leftCols(j + 1).transpose() * w);
    const double b = w.norm();
    if (b < 1e-14 * std::abs(a) || j + 1 == steps) break;
    beta.push_back(b);
    q = w / b;
  }
  const int m = static_cast<int>(alpha.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  return es.eigenvalues().minCoeff();
}

bool random_spd_check(const SpMat& K, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int c = 0; c < count; ++c) {
    Eigen::VectorXd x(K.rows());
    for (int i = 0; i < x.size(); ++i) x[i] = nd(rng);
    if (!(x.dot(K * x) > 0)) return false;
  }
  return true;
}

// ---------------- Neumann ----------------

std::vector<int> neumann_dofs(const QuadOp& op) {
  const Domain& dom = need_domain(op);
  std::vector<char> mark(dom.size(), 0);
  for (int k = 0; k < dom.size(); ++k)
    if (dom.in_omega_delta(k)) mark[k] = 1;
  for (int d = 0; d < op.n(); ++d) {
    const SpMat& G = op.grad_matrix(d);
    for (int k = 0; k < dom.size(); ++k) {
      if (!dom.in_omega_closure(k)) continue;
      for (SpMat::InnerIterator it(G, k); it; ++it) mark[it.col()] = 1;
    }
  }
  std::vector<int> out;
  for (int k = 0; k < dom.size(); ++k)
    if (mark[k]) out.push_back(k);
  return out;
}

namespace {

std::vector<int> omega_rows(const Domain& dom, std::vector<double>* w) {
  std::vector<int> rows;
  for (int k = 0; k < dom.size(); ++k)
    if (dom.in_omega_closure(k)) {
      rows.push_back(k);
      if (w) w->push_back(dom.omega_weight(k));
    }
  return rows;
}

NullSpaceBasis kernel_of(const Eigen::MatrixXd& A, std::vector<int> dofs, int comps, double hn, double rel_tol) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  NullSpaceBasis nb;
  nb.dofs = std::move(dofs);
  nb.comps = comps;
  nb.mass = hn;
  nb.sigma_max = sv.size() ? sv[0] : 0.0;
  nb.singular.assign(sv.data(), sv.data() + sv.size());
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * nb.sigma_max) ++rank;
  const Eigen::MatrixXd& V = svd.matrixV();
  nb.B = V.rightCols(V.cols() - rank) / std::sqrt(hn);
  return nb;
}

}  // namespace

NullSpaceBasis compute_nullspace(const QuadOp& op, double rel_tol) {
  const Domain& dom = need_domain(op);
  std::vector<double> w;
  auto rows = omega_rows(dom, &w);
  auto dofs = neumann_dofs(op);
  const int n = op.n();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()) * n, dofs.size());
  for (int d = 0; d < n; ++d) {
    Eigen::MatrixXd Gd = Eigen::MatrixXd(op.grad_matrix(d, rows, dofs));
    for (std::size_t r = 0; r < rows.size(); ++r) Gd.row(r) *= std::sqrt(w[r]);
    A.middleRows(d * rows.size(), rows.size()) = Gd;
  }
  return kernel_of(A, std::move(dofs), 1, dom.lat->cell_volume(), rel_tol);
}

NullSpaceBasis compute_sym_nullspace(const QuadOp& op, double rel_tol) {
  const Domain& dom = need_domain(op);
  std::vector<double> w;
  auto rows = omega_rows(dom, &w);
  auto dofs = neumann_dofs(op);
  const int n = op.n();
  Eigen::MatrixXd A = Eigen::MatrixXd(sym_grad_matrix(op, rows, dofs));
  for (std::size_t r = 0; r < rows.size(); ++r) A.middleRows(r * n * n, n * n) *= std::sqrt(w[r]);
  return kernel_of(A, std::move(dofs), n, dom.lat->cell_volume(), rel_tol);
}

Eigen::VectorXd project_out(const NullSpaceBasis& nb, const Eigen::VectorXd& x) {
  const Eigen::Index m = nb.B.rows();
  if (x.size() % m != 0) throw std::invalid_argument("project_out: size mismatch");
  if (nb.comps > 1 || x.size() == m) {
    if (x.size() != m) throw std::invalid_argument("project_out: size mismatch");
    return x - nb.mass * (nb.B * (nb.B.transpose() * x));
  }
  Eigen::VectorXd out = x;
  for (Eigen::Index c = 0; c < x.size() / m; ++c) {
    auto seg = out.segment(c * m, m);
    seg -= nb.mass * (nb.B * (nb.B.transpose() * seg));
  }
  return out;
}

namespace {

Eigen::VectorXd stack(const NullSpaceBasis& nb, const Field& u) {
  const int m = static_cast<int>(nb.dofs.size());
  Eigen::VectorXd x(m * u.comps());
  for (int c = 0; c < u.comps(); ++c)
    for (int i = 0; i < m; ++i) x[c * m + i] = u.v(nb.dofs[i], c);
  return x;
}

Field unstack(const NullSpaceBasis& nb, const Eigen::VectorXd& x, const Field& like) {
  const int m = static_cast<int>(nb.dofs.size());
  Field out = zeros(like.lat, like.rank);
  for (int c = 0; c < like.comps(); ++c)
    for (int i = 0; i < m; ++i) out.v(nb.dofs[i], c) = x[c * m + i];
  out.tag = like.tag;
  return out;
}

}  // namespace

Field project_out_nullspace(const NullSpaceBasis& nb, const Field& u) {
  if (nb.comps > 1 && nb.comps != u.comps()) throw std::invalid_argument("project_out_nullspace: basis/field mismatch");
  return unstack(nb, project_out(nb, stack(nb, u)), u);
}

double compatibility_defect(const NullSpaceBasis& nb, const Field& f) {
  Eigen::VectorXd x = stack(nb, f);
  const Eigen::Index m = nb.B.rows();
  const double fn = std::sqrt(nb.mass) * x.norm();
  if (fn == 0.0) return 0.0;
  double worst = 0;
  // basis vectors are mass-orthonormal, so ||b_i|| = 1
  if (nb.comps > 1) {
    worst = (nb.mass * (nb.B.transpose() * x)).cwiseAbs().maxCoeff() / fn;
  } else {
    for (Eigen::Index c = 0; c < x.size() / m; ++c)
      worst = std::max(worst, (nb.mass * (nb.B.transpose() * x.segment(c * m, m))).cwiseAbs().maxCoeff() / fn);
  }
  return worst;
}

Field compatible_load(const NullSpaceBasis& nb, const Field& f, const Domain& dom) {
  const int m = static_cast<int>(nb.dofs.size());
  const int comps = f.comps();
  // restrict the basis to inner nodes and orthonormalize what is left
  auto restrict = [&](const Eigen::MatrixXd& B, int blocks) {
    Eigen::MatrixXd R = B;
    for (int c = 0; c < blocks; ++c)
      for (int i = 0; i < m; ++i)
        if (dom.region[nb.dofs[i]] != Region::Inner) R.row(c * m + i).setZero();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeThinU);
    int rank = 0;
    const auto& s = svd.singularValues();
    for (int i = 0; i < s.size(); ++i)
      if (s[i] > 1e-12 * std::max(1.0, s.size() ? s[0] : 0.0)) ++rank;
    return Eigen::MatrixXd(svd.matrixU().leftCols(rank));
  };
  Eigen::VectorXd x = stack(nb, f);
  for (int c = 0; c < comps; ++c)
    for (int i = 0; i < m; ++i)
      if (dom.region[nb.dofs[i]] != Region::Inner) x[c * m + i] = 0.0;
  if (nb.comps > 1) {
    Eigen::MatrixXd U = restrict(nb.B, comps);
    x -= U * (U.transpose() * x);
  } else {
    Eigen::MatrixXd U = restrict(nb.B, 1);
    for (int c = 0; c < comps; ++c) {
      auto seg = x.segment(c * m, m);
      seg -= U * (U.transpose() * seg);
    }
  }
  return unstack(nb, x, f);
}

double poincare_wirtinger_constant(const NullSpaceBasis& nb, double hn) {
  double smin = std::numeric_limits<double>::infinity();
  for (double s : nb.singular)
    if (s > 1e-10 * nb.sigma_max) smin = std::min(smin, s);
  return std::sqrt(hn) / smin;
}

StiffnessSystem assemble_neumann(const Tensor& C, const QuadOp& op, const Field& f) {
  const Domain& dom = need_domain(op);
  if (!op.kernel().compact()) throw std::invalid_argument("solve_neumann: needs a compactly supported kernel");
  StiffnessSystem sys;
  sys.comps = op.n();
  sys.dofs = neumann_dofs(op);
  std::vector<double> w;
  auto rows = omega_rows(dom, &w);
  SpMat B = sym_grad_matrix(op, rows, sys.dofs);
  SpMat D = tensor_blocks(C, w);
  SpMat DB = D * B;
  sys.K = SpMat(B.transpose()) * DB;
  sys.K.prune(0.0);
  sys.symmetry_defect = symmetry_defect(sys.K);
  sys.F = load_vector(f, sys.dofs, dom.lat->cell_volume(), sys.comps);
  return sys;
}

SolveReport solve_neumann_system(const Tensor& C, const QuadOp& op, const StiffnessSystem& sys,
                                 const NullSpaceBasis& sym_basis, const Eigen::VectorXd& F, const SolverOptions& opt,
                                 const Eigen::VectorXd* x0) {
  SolveReport rep;
  rep.dofs = static_cast<int>(F.size());
  LinOp A = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return sys.K * v; };
  LinOp P = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return project_out(sym_basis, v); };
  Eigen::VectorXd start = x0 ? *x0 : Eigen::VectorXd::Zero(F.size());
  Eigen::VectorXd invd;
  if (opt.diagonal_precond) invd = sys.K.diagonal().cwiseMax(1e-300).cwiseInverse();
  CGResult r = cg(A, F, start, opt, opt.diagonal_precond ? &invd : nullptr, &P);
  if (r.nonpositive) throw SolverError("solve_neumann: non-positive curvature on the complement");
  if (!r.converged)
    throw SolverError("solve_neumann: CG stagnated at relative residual " + std::to_string(r.residual));
  rep.iterations = r.iterations;
  rep.residual = r.residual;
  rep.converged = true;
  rep.energy = 0.5 * r.x.dot(sys.K * r.x) - F.dot(r.x);
  rep.v = sys.scatter(r.x, op.domain()->lat);
  rep.nullspace_dim = sym_basis.dim();
  Field S = stress(C, op, rep.v);
  Field N = op.normal_derivative(S);
  rep.collar_flux_max = N.v.cwiseAbs().maxCoeff();
  return rep;
}

SolveReport solve_neumann(const Tensor& C, const QuadOp& op, const Field& f, const SolverOptions& opt, bool project_f,
                          const Eigen::VectorXd* x0) {
  const Domain& dom = need_domain(op);
  for (int k = 0; k < dom.size(); ++k)
    if (dom.region[k] != Region::Inner && f.v.row(k).cwiseAbs().maxCoeff() != 0.0)
      throw std::invalid_argument("solve_neumann: the load must vanish on the collar and outside Omega_{-delta}");
  NullSpaceBasis nb = compute_nullspace(op);
  NullSpaceBasis nbs = op.n() == 1 ? nb : compute_sym_nullspace(op);
  if (op.n() == 1) nbs.comps = 1;
  Field load = f;
  const double defect = compatibility_defect(nbs, f);
  if (defect > 1e-10) {
    if (!project_f)
      throw HypothesisError("solve_neumann: load is not compatible with the null space (defect " +
                            std::to_string(defect) + ")");
    load = compatible_load(nbs, f, dom);
  }
  StiffnessSystem sys = assemble_neumann(C, op, load);
  SolveReport rep = solve_neumann_system(C, op, sys, nbs, sys.F, opt, x0);
  rep.nullspace_dim = nb.dim();
  return rep;
}

// ---------------- local oracle ----------------

SolveReport solve_local_oracle(const Domain& dom, const Tensor& C, const Field& f, LocalBC bc, const SolverOptions& opt) {
  const Lattice& lat = *dom.lat;
  const int n = lat.n;
  if (C.n != n) throw std::invalid_argument("solve_local_oracle: tensor dimension differs from the grid");
  // local numbering of the closed box
  std::array<int, 2> cnt{dom.hi_idx[0] - dom.lo_idx[0] + 1, n == 2 ? dom.hi_idx[1] - dom.lo_idx[1] + 1 : 1};
  const int nodes = cnt[0] * cnt[1];
  auto global = [&](int a, int b) { return lat.flat(dom.lo_idx[0] + a, n == 2 ? dom.lo_idx[1] + b : 0); };
  const double h = lat.h;
  std::vector<Trip> tk, tm;
  // unknown (node p, comp c) -> c*nodes + p
  if (n == 1) {
    const double c = C.at(0, 0, 0, 0);
    for (int e = 0; e + 1 < cnt[0]; ++e) {
      const int p[2] = {e, e + 1};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          tk.emplace_back(p[a], p[b], c / h * (a == b ? 1.0 : -1.0));
          tm.emplace_back(p[a], p[b], h / 6.0 * (a == b ? 2.0 : 1.0));
        }
    }
  } else {
    // each cell split along its (0,0)-(1,1) diagonal
    const double area = 0.5 * h * h;
    auto tri = [&](std::array<int, 3> p, std::array<std::array<double, 2>, 3> x) {
      // barycentric gradients
      const double det = (x[1][0] - x[0][0]) * (x[2][1] - x[0][1]) - (x[2][0] - x[0][0]) * (x[1][1] - x[0][1]);
      std::array<std::array<double, 2>, 3> g;
      for (int a = 0; a < 3; ++a) {
        const auto& q1 = x[(a + 1) % 3];
        const auto& q2 = x[(a + 2) % 3];
        g[a] = {(q1[1] - q2[1]) / det, (q2[0] - q1[0]) / det};
      }
      for (int a = 0; a < 3; ++a)
        for (int i = 0; i < 2; ++i) {
          Eigen::Matrix2d Ea = Eigen::Matrix2d::Zero();
          Ea(i, 0) = g[a][0];
          Ea(i, 1) = g[a][1];
          Eigen::MatrixXd Sa = apply_tensor(C, Ea);
          for (int b = 0; b < 3; ++b)
            for (int j = 0; j < 2; ++j) {
              Eigen::Matrix2d Eb = Eigen::Matrix2d::Zero();
              Eb(j, 0) = g[b][0];
              Eb(j, 1) = g[b][1];
              const double v = area * (Sa.array() * (0.5 * (Eb + Eb.transpose())).array()).sum();
              tk.emplace_back(i * nodes + p[a], j * nodes + p[b], v);
            }
        }
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) tm.emplace_back(p[a], p[b], area / 12.0 * (a == b ? 2.0 : 1.0));
    };
    for (int b = 0; b + 1 < cnt[1]; ++b)
      for (int a = 0; a + 1 < cnt[0]; ++a) {
        const int p00 = a + cnt[0] * b, p10 = p00 + 1, p01 = p00 + cnt[0], p11 = p01 + 1;
        const double x0 = a * h, y0 = b * h;
        tri({p00, p10, p11}, {{{x0, y0}, {x0 + h, y0}, {x0 + h, y0 + h}}});
        tri({p00, p11, p01}, {{{x0, y0}, {x0 + h, y0 + h}, {x0, y0 + h}}});
      }
  }
  const int N = n * nodes;
  SpMat K(N, N), M(nodes, nodes);
  K.setFromTriplets(tk.begin(), tk.end());
  M.setFromTriplets(tm.begin(), tm.end());
  // load: consistent mass times the nodal values of f
  Eigen::VectorXd F(N);
  for (int c = 0; c < n; ++c) {
    Eigen::VectorXd fc(nodes);
    for (int b = 0; b < cnt[1]; ++b)
      for (int a = 0; a < cnt[0]; ++a) fc[a + cnt[0] * b] = f.v(global(a, b), c);
    F.segment(c * nodes, nodes) = M * fc;
  }
  // rigid motions in nodal form (constants, plus the rotation in 2-D)
  Eigen::MatrixXd R;
  if (n == 1) {
    R = Eigen::MatrixXd::Ones(N, 1);
  } else {
    R = Eigen::MatrixXd::Zero(N, 3);
    for (int b = 0; b < cnt[1]; ++b)
      for (int a = 0; a < cnt[0]; ++a) {
        const int p = a + cnt[0] * b;
        R(p, 0) = 1;
        R(nodes + p, 1) = 1;
        R(p, 2) = -(b * h);
        R(nodes + p, 2) = a * h;
      }
  }
  SolveReport rep;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
  if (bc == LocalBC::Dirichlet) {
    std::vector<int> freeidx;
    for (int c = 0; c < n; ++c)
      for (int b = 0; b < cnt[1]; ++b)
        for (int a = 0; a < cnt[0]; ++a) {
          const bool bd = a == 0 || a == cnt[0] - 1 || (n == 2 && (b == 0 || b == cnt[1] - 1));
          if (!bd) freeidx.push_back(c * nodes + a + cnt[0] * b);
        }
    const int m = static_cast<int>(freeidx.size());
    std::vector<int> pos(N, -1);
    for (int i = 0; i < m; ++i) pos[freeidx[i]] = i;
    std::vector<Trip> tr;
    for (int r = 0; r < K.outerSize(); ++r)
      for (SpMat::InnerIterator it(K, r); it; ++it)
        if (pos[it.row()] >= 0 && pos[it.col()] >= 0) tr.emplace_back(pos[it.row()], pos[it.col()], it.value());
    SpMat Kf(m, m);
    Kf.setFromTriplets(tr.begin(), tr.end());
    Eigen::VectorXd Ff(m);
    for (int i = 0; i < m; ++i) Ff[i] = F[freeidx[i]];
    LinOp A = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return Kf * v; };
    CGResult r = cg(A, Ff, Eigen::VectorXd::Zero(m), opt);
    if (!r.converged) throw SolverError("solve_local_oracle: CG failed");
    for (int i = 0; i < m; ++i) x[freeidx[i]] = r.x[i];
    rep.iterations = r.iterations;
    rep.residual = r.residual;
    rep.dofs = m;
  } else {
    // compatible load: remove the rigid-motion part of F, solve on the complement
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(R);
    Eigen::MatrixXd Qr = qr.householderQ() * Eigen::MatrixXd::Identity(N, R.cols());
    LinOp P = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return v - Qr * (Qr.transpose() * v); };
    Eigen::VectorXd Fp = P(F);
    LinOp A = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return K * v; };
    CGResult r = cg(A, Fp, Eigen::VectorXd::Zero(N), opt, nullptr, &P);
    if (!r.converged) throw SolverError("solve_local_oracle: CG failed");
    x = r.x;
    // normalize: L2-orthogonal to rigid motions (zero mean)
    Eigen::MatrixXd MR(N, R.cols());
    for (int j = 0; j < R.cols(); ++j)
      for (int c = 0; c < n; ++c) MR.col(j).segment(c * nodes, nodes) = M * R.col(j).segment(c * nodes, nodes);
    Eigen::VectorXd coef = (R.transpose() * MR).ldlt().solve(MR.transpose() * x);
    x -= R * coef;
    rep.iterations = r.iterations;
    rep.residual = r.residual;
    rep.dofs = N;
    F = Fp;
  }
  rep.converged = true;
  rep.energy = 0.5 * x.dot(K * x) - F.dot(x);
  rep.v = zeros(dom.lat, Rank::Vector);
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < cnt[1]; ++b)
      for (int a = 0; a < cnt[0]; ++a) rep.v.v(global(a, b), c) = x[c * nodes + a + cnt[0] * b];
  return rep;
}

Field restrict_to(const Field& from, std::shared_ptr<const Lattice> to, bool outside_zero) {
  const Lattice& F = *from.lat;
  if (F.n != to->n) throw std::invalid_argument("restrict_to: dimension mismatch");
  Field out = zeros(to, from.rank);
  out.tag = from.tag;
  for (int k = 0; k < to->size(); ++k) {
    std::array<int, 2> ix{0, 0};
    bool inside = true;
    for (int d = 0; d < to->n; ++d) {
      const double q = (to->x(k, d) - F.origin[d]) / F.h;
      const double r = std::round(q);
      if (std::abs(q - r) > 1e-6) throw std::invalid_argument("restrict_to: grids are not nested");
      ix[d] = static_cast<int>(r);
      if (ix[d] < 0 || ix[d] >= F.count[d]) inside = false;
    }
    if (!inside) {
      if (!outside_zero) throw std::invalid_argument("restrict_to: node outside the source grid");
      continue;
    }
    out.v.row(k) = from.v.row(F.flat(ix[0], ix[1]));
  }
  return out;
}

}  // namespace nlel
