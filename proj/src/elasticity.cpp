#include "nlel/elasticity.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <stdexcept>

namespace nlel {

Tensor Tensor::iso(int n, double mu, double lambda) {
  Tensor t;
  t.n = n;
  t.isotropic = true;
  t.mu = mu;
  t.lambda = lambda;
  return t;
}

Tensor Tensor::general(int n, std::vector<double> c) {
  if (c.size() != static_cast<std::size_t>(n * n * n * n))
    throw std::invalid_argument("Tensor::general: expected n^4 components");
  Tensor t;
  t.n = n;
  t.isotropic = false;
  t.c = std::move(c);
  return t;
}

double Tensor::at(int i, int j, int k, int l) const {
  if (!isotropic) return c[((i * n + j) * n + k) * n + l];
  // 2 mu (M_sym)_ij + lambda tr(M) delta_ij
  double v = 0;
  if (i == k && j == l) v += mu;
  if (i == l && j == k) v += mu;
  if (i == j && k == l) v += lambda;
  return v;
}

Eigen::MatrixXd apply_tensor(const Tensor& C, const Eigen::MatrixXd& M) {
  const int n = C.n;
  if (M.rows() != n || M.cols() != n) throw std::invalid_argument("apply_tensor: dimension mismatch");
  if (C.isotropic) {
    Eigen::MatrixXd S = 0.5 * (M + M.transpose());
    return 2 * C.mu * S + C.lambda * M.trace() * Eigen::MatrixXd::Identity(n, n);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) out(i, j) += C.at(i, j, k, l) * M(k, l);
  return out;
}

Ellipticity strong_ellipticity(const Tensor& C, int samples, unsigned seed) {
  Ellipticity e;
  const int n = C.n;
  if (C.isotropic) {
    e.margin = std::min(C.mu, 2 * C.mu + C.lambda);
    e.ok = C.mu > 0 && 2 * C.mu + C.lambda > 0;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = nd(rng);
      b[i] = nd(rng);
    }
    a.normalize();
    b.normalize();
    Eigen::MatrixXd M = a * b.transpose();
    best = std::min(best, (apply_tensor(C, M).cwiseProduct(M)).sum());
  }
  // n = 1 has only a = b = +-1
  e.sampled_min = best;
  if (!C.isotropic) {
    e.margin = best;
    e.ok = best > 0;
  }
  return e;
}

namespace {

// orthonormal basis of symmetric n x n matrices (Frobenius)
std::vector<Eigen::MatrixXd> sym_basis(int n) {
  std::vector<Eigen::MatrixXd> B;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
      if (i == j) {
        E(i, i) = 1;
      } else {
        E(i, j) = E(j, i) = std::sqrt(0.5);
      }
      B.push_back(E);
    }
  return B;
}

}  // namespace

double voigt_c1(const Tensor& C) {
  auto B = sym_basis(C.n);
  const int m = static_cast<int>(B.size());
  Eigen::MatrixXd V(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) V(a, b) = apply_tensor(C, B[b]).cwiseProduct(B[a]).sum();
  V = 0.5 * (V + V.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V);
  return es.eigenvalues().minCoeff();
}

double minor_symmetry_defect(const Tensor& C) {
  const int n = C.n;
  double d = 0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
      E(k, l) = 1;
      Eigen::MatrixXd S = 0.5 * (E + E.transpose());
      Eigen::MatrixXd a = apply_tensor(C, E), b = apply_tensor(C, S);
      d = std::max(d, (a - b).cwiseAbs().maxCoeff());
      d = std::max(d, (a - a.transpose()).cwiseAbs().maxCoeff());
    }
  return d;
}

Eigen::VectorXd form_weights(const Domain& dom, FormScope scope) {
  Eigen::VectorXd w(dom.size());
  const double hn = dom.lat->cell_volume();
  for (int k = 0; k < dom.size(); ++k) w[k] = scope == FormScope::Whole ? hn : dom.omega_weight(k);
  return w;
}

Field stress(const Tensor& C, const QuadOp& op, const Field& v) {
  Field S = op.sym_grad(v);
  const int n = op.n();
  Field out = S;
  Eigen::MatrixXd M(n, n);
  for (int k = 0; k < S.v.rows(); ++k) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = S.v(k, i * n + j);
    Eigen::MatrixXd T = apply_tensor(C, M);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.v(k, i * n + j) = T(i, j);
  }
  return out;
}

double bilinear(const Tensor& C, const QuadOp& op, const Field& v, const Field& w, const Eigen::VectorXd& wts) {
  Field Sv = stress(C, op, v);
  Field Sw = op.sym_grad(w);
  return (Sv.v.cwiseProduct(Sw.v).rowwise().sum()).dot(wts);
}

double bilinear_iso_expanded(double mu, double lambda, const QuadOp& op, const Field& v, const Field& w,
                             const Eigen::VectorXd& wts) {
  Field Sv = op.sym_grad(v), Sw = op.sym_grad(w);
  Field dv = op.div(v), dw = op.div(w);
  Eigen::VectorXd node = 2 * mu * Sv.v.cwiseProduct(Sw.v).rowwise().sum() + lambda * dv.v.col(0).cwiseProduct(dw.v.col(0));
  return node.dot(wts);
}

double energy(const Tensor& C, const QuadOp& op, const Field& v, const Field& f, const Eigen::VectorXd& wts) {
  const double a = bilinear(C, op, v, v, wts);
  const double load = (f.v.cwiseProduct(v.v).rowwise().sum()).dot(wts);
  return 0.5 * a - load;
}

}  // namespace nlel
