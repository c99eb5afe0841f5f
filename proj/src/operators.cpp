#include "nlel/operators.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "nlel/quadrature.hpp"

namespace nlel {

namespace {

void require_same_lattice(const Field& f, const Lattice& lat) {
  if (f.lat->size() != lat.size() || f.lat->n != lat.n || f.lat->h != lat.h)
    throw std::invalid_argument("operator: field lives on a different grid");
}

}  // namespace

QuadOp::QuadOp(Kernel k, std::shared_ptr<const Lattice> lat, int reach)
    : k_(std::move(k)), lat_(std::move(lat)) {
  st_ = build_stencil(k_, lat_->h, lat_->n, reach);
  if (!lat_->periodic)
    for (int d = 0; d < lat_->n; ++d)
      if (st_.reach >= lat_->count[d]) throw std::invalid_argument("QuadOp: kernel support exceeds the grid");
  if (lat_->periodic)
    for (int d = 0; d < lat_->n; ++d)
      if (2 * st_.reach >= lat_->count[d]) throw std::invalid_argument("QuadOp: kernel support wraps the torus");
}

QuadOp::QuadOp(Kernel k, std::shared_ptr<const Domain> dom, int reach) : QuadOp(std::move(k), dom->lat, reach) {
  dom_ = std::move(dom);
  // values are needed up to the reach beyond the closed box
  if (st_.reach > dom_->pad_layers) throw std::invalid_argument("QuadOp: kernel support exceeds the collar");
}

int QuadOp::neighbor(int k, const std::array<int, 2>& z) const {
  auto ix = lat_->index(k);
  for (int d = 0; d < lat_->n; ++d) {
    int v = ix[d] + z[d];
    const int N = lat_->count[d];
    if (lat_->periodic) {
      v %= N;
      if (v < 0) v += N;
    } else if (v < 0 || v >= N) {
      return -1;
    }
    ix[d] = v;
  }
  return lat_->flat(ix[0], ix[1]);
}

const SpMat& QuadOp::grad_matrix(int d) const {
  if (d < 0 || d >= lat_->n) throw std::invalid_argument("grad_matrix: bad direction");
  if (!G_[d]) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(lat_->size()) * st_.off.size());
    for (int k = 0; k < lat_->size(); ++k)
      for (std::size_t q = 0; q < st_.off.size(); ++q) {
        const double w = st_.g[q][d];
        if (w == 0.0) continue;
        const int j = neighbor(k, st_.off[q]);
        if (j >= 0) t.emplace_back(k, j, w);
      }
    auto m = std::make_shared<SpMat>(lat_->size(), lat_->size());
    m->setFromTriplets(t.begin(), t.end());
    G_[d] = m;
  }
  return *G_[d];
}

SpMat QuadOp::grad_matrix(int d, const std::vector<int>& rows, const std::vector<int>& cols) const {
  const SpMat& G = grad_matrix(d);
  std::vector<int> cpos(lat_->size(), -1);
  for (std::size_t c = 0; c < cols.size(); ++c) cpos[cols[c]] = static_cast<int>(c);
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (SpMat::InnerIterator it(G, rows[r]); it; ++it)
      if (cpos[it.col()] >= 0) t.emplace_back(static_cast<int>(r), cpos[it.col()], it.value());
  SpMat m(rows.size(), cols.size());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// div v(x) = sum_z g(z).v(x+z): the same matrices as the gradient. On the full
// grid they are skew, which is the discrete integration by parts.
SpMat QuadOp::div_matrix(int d) const { return grad_matrix(d); }

Field QuadOp::grad(const Field& u) const {
  require_same_lattice(u, *lat_);
  const int n = lat_->n;
  if (u.rank == Rank::Matrix) throw std::invalid_argument("grad: matrix input");
  Field out = zeros(lat_, u.rank == Rank::Scalar ? Rank::Vector : Rank::Matrix);
  const int m = u.comps();
  for (int i = 0; i < m; ++i)
    for (int d = 0; d < n; ++d) out.v.col(i * n + d) = grad_matrix(d) * u.v.col(i);
  return out;
}

Field QuadOp::div(const Field& v) const {
  require_same_lattice(v, *lat_);
  const int n = lat_->n;
  if (v.rank == Rank::Scalar) throw std::invalid_argument("div: scalar input");
  const int rows = v.rank == Rank::Vector ? 1 : n;
  Field out = zeros(lat_, v.rank == Rank::Vector ? Rank::Scalar : Rank::Vector);
  for (int i = 0; i < rows; ++i)
    for (int d = 0; d < n; ++d) out.v.col(i) += grad_matrix(d) * v.v.col(i * n + d);
  return out;
}

Field QuadOp::sym_grad(const Field& v) const {
  if (v.rank != Rank::Vector) throw std::invalid_argument("sym_grad: vector input required");
  Field g = grad(v);
  const int n = lat_->n;
  Field out = g;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.v.col(i * n + j) = 0.5 * (g.v.col(i * n + j) + g.v.col(j * n + i));
  return out;
}

void QuadOp::check_double_collar() const {
  if (dom_ && dom_->pad_layers < 2 * st_.reach)
    throw std::invalid_argument("laplacian: the grid needs a collar of twice the kernel reach");
}

Field QuadOp::laplacian(const Field& u) const {
  check_double_collar();
  Field out = div(grad(u));
  out.v = -out.v;
  return out;
}

Field QuadOp::leibniz_remainder(const Field& phi, const Field& Phi) const {
  require_same_lattice(phi, *lat_);
  require_same_lattice(Phi, *lat_);
  if (phi.rank != Rank::Scalar || Phi.rank == Rank::Scalar)
    throw std::invalid_argument("leibniz_remainder: scalar phi and vector/matrix Phi required");
  const int n = lat_->n;
  const int rows = Phi.rank == Rank::Vector ? 1 : n;
  Field out = zeros(lat_, Phi.rank == Rank::Vector ? Rank::Scalar : Rank::Vector);
  for (int k = 0; k < lat_->size(); ++k) {
    const double p0 = phi.v(k, 0);
    for (std::size_t q = 0; q < st_.off.size(); ++q) {
      const int j = neighbor(k, st_.off[q]);
      if (j < 0) continue;
      const double dp = phi.v(j, 0) - p0;
      if (dp == 0.0) continue;
      for (int i = 0; i < rows; ++i) {
        double acc = 0;
        for (int d = 0; d < n; ++d) acc += st_.g[q][d] * Phi.v(j, i * n + d);
        out.v(k, i) += dp * acc;
      }
    }
  }
  return out;
}

Field QuadOp::q_translate(const Field& u) const {
  require_same_lattice(u, *lat_);
  if (!qs_) {
    int reach = -1;
    if (!k_.compact()) reach = st_.reach;
    qs_ = std::make_shared<ScalarStencil>(build_q_stencil(k_, lat_->h, lat_->n, reach));
  }
  Field out = zeros(lat_, u.rank);
  for (int k = 0; k < lat_->size(); ++k)
    for (std::size_t q = 0; q < qs_->off.size(); ++q) {
      const int j = neighbor(k, qs_->off[q]);
      if (j >= 0) out.v.row(k) += qs_->c[q] * u.v.row(j);
    }
  return out;
}

// Flux form on every node outside the inner region that the stencil of a closed-Omega node
// reaches (Gamma, plus a few exterior nodes at diagonal offsets of the Q1 hats in 2-D):
//   N Phi(x_m) = - sum_{j in closed Omega} (w_j / h^n) sum_b g_b(x_j - x_m) Phi_ab(x_j)
// with trapezoid weights w_j. It is the boundary term that makes
//   <Phi, D v>_Omega + <div Phi, v>_inner - <N Phi, v>_Gamma = 0
// hold exactly for the discrete operators.
Field QuadOp::normal_derivative(const Field& Phi) const {
  if (!dom_) throw std::invalid_argument("normal_derivative: needs a bounded domain");
  if (!k_.compact()) throw std::invalid_argument("normal_derivative: needs a compactly supported kernel");
  require_same_lattice(Phi, *lat_);
  if (Phi.rank == Rank::Scalar) throw std::invalid_argument("normal_derivative: vector or matrix field required");
  const int n = lat_->n;
  const int rows = Phi.rank == Rank::Vector ? 1 : n;
  const double hn = lat_->cell_volume();
  Field out = zeros(lat_, Phi.rank == Rank::Vector ? Rank::Scalar : Rank::Vector);
  for (int m = 0; m < lat_->size(); ++m) {
    const Region r = dom_->region[m];
    if (r == Region::Inner) continue;
    for (std::size_t q = 0; q < st_.off.size(); ++q) {
      const int j = neighbor(m, st_.off[q]);
      if (j < 0) continue;
      const double w = dom_->omega_weight(j) / hn;
      if (w == 0.0) continue;
      for (int a = 0; a < rows; ++a) {
        double acc = 0;
        for (int b = 0; b < n; ++b) acc += st_.g[q][b] * Phi.v(j, a * n + b);
        out.v(m, a) -= w * acc;
      }
    }
  }
  return out;
}

std::vector<char> QuadOp::complete_rows() const {
  std::vector<char> ok(lat_->size(), 1);
  if (lat_->periodic) return ok;
  for (int k = 0; k < lat_->size(); ++k) {
    auto ix = lat_->index(k);
    for (int d = 0; d < lat_->n; ++d)
      if (ix[d] < st_.reach || ix[d] + st_.reach >= lat_->count[d]) ok[k] = 0;
  }
  return ok;
}

double grad_div_identity_check(const QuadOp& op, const Field& v) {
  if (v.rank != Rank::Vector) throw std::invalid_argument("grad_div_identity_check: vector field required");
  const int n = op.n();
  Field g = op.grad(v);
  Field gt = g;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gt.v.col(i * n + j) = g.v.col(j * n + i);
  Field lhs = op.div(gt);
  Field rhs = op.grad(op.div(v));
  // rows where both compositions only saw real data: two reaches from the edge
  const Lattice& lat = op.lattice();
  const int R = op.stencil().reach;
  double num = 0, den = 0;
  for (int k = 0; k < lat.size(); ++k) {
    if (!lat.periodic) {
      auto ix = lat.index(k);
      bool inside = true;
      for (int d = 0; d < n; ++d)
        if (ix[d] < 2 * R || ix[d] + 2 * R >= lat.count[d]) inside = false;
      if (!inside) continue;
    }
    num += (lhs.v.row(k) - rhs.v.row(k)).squaredNorm();
    den += rhs.v.row(k).squaredNorm();
  }
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

void export_coo_csv(const std::string& path, const SpMat& m) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot write " + path);
  std::fputs("row,col,value\n", fp);
  for (int r = 0; r < m.outerSize(); ++r)
    for (SpMat::InnerIterator it(m, r); it; ++it) std::fprintf(fp, "%d,%d,%.17g\n", int(it.row()), int(it.col()), it.value());
  std::fclose(fp);
}

namespace direct {

namespace {

constexpr int kAngles = 96;

double radius(const Kernel& k, double rmax) {
  if (rmax > 0) return std::min(rmax, k.support);
  if (!k.compact()) throw std::invalid_argument("direct: infinite support needs rmax");
  return k.support;
}

// int_0^R profile(r) r^{n-2} A(r) dr, A(r) = O(r) so the integrand is r^{n-1-sigma}
double radial(const Kernel& k, double R, const std::function<double(double)>& A) {
  const int n = k.dim;
  auto f = [&](double r) { return r > 0 ? k.profile(r) * std::pow(r, n - 2) * A(r) : 0.0; };
  auto br = k.breakpoints();
  double first = R;
  for (double b : br)
    if (b > 0 && b < first) first = b;
  const double alpha = k.sigma - (n - 1);
  return quad::singular0(f, first, alpha, 1e-11) + quad::with_breaks(f, first, R, br, 1e-11);
}

// sum over directions omega of F(omega); trapezoid on the circle for n = 2
template <class F>
void sphere_sum(int n, F&& fn) {
  if (n == 1) {
    fn(1.0, 0.0, 1.0);
    fn(-1.0, 0.0, 1.0);
    return;
  }
  const double w = 2 * std::numbers::pi / kAngles;
  for (int a = 0; a < kAngles; ++a) {
    const double t = (a + 0.5) * w;
    fn(std::cos(t), std::sin(t), w);
  }
}

}  // namespace

std::array<double, 2> grad(const Kernel& k, const ScalarFn& u, const double* x, double rmax) {
  const double R = radius(k, rmax);
  const int n = k.dim;
  const double u0 = u(x);
  std::array<double, 2> out{0, 0};
  for (int d = 0; d < n; ++d) {
    out[d] = radial(k, R, [&](double r) {
      double acc = 0;
      sphere_sum(n, [&](double c, double s, double w) {
        const double y[2] = {x[0] + r * c, (n == 2 ? x[1] : 0.0) + r * s};
        acc += w * (u(y) - u0) * (d == 0 ? c : s);
      });
      return acc;
    });
  }
  return out;
}

double div(const Kernel& k, const VecFn& v, const double* x, double rmax) {
  const double R = radius(k, rmax);
  const int n = k.dim;
  double v0[2] = {0, 0};
  v(x, v0);
  return radial(k, R, [&](double r) {
    double acc = 0;
    sphere_sum(n, [&](double c, double s, double w) {
      const double y[2] = {x[0] + r * c, (n == 2 ? x[1] : 0.0) + r * s};
      double vy[2] = {0, 0};
      v(y, vy);
      acc += w * ((vy[0] - v0[0]) * c + (n == 2 ? (vy[1] - v0[1]) * s : 0.0));
    });
    return acc;
  });
}

double leibniz(const Kernel& k, const ScalarFn& phi, const VecFn& Phi, const double* x, double rmax) {
  const double R = radius(k, rmax);
  const int n = k.dim;
  const double p0 = phi(x);
  return radial(k, R, [&](double r) {
    double acc = 0;
    sphere_sum(n, [&](double c, double s, double w) {
      const double y[2] = {x[0] + r * c, (n == 2 ? x[1] : 0.0) + r * s};
      double Py[2] = {0, 0};
      Phi(y, Py);
      acc += w * (phi(y) - p0) * (Py[0] * c + (n == 2 ? Py[1] * s : 0.0));
    });
    return acc;
  });
}

}  // namespace direct

}  // namespace nlel
