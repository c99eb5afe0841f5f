#include "nlel/eringen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "nlel/operators.hpp"
#include "nlel/quadrature.hpp"

namespace nlel {

namespace {

// integrate f on [a,b] split at `cut`; pieces that end at one of the points in
// `sing` get the r^{-alpha} substitution on that side. Fixed rules throughout.
double pieces(const quad::Fn& f, double a, double b, std::vector<double> cut, const std::vector<double>& sing,
              double alpha, int panels) {
  for (double x : sing) cut.push_back(x);
  cut.push_back(a);
  cut.push_back(b);
  std::sort(cut.begin(), cut.end());
  auto is_sing = [&](double x) {
    for (double y : sing)
      if (std::abs(x - y) <= 1e-15 * std::max(1.0, std::abs(y))) return true;
    return false;
  };
  auto right = [&](double l, double r) {
    return quad::gauss_singular_right(f, l, r, alpha, panels + 4);
  };
  double s = 0;
  double prev = a;
  for (double c : cut) {
    if (c <= prev) continue;
    if (c > b) break;
    if (c - prev > 1e-13 * (b - a)) {
      const bool sl = is_sing(prev), sr = is_sing(c);
      if (sl && sr) {
        const double m = 0.5 * (prev + c);
        s += quad::gauss_singular_left(f, prev, m, alpha, panels + 4) + right(m, c);
      } else if (sl) {
        s += quad::gauss_singular_left(f, prev, c, alpha, panels + 4);
      } else if (sr) {
        s += right(prev, c);
      } else {
        s += quad::gauss_fixed(f, prev, c, panels);
      }
    }
    prev = c;
  }
  return s;
}

std::vector<double> q_breaks(const Kernel& k) {
  auto b = k.breakpoints();
  if (b.size() > 4) b.clear();  // tables: only the support matters here
  b.push_back(k.support);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

// Q ~ r^{-sigma} at 0 (log when sigma = 0; the substitution still helps)
double q_alpha(const Kernel& k) { return k.sigma > 0 ? std::min(k.sigma, 0.95) : 0.3; }

// 4-point Lagrange on nodes x[i0..i0+3]
double lagrange4(const double* x, const double* y, double t) {
  double s = 0;
  for (int i = 0; i < 4; ++i) {
    double l = 1;
    for (int j = 0; j < 4; ++j)
      if (j != i) l *= (t - x[j]) / (x[i] - x[j]);
    s += l * y[i];
  }
  return s;
}

constexpr int kLogNodes = 1000;
constexpr int kCheb = 40;
constexpr int kSegNodes = 200;
constexpr double kLogSpan = 1e-12;

}  // namespace

double PotentialPieces::operator()(double r) const {
  if (r >= edges.back()) return 0.0;
  if (r < edges[1]) {
    if (!power_head) return fallback(r);
    const double e = edges[1];
    const double top = head_top;
    if (sigma == 0.0) return top + head_c * std::log(e / r);
    return top + head_c * (std::pow(r, -sigma) - std::pow(e, -sigma)) / sigma;
  }
  const std::size_t i = std::upper_bound(edges.begin(), edges.end(), r) - edges.begin() - 1;
  const double a = edges[i], b = edges[i + 1];
  const double x = (2 * r - a - b) / (b - a);
  // barycentric formula, Chebyshev points x_j = -cos(pi j / (m-1))
  const auto& v = val[i];
  const int m = static_cast<int>(v.size());
  double num = 0, den = 0;
  for (int j = 0; j < m; ++j) {
    const double xj = -std::cos(std::numbers::pi * j / (m - 1));
    const double d = x - xj;
    if (d == 0.0) return v[j];
    double w = (j % 2 ? -1.0 : 1.0) / d;
    if (j == 0 || j == m - 1) w *= 0.5;
    num += w * v[j];
    den += w;
  }
  return num / den;
}

PotentialPieces q_pieces(const Kernel& k) {
  if (k.dim != 1 || !k.compact()) throw std::invalid_argument("q_pieces: compact 1-D kernels only");
  PotentialPieces P;
  P.edges.push_back(0.0);
  for (double b : q_breaks(k)) P.edges.push_back(b);
  const int pieces_n = static_cast<int>(P.edges.size()) - 1;
  P.val.resize(pieces_n);
  // top-down so each piece starts from the value at its right end
  double right_val = 0.0;
  for (int i = pieces_n - 1; i >= 1; --i) {
    const double a = P.edges[i], b = P.edges[i + 1];
    std::vector<double> v(kCheb);
    for (int j = 0; j < kCheb; ++j) {
      const double r = 0.5 * (a + b) - 0.5 * (b - a) * std::cos(std::numbers::pi * j / (kCheb - 1));
      v[j] = right_val + (j == kCheb - 1 ? 0.0 : quad::gk([&](double t) { return k.profile(t) / t; }, r, b, 1e-15));
    }
    P.val[i] = v;  // v[0] is the left end
    right_val = v[0];
  }
  // head: pure power?
  const double e = P.edges[1];
  P.sigma = k.sigma;
  P.head_c = k.profile(0.5 * e) * std::pow(0.5 * e, k.sigma);
  P.power_head = true;
  for (double f : {1e-6, 1e-3, 0.1, 0.9, 0.999}) {
    const double c = k.profile(f * e) * std::pow(f * e, k.sigma);
    if (std::abs(c - P.head_c) > 1e-12 * std::abs(P.head_c)) P.power_head = false;
  }
  if (!P.power_head) P.fallback = q_profile(k);
  P.head_top = right_val;  // Q(e_1)
  return P;
}

double EringenKernel::exact(double x, int panels) const {
  x = std::abs(x);
  if (x >= support) return 0.0;
  if (x == 0.0) return alpha > 0 ? std::numeric_limits<double>::infinity() : exact(1e-300, panels);
  const double R = source.support;
  // fold about x/2 (y <-> x - y) so the only singular point is y = 0, which is
  // exact in floating point; x - y near y = x would lose every digit
  const double lo = x - R, hi = 0.5 * x;
  std::vector<double> cut;
  for (double b : q_breaks(source)) {
    for (double c : {-b, b, x - b, x + b}) cut.push_back(c);
  }
  auto f = [&](double y) {
    const double a = std::abs(y);
    if (a < 1e-150) return 0.0;  // overflow guard; the sliver is negligible
    return Q(a) * Q(x - y);
  };
  return 2 * pieces(f, lo, hi, cut, {0.0}, q_alpha(source), panels);
}

double EringenKernel::operator()(double x) const {
  x = std::abs(x);
  if (x >= support) return 0.0;
  if (x == 0.0) return alpha > 0 ? std::numeric_limits<double>::infinity() : seg_val.front().front();
  std::size_t s = std::upper_bound(edges.begin(), edges.end(), x) - edges.begin() - 1;
  s = std::min(s, seg_val.size() - 1);
  const auto& u = seg_pos[s];
  const auto& v = seg_val[s];
  double t = x;
  if (s == 0) {
    t = std::log(x);
    if (t < u.front()) {
      // below the table: pure power law (or constant) continuation
      return alpha > 0 ? v.front() * std::exp(-alpha * (t - u.front())) : v.front();
    }
  }
  const int m = static_cast<int>(u.size());
  int i = static_cast<int>(std::upper_bound(u.begin(), u.end(), t) - u.begin()) - 2;
  i = std::clamp(i, 0, m - 4);
  return lagrange4(&u[i], &v[i], t);
}

EringenKernel build_eringen_kernel(const Kernel& k, int table_points) {
  if (k.dim != 1) throw std::invalid_argument("build_eringen_kernel: only n = 1 is implemented");
  if (!k.compact()) throw std::invalid_argument("build_eringen_kernel: needs a compactly supported kernel");
  EringenKernel A;
  A.source = k;
  A.Q = q_pieces(k);
  A.support = 2 * k.support;
  // Atilde ~ r^{1 - 2 sigma} at 0 in 1-D
  A.alpha = std::max(0.0, std::min(2 * k.sigma - 1.0, 0.95));
  if (std::abs(k.sigma - 0.5) < 1e-12) A.alpha = 0.3;  // log
  std::vector<double> b{0.0};
  for (double x : q_breaks(k)) b.push_back(x);
  for (double x : b)
    for (double y : b) {
      A.kinks.push_back(std::abs(x - y));
      A.kinks.push_back(x + y);
    }
  std::sort(A.kinks.begin(), A.kinks.end());
  A.kinks.erase(std::unique(A.kinks.begin(), A.kinks.end(),
                            [](double x, double y) { return std::abs(x - y) < 1e-14; }),
                A.kinks.end());
  // table segments between kinks; the first one in log r
  for (double x : A.kinks)
    if (x < A.support) A.edges.push_back(x);
  if (A.edges.empty() || A.edges.front() != 0.0) A.edges.insert(A.edges.begin(), 0.0);
  A.edges.push_back(A.support);
  for (std::size_t s = 0; s + 1 < A.edges.size(); ++s) {
    const double lo = A.edges[s], hi = A.edges[s + 1];
    std::vector<double> u, v;
    if (s == 0) {
      const double t0 = std::log(hi * kLogSpan), t1 = std::log(hi);
      for (int i = 0; i < kLogNodes; ++i) {
        const double t = t0 + (t1 - t0) * i / (kLogNodes - 1);
        u.push_back(t);
        v.push_back(A.exact(std::exp(t), 8));
      }
    } else {
      for (int i = 0; i < kSegNodes; ++i) {
        const double x = lo + (hi - lo) * i / (kSegNodes - 1);
        u.push_back(x);
        v.push_back(A.exact(x, 8));
      }
    }
    A.seg_pos.push_back(std::move(u));
    A.seg_val.push_back(std::move(v));
  }
  for (int i = 1; i <= table_points; ++i) {
    const double r = A.support * i / table_points;
    A.r.push_back(r);
    A.a.push_back(A(r));
  }
  return A;
}

double eringen_hat(const EringenKernel& A, double xi) {
  const double w = 2 * std::numbers::pi * std::abs(xi);
  const int panels = 2 + static_cast<int>(std::ceil(4 * std::abs(xi) * A.support));
  return 2 * pieces([&](double r) { return r == 0.0 ? 0.0 : A(r) * std::cos(w * r); }, 0.0, A.support, A.edges, {0.0},
                    A.alpha, panels);
}

EringenForm::EringenForm(const EringenKernel& A, const Tensor& C, std::shared_ptr<const Domain> dom, int dense_cap)
    : C_(C), dom_(std::move(dom)) {
  if (dom_->dim() != 1 || C.n != 1) throw std::invalid_argument("EringenForm: only n = 1 is implemented");
  const double h = dom_->h();
  cells_ = dom_->hi_idx[0] - dom_->lo_idx[0];
  const int M = std::min(cells_, static_cast<int>(std::ceil(A.support / h)) + 1);
  W_.assign(M, 0.0);
  for (int m = 0; m < M; ++m) {
    // W(m) = int (h - |r - m h|) Atilde(r) dr over [(m-1)h, (m+1)h]; in r the
    // singular point is exactly 0
    const double lo = m == 0 ? 0.0 : (m - 1) * h, hi = (m + 1) * h;
    std::vector<double> cut{m * h};
    for (double r : A.kinks) cut.push_back(r);
    const double w = pieces([&](double r) { return r == 0.0 ? 0.0 : (h - std::abs(r - m * h)) * A(r); }, lo, hi, cut,
                            {0.0}, A.alpha, 2);
    W_[m] = m == 0 ? 2 * w : w;
  }
  if (cells_ <= dense_cap) {
    dense_.resize(cells_, cells_);
    for (int i = 0; i < cells_; ++i)
      for (int j = 0; j < cells_; ++j) dense_(i, j) = std::abs(i - j) < M ? W_[std::abs(i - j)] : 0.0;
  }
}

Eigen::VectorXd EringenForm::strain(const Field& v) const {
  if (v.lat.get() != dom_->lat.get()) throw std::invalid_argument("EringenForm: field on a different grid");
  const Lattice& L = *dom_->lat;
  Eigen::VectorXd e(cells_);
  for (int c = 0; c < cells_; ++c) {
    const int a = L.flat(dom_->lo_idx[0] + c, 0);
    e[c] = (v.v(a + 1, 0) - v.v(a, 0)) / L.h;
  }
  return e;
}

double EringenForm::quad_form(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  if (dense()) return a.dot(dense_ * b);
  // streamed Toeplitz product
  const int M = static_cast<int>(W_.size());
  double s = 0;
  for (int i = 0; i < cells_; ++i) {
    double row = 0;
    for (int j = std::max(0, i - M + 1); j < std::min(cells_, i + M); ++j) row += W_[std::abs(i - j)] * b[j];
    s += a[i] * row;
  }
  return s;
}

double EringenForm::operator()(const Field& v, const Field& w) const {
  // 1-D: C[eps] = (2 mu + lambda) eps for isotropic, c_1111 eps otherwise
  const double c = C_.at(0, 0, 0, 0);
  return c * quad_form(strain(v), strain(w));
}

double EringenForm::mercer(const Eigen::VectorXd& phi) const {
  if (phi.size() != cells_) throw std::invalid_argument("EringenForm::mercer: one value per cell expected");
  return quad_form(phi, phi);
}

Field random_bump_field(std::shared_ptr<const Lattice> lat, const Box& box, unsigned seed, int bumps) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int n = lat->n;
  struct B {
    std::array<double, 2> c, w;
    std::array<double, 2> amp;
  };
  std::vector<B> list;
  for (int i = 0; i < bumps; ++i) {
    B b;
    for (int d = 0; d < n; ++d) {
      const double L = box.hi[d] - box.lo[d];
      b.w[d] = L * (0.15 + 0.2 * U(rng));
      b.c[d] = box.lo[d] + b.w[d] + (L - 2 * b.w[d]) * U(rng);
    }
    for (int d = 0; d < n; ++d) b.amp[d] = 2 * U(rng) - 1;
    list.push_back(b);
  }
  return interpolate(lat, Rank::Vector, [&](const double* x, double* o) {
    for (int d = 0; d < n; ++d) o[d] = 0;
    for (const B& b : list) {
      double p = 1;
      for (int d = 0; d < n; ++d) {
        const double t = (x[d] - b.c[d]) / b.w[d];
        p *= std::abs(t) < 1 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
      }
      for (int d = 0; d < n; ++d) o[d] += b.amp[d] * p;
    }
  });
}

namespace {

struct Resolution {
  std::shared_ptr<const Domain> dom;
  std::unique_ptr<QuadOp> op;
};

double compare_on(const EringenForm& form, const QuadOp& op, const Tensor& C, const Domain& dom, int trials,
                  unsigned seed, double* norm_disc) {
  Eigen::VectorXd wts = form_weights(dom, FormScope::Whole);
  double worst = 0, worst_norm = 0;
  for (int t = 0; t < trials; ++t) {
    Field v = random_bump_field(dom.lat, dom.box, seed + 2 * t);
    Field w = random_bump_field(dom.lat, dom.box, seed + 2 * t + 1);
    const double ar = bilinear(C, op, v, w, wts);
    const double aa = form(v, w);
    const double vv = bilinear(C, op, v, v, wts);
    const double ww = bilinear(C, op, w, w, wts);
    // floor: the pair's own energy scale
    const double floor = 1e-3 * std::sqrt(vv * ww);
    worst = std::max(worst, std::abs(aa - ar) / std::max(std::abs(ar), floor));
    worst_norm = std::max(worst_norm, std::abs(form(v, v) - vv) / vv);
  }
  if (norm_disc) *norm_disc = worst_norm;
  return worst;
}

}  // namespace

double compare_forms(const Kernel& k, const Tensor& C, std::shared_ptr<const Domain> dom, int trial_count,
                     unsigned seed, double* norm_disc) {
  EringenKernel A = build_eringen_kernel(k);
  EringenForm form(A, C, dom);
  QuadOp op(k, dom);
  return compare_on(form, op, C, *dom, trial_count, seed, norm_disc);
}

FormComparison eringen_study(const Kernel& k, const Tensor& C, const Box& box, const std::vector<int>& resolutions,
                             int trial_count, unsigned seed) {
  FormComparison rep;
  EringenKernel A = build_eringen_kernel(k);
  const double L = box.hi[0] - box.lo[0];
  for (int N : resolutions) {
    const double h = L / N;
    auto dom = std::make_shared<const Domain>(build_domain(box, k.support, h));
    QuadOp op(k, dom);
    EringenForm form(A, C, dom);
    double nd = 0;
    rep.resolutions.push_back(N);
    rep.discrepancies.push_back(compare_on(form, op, C, *dom, trial_count, seed, &nd));
    rep.norm_discrepancies.push_back(nd);
    // Mercer on random cellwise phi
    std::mt19937_64 rng(seed + 1000);
    std::normal_distribution<double> G;
    double mn = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd phi(form.cells());
      for (auto& x : phi) x = G(rng);
      const double q = form.mercer(phi) / (h * phi.squaredNorm());
      mn = std::min(mn, q);
      if (!(q > 0)) rep.mercer_ok = false;
    }
    rep.mercer_min.push_back(mn);
    // scalar identity: int int Atilde Du Du = ||Q * Du||^2 = ||D_rho u||^2
    Field u = random_bump_field(dom->lat, box, seed + 999, 2);
    Field g = op.grad(u);
    const double rhs = dom->lat->cell_volume() * g.v.squaredNorm();
    const double lhs = form(u, u) / C.at(0, 0, 0, 0);
    rep.scalar_identity.push_back(std::abs(lhs - rhs) / rhs);
  }
  return rep;
}

}  // namespace nlel
