// Offset weights for the quadrature backend.
//
// Every weight is an integral of the kernel against a hat function, so the
// discrete operator reproduces affine fields up to the accuracy of these
// integrals. Near the origin the integrand is singular like r^{-s}; those
// pieces are done in (polar) coordinates with the substitution u = r^{1-s}.

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <map>
#include <numbers>

#include "nlel/operators.hpp"
#include "nlel/quadrature.hpp"

namespace nlel {

namespace {

constexpr int kGL = 10;

struct GLRule {
  std::vector<double> x, w;  // on [-1,1]
  GLRule() {
    using G = boost::math::quadrature::gauss<double, kGL>;
    const auto& a = G::abscissa();
    const auto& b = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) {
        x.push_back(0.0);
        w.push_back(b[i]);
      } else {
        x.push_back(a[i]);
        w.push_back(b[i]);
        x.push_back(-a[i]);
        w.push_back(b[i]);
      }
    }
  }
};

const GLRule& gl() {
  static const GLRule r;
  return r;
}

using Vec = Eigen::VectorXd;
using VecFn = std::function<void(double, Vec&)>;

Vec gl_once(const VecFn& f, double a, double b, int dim) {
  const auto& R = gl();
  Vec acc = Vec::Zero(dim), tmp(dim);
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  for (std::size_t i = 0; i < R.x.size(); ++i) {
    f(c + r * R.x[i], tmp);
    acc += R.w[i] * tmp;
  }
  return acc * r;
}

Vec agl_rec(const VecFn& f, double a, double b, int dim, const Vec& whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  Vec l = gl_once(f, a, m, dim), r = gl_once(f, m, b, dim);
  Vec both = l + r;
  if (depth <= 0 || (both - whole).lpNorm<Eigen::Infinity>() <= tol) return both;
  return agl_rec(f, a, m, dim, l, 0.5 * tol, depth - 1) + agl_rec(f, m, b, dim, r, 0.5 * tol, depth - 1);
}

// vector adaptive Gauss-Legendre; tol absolute on the whole interval
Vec agl(const VecFn& f, double a, double b, int dim, double tol, int depth = 14) {
  if (!(b > a)) return Vec::Zero(dim);
  Vec whole = gl_once(f, a, b, dim);
  // never ask for more than roundoff allows
  tol = std::max(tol, 1e-14 * whole.lpNorm<Eigen::Infinity>());
  return agl_rec(f, a, b, dim, whole, tol, depth);
}

// same with singular left endpoint, f ~ (r-a)^{-alpha}
Vec agl_sing(const VecFn& f, double a, double b, int dim, double alpha, double tol) {
  if (!(b > a)) return Vec::Zero(dim);
  if (alpha <= 0) return agl(f, a, b, dim, tol);
  const double p = 1.0 / (1.0 - alpha);
  const double ub = std::pow(b - a, 1.0 - alpha);
  Vec tmp(dim);
  VecFn g = [&](double u, Vec& out) {
    if (u <= 0) {
      out.setZero();
      return;
    }
    const double d = std::pow(u, p);
    f(a + d, tmp);
    out = tmp * (p * d / u);
  };
  return agl(g, 0.0, ub, dim, tol);
}

// integrate along [0, rmax] splitting at kernel breakpoints, singular at 0
Vec radial_split(const VecFn& f, double rmax, const std::vector<double>& br, int dim, double alpha, double tol) {
  std::vector<double> pts;
  for (double b : br)
    if (b > 0 && b < rmax) pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.push_back(rmax);
  Vec acc = Vec::Zero(dim);
  double lo = 0.0;
  for (double hi : pts) {
    const double t = tol * (hi - lo) / rmax;
    acc += (lo == 0.0) ? agl_sing(f, lo, hi, dim, alpha, t) : agl(f, lo, hi, dim, t);
    lo = hi;
  }
  return acc;
}

// Integrand on one cell: values for the 4 bilinear corner functions
// (corner order (a,b),(a+1,b),(a,b+1),(a+1,b+1)) times a per-point payload
// of width w (2 for direction-weighted, 1 for scalar).
struct CellJob {
  double h;
  int a, b;
  int w;                                               // payload width
  bool skip_origin = false;  // the hat at the origin is not integrable against z/|z|^2 rho
  std::function<void(double, double, double*)> point;  // payload at z (z != 0)
  std::function<void(double, double, double, double*)> polar;  // payload * jacobian at (r, cos, sin)
};

void corner_values(const CellJob& J, double z1, double z2, double* phi) {
  // both hat factors from their own corner, no 1 - t cancellation near the origin
  const double t1 = (z1 - J.a * J.h) / J.h, t2 = (z2 - J.b * J.h) / J.h;
  const double u1 = ((J.a + 1) * J.h - z1) / J.h, u2 = ((J.b + 1) * J.h - z2) / J.h;
  phi[0] = u1 * u2;
  phi[1] = t1 * u2;
  phi[2] = u1 * t2;
  phi[3] = t1 * t2;
}

// pieces of [lo, hi] cut at the given points
std::vector<double> cuts(double lo, double hi, std::vector<double> at) {
  std::vector<double> p{lo};
  std::sort(at.begin(), at.end());
  for (double c : at)
    if (c > lo && c < hi) p.push_back(c);
  p.push_back(hi);
  return p;
}

// tensor rule, both directions cut where a breakpoint circle crosses so that
// every piece sees a smooth integrand
Vec cell_regular(const CellJob& J, const std::vector<double>& br, double tol) {
  const int dim = 4 * J.w;
  const double x0 = J.a * J.h, y0 = J.b * J.h;
  VecFn outer = [&](double y, Vec& out) {
    VecFn inner = [&](double x, Vec& o) {
      double pay[2], phi[4];
      J.point(x, y, pay);
      corner_values(J, x, y, phi);
      for (int c = 0; c < 4; ++c)
        for (int q = 0; q < J.w; ++q) o[c * J.w + q] = phi[c] * pay[q];
    };
    std::vector<double> at;
    for (double b : br)
      if (b > std::abs(y)) {
        const double xs = std::sqrt(b * b - y * y);
        at.push_back(xs);
        at.push_back(-xs);
      }
    auto p = cuts(x0, x0 + J.h, at);
    out = Vec::Zero(dim);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) out += agl(inner, p[i], p[i + 1], dim, tol / J.h, 10);
  };
  std::vector<double> at;
  for (double b : br) {
    at.push_back(b);
    at.push_back(-b);
  }
  auto p = cuts(y0, y0 + J.h, at);
  Vec acc = Vec::Zero(dim);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) acc += agl(outer, p[i], p[i + 1], dim, tol, 12);
  return acc;
}

Vec cell_corner(const CellJob& J, const std::vector<double>& br, double alpha, double tol) {
  const int dim = 4 * J.w;
  const double pi = std::numbers::pi;
  double th0 = 0;
  if (J.a == -1 && J.b == 0) th0 = 0.5 * pi;
  if (J.a == -1 && J.b == -1) th0 = pi;
  if (J.a == 0 && J.b == -1) th0 = 1.5 * pi;
  const int oc = (J.a == 0 ? 0 : 1) + (J.b == 0 ? 0 : 2);
  VecFn outer = [&](double th, Vec& out) {
    const double c = std::cos(th), s = std::sin(th);
    const double rmax = J.h / std::max(std::abs(c), std::abs(s));
    VecFn inner = [&](double r, Vec& o) {
      double pay[2], phi[4];
      J.polar(r, c, s, pay);
      corner_values(J, r * c, r * s, phi);
      if (J.skip_origin) phi[oc] = 0.0;
      for (int k = 0; k < 4; ++k)
        for (int q = 0; q < J.w; ++q) o[k * J.w + q] = phi[k] * pay[q];
    };
    out = radial_split(inner, rmax, br, dim, alpha, tol);
  };
  return agl(outer, th0, th0 + 0.25 * pi, dim, tol, 12) + agl(outer, th0 + 0.25 * pi, th0 + 0.5 * pi, dim, tol, 12);
}

int effective_reach(const std::vector<std::array<int, 2>>& off) {
  int r = 0;
  for (auto& o : off) r = std::max({r, std::abs(o[0]), std::abs(o[1])});
  return r;
}

// [0,top]: singular piece up to the first breakpoint, regular after
double from_origin(const quad::Fn& f, double top, const std::vector<double>& br, double alpha) {
  double first = top;
  for (double b : br)
    if (b > 0 && b < first) first = b;
  return quad::singular0(f, first, alpha, 1e-13) + quad::with_breaks(f, first, top, br, 1e-13);
}

double cell_min_dist(int a, int b, double h) {
  auto d1 = [&](int lo) {
    const double l = lo * h, r = (lo + 1) * h;
    return (l > 0) ? l : (r < 0 ? -r : 0.0);
  };
  return std::hypot(d1(a), d1(b));
}

}  // namespace

Stencil build_stencil(const Kernel& k, double h, int n, int reach) {
  if (k.dim != n) throw std::invalid_argument("build_stencil: kernel and grid dimension differ");
  const double R = k.support;
  if (reach < 0) {
    if (!k.compact()) throw std::invalid_argument("build_stencil: infinite support needs an explicit reach");
    reach = static_cast<int>(std::floor(R / h + 1e-9)) + 1;
  }
  Stencil st;
  st.n = n;
  st.h = h;
  st.reach = reach;
  const auto br = k.breakpoints();
  if (n == 1) {
    auto rho_over_r = [&](double z) { return k.profile(z) / z; };
    std::vector<double> A(reach, 0.0), B(reach + 1, 0.0);
    for (int c = 0; c < reach; ++c) {
      const double lo = c * h, hi = (c + 1) * h;
      if (lo >= R) break;
      if (c == 0) {
        A[0] = from_origin([&](double z) { return k.profile(z) / h; }, std::min(hi, R), br, k.sigma);
        continue;
      }
      const double top = std::min(hi, R);
      A[c] = quad::with_breaks([&](double z) { return (z - lo) / h * rho_over_r(z); }, lo, top, br, 1e-13);
      B[c] = quad::with_breaks([&](double z) { return (hi - z) / h * rho_over_r(z); }, lo, top, br, 1e-13);
    }
    for (int j = 1; j <= reach; ++j) {
      const double gj = A[j - 1] + (j < reach ? B[j] : 0.0);
      if (gj == 0.0) continue;
      st.off.push_back({j, 0});
      st.g.push_back({gj, 0.0});
      st.off.push_back({-j, 0});
      st.g.push_back({-gj, 0.0});
    }
    st.reach = effective_reach(st.off);
    return st;
  }
  // n == 2
  const double alpha = k.sigma - 1.0;
  std::map<std::pair<int, int>, Vec> cache;
  auto cell = [&](int a, int b) -> const Vec& {
    auto key = std::make_pair(a, b);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Vec v = Vec::Zero(8);
    if (cell_min_dist(a, b, h) < R) {
      CellJob J;
      J.h = h;
      J.a = a;
      J.b = b;
      J.w = 2;
      J.skip_origin = true;
      J.point = [&](double z1, double z2, double* out) {
        const double r2 = z1 * z1 + z2 * z2, r = std::sqrt(r2);
        const double p = k.profile(r) / r2;
        out[0] = p * z1;
        out[1] = p * z2;
      };
      J.polar = [&](double r, double c, double s, double* out) {
        const double p = k.profile(r);
        out[0] = p * c;
        out[1] = p * s;
      };
      const double tol = 1e-12 * h;
      const bool corner = (a == 0 || a == -1) && (b == 0 || b == -1);
      v = corner ? cell_corner(J, br, alpha, tol) : cell_regular(J, br, tol);
    }
    return cache.emplace(key, v).first->second;
  };
  auto node_weight = [&](int i, int j) {
    // the node is corner 3 of cell (i-1,j-1), corner 2 of (i,j-1), corner 1 of (i-1,j), corner 0 of (i,j)
    std::array<double, 2> g{0, 0};
    const std::array<std::array<int, 3>, 4> parts{{{i - 1, j - 1, 3}, {i, j - 1, 2}, {i - 1, j, 1}, {i, j, 0}}};
    for (auto [a, b, c] : parts) {
      const Vec& v = cell(a, b);
      g[0] += v[2 * c];
      g[1] += v[2 * c + 1];
    }
    return g;
  };
  for (int i = 1; i <= reach; ++i) {
    for (int j = 0; j <= i; ++j) {
      // hat support [i-1,i+1] x [j-1,j+1] must meet the disc
      const double dmin = std::hypot(std::max(0, i - 1), std::max(0, j - 1)) * h;
      if (dmin >= R) continue;
      auto g = node_weight(i, j);
      // first octant value, then exact reflections
      auto emit = [&](int p, int q, double g1, double g2) {
        st.off.push_back({p, q});
        st.g.push_back({g1, g2});
      };
      if (j == 0) g[1] = 0.0;
      if (i == j) {
        const double m = 0.5 * (g[0] + g[1]);
        g = {m, m};
      }
      std::vector<std::array<int, 2>> seen;
      auto emit_all = [&](int p, int q, double g1, double g2) {
        for (int sp : {1, -1})
          for (int sq : {1, -1}) {
            std::array<int, 2> o{sp * p, sq * q};
            if (std::find(seen.begin(), seen.end(), o) != seen.end()) continue;
            seen.push_back(o);
            emit(o[0], o[1], sp * g1, sq * g2);
          }
      };
      emit_all(i, j, g[0], g[1]);
      emit_all(j, i, g[1], g[0]);
    }
  }
  st.reach = effective_reach(st.off);
  return st;
}

ScalarStencil build_q_stencil(const Kernel& k, double h, int n, int reach) {
  const double R = k.support;
  if (reach < 0) {
    if (!k.compact()) throw std::invalid_argument("build_q_stencil: infinite support needs an explicit reach");
    reach = static_cast<int>(std::floor(R / h + 1e-9)) + 1;
  }
  const PotentialProfile Q = q_profile(k);
  const auto br = k.breakpoints();
  ScalarStencil st;
  st.n = n;
  if (n == 1) {
    std::vector<double> A(reach, 0.0), B(reach, 0.0);  // right-hat / left-hat parts of cell c
    for (int c = 0; c < reach; ++c) {
      const double lo = c * h, hi = (c + 1) * h;
      if (lo >= R) break;
      const double top = std::min(hi, R);
      if (c == 0) {
        A[0] = from_origin([&](double z) { return z / h * Q(z); }, top, br, k.sigma);
        B[0] = from_origin([&](double z) { return (hi - z) / h * Q(z); }, top, br, k.sigma);
        continue;
      }
      A[c] = quad::with_breaks([&](double z) { return (z - lo) / h * Q(z); }, lo, top, br, 1e-13);
      B[c] = quad::with_breaks([&](double z) { return (hi - z) / h * Q(z); }, lo, top, br, 1e-13);
    }
    st.off.push_back({0, 0});
    st.c.push_back(2 * B[0]);
    for (int j = 1; j <= reach; ++j) {
      const double cj = A[j - 1] + (j < reach ? B[j] : 0.0);
      st.off.push_back({j, 0});
      st.c.push_back(cj);
      st.off.push_back({-j, 0});
      st.c.push_back(cj);
    }
    return st;
  }
  const double alpha = k.sigma - 1.0;
  std::map<std::pair<int, int>, Vec> cache;
  auto cell = [&](int a, int b) -> const Vec& {
    auto key = std::make_pair(a, b);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Vec v = Vec::Zero(4);
    if (cell_min_dist(a, b, h) < R) {
      CellJob J;
      J.h = h;
      J.a = a;
      J.b = b;
      J.w = 1;
      J.point = [&](double z1, double z2, double* out) { out[0] = Q(std::hypot(z1, z2)); };
      J.polar = [&](double r, double, double, double* out) { out[0] = Q(r) * r; };
      const double tol = 1e-14 * h * h * std::abs(Q(0.5 * h));
      const bool corner = (a == 0 || a == -1) && (b == 0 || b == -1);
      v = corner ? cell_corner(J, br, alpha, tol) : cell_regular(J, br, tol);
    }
    return cache.emplace(key, v).first->second;
  };
  for (int i = -reach; i <= reach; ++i)
    for (int j = -reach; j <= reach; ++j) {
      const double dmin = std::hypot(std::max(0, std::abs(i) - 1), std::max(0, std::abs(j) - 1)) * h;
      if (dmin >= R) continue;
      const std::array<std::array<int, 3>, 4> parts{{{i - 1, j - 1, 3}, {i, j - 1, 2}, {i - 1, j, 1}, {i, j, 0}}};
      double c = 0;
      for (auto [a, b, q] : parts) c += cell(a, b)[q];
      st.off.push_back({i, j});
      st.c.push_back(c);
    }
  return st;
}

}  // namespace nlel
