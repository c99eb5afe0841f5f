#include "nlel/kernel.hpp"

#include <algorithm>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/bessel.hpp>

#include "nlel/quadrature.hpp"

namespace nlel {

namespace {

constexpr double kPi = std::numbers::pi;

double base_profile(const Kernel& k, double rr) {
  switch (k.kind) {
    case KernelKind::Fractional:
      return k.coef * std::pow(rr, -k.sigma);
    case KernelKind::Truncated: {
      if (rr >= k.delta) return 0.0;
      const double p = k.b0 * k.delta;
      double w = k.a0;
      if (rr > p) w *= blend((rr - p) / (k.delta - p));
      return k.coef * w * std::pow(rr, -k.sigma);
    }
    case KernelKind::Constant:
      return rr < k.delta ? k.coef : 0.0;
    case KernelKind::Table: {
      const auto& R = *k.tab_r;
      const auto& P = *k.tab_rho;
      if (rr > R.back()) return 0.0;
      if (rr <= R.front()) return P.front() * std::pow(rr / R.front(), -k.sigma);
      auto it = std::upper_bound(R.begin(), R.end(), rr);
      std::size_t i = std::min<std::size_t>(it - R.begin(), R.size() - 1) - 1;
      const double x0 = R[i], x1 = R[i + 1];
      const double y0 = P[i], y1 = P[i + 1];
      if (y0 > 0 && y1 > 0) {
        double th = std::log(rr / x0) / std::log(x1 / x0);
        return std::exp((1 - th) * std::log(y0) + th * std::log(y1));
      }
      double th = (rr - x0) / (x1 - x0);
      return (1 - th) * y0 + th * y1;
    }
  }
  return 0.0;
}

// integral over [a,b] of g, g ~ r^{-alpha} at 0 when a == 0
double radial(const Kernel& k, const quad::Fn& g, double a, double b, double alpha, double tol = 1e-12) {
  std::vector<double> br = k.breakpoints();
  br.erase(std::remove_if(br.begin(), br.end(), [&](double x) { return x <= a || x >= b; }), br.end());
  std::sort(br.begin(), br.end());
  double acc = 0.0;
  double lo = a;
  std::vector<double> pts = br;
  pts.push_back(b);
  for (double hi : pts) {
    if (lo == 0.0) {
      // geometric panels toward the origin keep the substituted rule happy
      acc += quad::singular0(g, hi, alpha, tol);
    } else if (hi > 4 * lo) {
      double x = lo;
      while (x < hi) {
        double nx = std::min(hi, 4 * x);
        acc += quad::gk(g, x, nx, tol);
        x = nx;
      }
    } else {
      acc += quad::gk(g, lo, hi, tol);
    }
    lo = hi;
  }
  return acc;
}

}  // namespace

double blend(double x) {
  if (x <= 0) return 1.0;
  if (x >= 1) return 0.0;
  return 1.0 - x * x * (3.0 - 2.0 * x);
}

double sphere_area(int n) {
  if (n == 1) return 2.0;
  if (n == 2) return 2.0 * kPi;
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

double riesz_gamma(int n, double alpha) {
  return std::pow(kPi, 0.5 * n) * std::pow(2.0, alpha) * std::tgamma(0.5 * alpha) / std::tgamma(0.5 * (n - alpha));
}

double frac_constant(int n, double s) { return (n + s - 1.0) / riesz_gamma(n, 1.0 - s); }

double Kernel::profile(double r) const {
  if (r <= 0) return std::numeric_limits<double>::infinity();
  return amp * base_profile(*this, r / len);
}

std::vector<double> Kernel::breakpoints() const {
  std::vector<double> b;
  switch (kind) {
    case KernelKind::Fractional:
      break;
    case KernelKind::Truncated:
      b = {b0 * delta * len, delta * len};
      break;
    case KernelKind::Constant:
      b = {delta * len};
      break;
    case KernelKind::Table:
      for (double x : *tab_r) b.push_back(x * len);
      break;
  }
  return b;
}

std::string Kernel::name() const {
  std::ostringstream os;
  switch (kind) {
    case KernelKind::Fractional: os << "fractional"; break;
    case KernelKind::Truncated: os << "truncated"; break;
    case KernelKind::Constant: os << "constant"; break;
    case KernelKind::Table: os << "table"; break;
  }
  os << "(n=" << dim << ",s=" << s << ",R=" << support << ")";
  return os.str();
}

Kernel make_fractional(int n, double s) {
  if (!(s > 0 && s < 1)) throw std::invalid_argument("make_fractional: s must lie in (0,1)");
  if (n < 1 || n > 2) throw std::invalid_argument("make_fractional: n must be 1 or 2");
  Kernel k;
  k.dim = n;
  k.kind = KernelKind::Fractional;
  k.s = k.t = s;
  k.coef = frac_constant(n, s);
  k.sigma = n + s - 1.0;
  k.normalized = false;
  return k;
}

Kernel make_power(int n, double s, double coef) {
  Kernel k = make_fractional(n, s);
  k.coef = coef;
  return k;
}

Kernel make_truncated_fractional(int n, double s, double delta, double b0) {
  if (!(s > 0 && s < 1)) throw std::invalid_argument("make_truncated_fractional: s must lie in (0,1)");
  if (!(delta > 0)) throw std::invalid_argument("make_truncated_fractional: delta must be positive");
  if (!(b0 > 0 && b0 < 1)) throw std::invalid_argument("make_truncated_fractional: b0 must lie in (0,1)");
  if (n < 1 || n > 2) throw std::invalid_argument("make_truncated_fractional: n must be 1 or 2");
  Kernel k;
  k.dim = n;
  k.kind = KernelKind::Truncated;
  k.s = k.t = s;
  k.coef = frac_constant(n, s);
  k.delta = delta;
  k.b0 = b0;
  k.sigma = n + s - 1.0;
  k.support = delta;
  // int_0^delta w(r)/a0 r^{-s} dr, plateau part in closed form
  const double p = b0 * delta;
  double I = std::pow(p, 1.0 - s) / (1.0 - s);
  I += quad::gk([&](double r) { return blend((r - p) / (delta - p)) * std::pow(r, -s); }, p, delta, 1e-12);
  const double a0 = n / (sphere_area(n) * k.coef * I);
  if (!std::isfinite(a0) || a0 <= 0) throw std::runtime_error("make_truncated_fractional: normalization failed");
  k.a0 = a0;
  k.normalized = true;
  return k;
}

Kernel make_constant(int n, double R) {
  if (!(R > 0)) throw std::invalid_argument("make_constant: radius must be positive");
  Kernel k;
  k.dim = n;
  k.kind = KernelKind::Constant;
  k.delta = R;
  k.support = R;
  k.sigma = 0.0;
  // |S| c R^n / n = n
  k.coef = n * n / (sphere_area(n) * std::pow(R, n));
  k.s = k.t = 1.0 - n;  // no fractional orders; the hypothesis report says so
  if (n == 1) k.s = k.t = 0.0;
  k.normalized = true;
  return k;
}

Kernel make_table(int n, std::vector<double> r, std::vector<double> rho, double s, double t) {
  if (r.size() < 2 || r.size() != rho.size()) throw std::invalid_argument("table kernel: need >= 2 rows");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0) || rho[i] < 0 || !std::isfinite(rho[i])) throw std::invalid_argument("table kernel: bad row");
    if (i && !(r[i] > r[i - 1])) throw std::invalid_argument("table kernel: r must be strictly increasing");
  }
  Kernel k;
  k.dim = n;
  k.kind = KernelKind::Table;
  k.s = s;
  k.t = t;
  k.support = r.back();
  k.sigma = 0.0;
  if (rho[0] > 0 && rho[1] > 0) k.sigma = -std::log(rho[1] / rho[0]) / std::log(r[1] / r[0]);
  if (k.sigma - n + 1 >= 1.0) throw std::invalid_argument("table kernel: profile too singular at 0");
  k.tab_r = std::make_shared<const std::vector<double>>(std::move(r));
  k.tab_rho = std::make_shared<const std::vector<double>>(std::move(rho));
  k.normalized = std::abs(total_mass(k) - n) <= 1e-8 * n;
  return k;
}

Kernel load_table_csv(int n, const std::string& path, double s, double t) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open kernel table " + path);
  std::vector<double> r, rho;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) continue;  // header
    r.push_back(a);
    rho.push_back(b);
  }
  return make_table(n, std::move(r), std::move(rho), s, t);
}

Kernel rescale(const Kernel& k, double delta, RescaleMode mode) {
  if (!(delta > 0)) throw std::invalid_argument("rescale: delta must be positive");
  if (!k.compact()) throw std::invalid_argument("rescale: kernel must have compact support");
  Kernel out = k;
  out.len = k.len * delta;
  out.support = k.support * delta;
  if (mode == RescaleMode::Vanishing) {
    out.amp = k.amp * std::pow(delta, -k.dim);
  } else {
    const double v = k.profile(1.0 / delta);
    if (!(v > 0)) throw std::invalid_argument("rescale: profile vanishes at 1/delta");
    out.amp = k.amp / v;
    out.normalized = false;
  }
  return out;
}

double total_mass(const Kernel& k) {
  if (!k.compact()) return std::numeric_limits<double>::infinity();
  const int n = k.dim;
  auto g = [&](double r) { return k.profile(r) * std::pow(r, n - 1); };
  return sphere_area(n) * radial(k, g, 0.0, k.support, k.sigma - n + 1);
}

double q_direct(const Kernel& k, double r) {
  if (!(r > 0)) return std::numeric_limits<double>::infinity();
  if (k.kind == KernelKind::Fractional) return k.coef / k.sigma * std::pow(r, -k.sigma);
  if (r >= k.support) return 0.0;
  return radial(k, [&](double t) { return k.profile(t) / t; }, r, k.support, 0.0);
}

double PotentialProfile::operator()(double x) const {
  const Kernel& k = kernel;
  if (closed_form) return q_direct(k, x);
  if (x >= k.support) return 0.0;
  if (x <= r.front()) {
    const double r0 = r.front();
    const double p0 = k.profile(r0);
    if (k.sigma > 0) return q.front() + p0 * std::pow(r0, k.sigma) * (std::pow(x, -k.sigma) - std::pow(r0, -k.sigma)) / k.sigma;
    return q.front() + p0 * std::log(r0 / x);
  }
  auto it = std::upper_bound(r.begin(), r.end(), x);
  std::size_t i = std::min<std::size_t>(it - r.begin(), r.size() - 1) - 1;
  // cubic Hermite in log r; dQ/dlog r = -profile
  const double x0 = std::log(r[i]), x1 = std::log(r[i + 1]);
  const double hh = x1 - x0;
  const double th = (std::log(x) - x0) / hh;
  const double m0 = -k.profile(r[i] * (1 + 1e-13)) * hh;
  const double m1 = -k.profile(r[i + 1] * (1 - 1e-13)) * hh;
  const double t2 = th * th, t3 = t2 * th;
  return (2 * t3 - 3 * t2 + 1) * q[i] + (t3 - 2 * t2 + th) * m0 + (-2 * t3 + 3 * t2) * q[i + 1] + (t3 - t2) * m1;
}

PotentialProfile q_profile(const Kernel& k) {
  PotentialProfile p;
  p.kernel = k;
  if (!k.compact()) {
    if (k.kind != KernelKind::Fractional) throw std::runtime_error("q_profile: unbounded support needs the fractional kind");
    p.closed_form = true;
    const int m = 512;
    for (int i = 0; i < m; ++i) {
      double x = 1e-6 * std::pow(1e6, double(i) / (m - 1));
      p.r.push_back(x);
      p.q.push_back(q_direct(k, x));
    }
    return p;
  }
  const int m = 512;
  const double R = k.support;
  p.r.resize(m);
  p.q.assign(m, 0.0);
  for (int i = 0; i < m; ++i) p.r[i] = R * 1e-6 * std::pow(1e6, double(i) / (m - 1));
  p.r[m - 1] = R;
  for (int i = m - 2; i >= 0; --i)
    p.q[i] = p.q[i + 1] + radial(k, [&](double t) { return k.profile(t) / t; }, p.r[i], p.r[i + 1], 0.0);
  return p;
}

double q_hat_quadrature(const Kernel& k, double xi) {
  xi = std::abs(xi);
  const int n = k.dim;
  if (xi == 0.0) return total_mass(k) / n;
  const double w = 2 * kPi * xi;
  quad::Fn g;
  double pref;
  if (n == 1) {
    g = [&](double r) { return k.profile(r) / r * std::sin(w * r); };
    pref = 1.0 / (kPi * xi);
  } else if (n == 2) {
    g = [&](double r) { return k.profile(r) * boost::math::cyl_bessel_j(1, w * r); };
    pref = 1.0 / xi;
  } else {
    throw std::runtime_error("q_hat: only n = 1, 2");
  }
  const double alpha = k.sigma - n + 1;
  const double half = kPi / w;
  if (!k.compact()) {
    if (n != 1) throw std::runtime_error("q_hat_quadrature: infinite support only for n = 1");
    std::vector<double> sums;
    double acc = quad::singular0(g, half, alpha, 1e-12);
    sums.push_back(acc);
    for (int m = 1; m < 120; ++m) {
      acc += quad::gk(g, m * half, (m + 1) * half, 1e-12);
      sums.push_back(acc);
    }
    return pref * quad::euler_average(sums, 60);
  }
  const double R = k.support;
  double first = std::min(half, R);
  for (double b : k.breakpoints())
    if (b > 0 && b < first) first = b;
  double acc = quad::singular0(g, first, alpha, 1e-12);
  std::vector<double> br = k.breakpoints();
  for (double x = first + half; x < R; x += half) br.push_back(x);
  acc += quad::with_breaks(g, first, R, br, 1e-12);
  return pref * acc;
}

double q_hat(const Kernel& k, double xi) {
  xi = std::abs(xi);
  if (k.kind == KernelKind::Fractional) {
    if (xi == 0.0) return std::numeric_limits<double>::infinity();
    return k.coef / frac_constant(k.dim, k.s) * std::pow(2 * kPi * xi, k.s - 1.0);
  }
  return q_hat_quadrature(k, xi);
}

HypothesisReport check_hypotheses(const Kernel& k, double eps, int probe_count, double nu) {
  if (probe_count < 10) throw std::invalid_argument("check_hypotheses: probe_count must be >= 10");
  HypothesisReport rep;
  rep.nu = nu;
  rep.eps = eps;
  const int n = k.dim;
  std::vector<double> r(probe_count);
  for (int i = 0; i < probe_count; ++i) r[i] = eps * 0.999 * std::pow(1e-6, 1.0 - double(i) / (probe_count - 1));
  auto f = [&](double x) { return std::pow(x, n - 2) * k.profile(x); };

  bool pos = true, dec_f = true, dec_g = true;
  for (int i = 0; i < probe_count; ++i) {
    if (!(f(r[i]) > 0)) pos = false;
    if (i) {
      if (f(r[i]) > f(r[i - 1]) * (1 + 1e-12)) dec_f = false;
      if (std::pow(r[i], nu) * f(r[i]) > std::pow(r[i - 1], nu) * f(r[i - 1]) * (1 + 1e-12)) dec_g = false;
    }
  }
  rep.h1 = pos && dec_f && dec_g;

  double c1 = 0, c2 = 0;
  for (double x : r) {
    const double e = 1e-4 * x;
    const double fm = f(x - e), f0 = f(x), fp = f(x + e);
    const double d1 = (fp - fm) / (2 * e), d2 = (fp - 2 * f0 + fm) / (e * e);
    if (f0 > 0) {
      c1 = std::max(c1, std::abs(d1) * x / f0);
      c2 = std::max(c2, std::abs(d2) * x * x / f0);
    } else if (d1 != 0 || d2 != 0) {
      c1 = c2 = std::numeric_limits<double>::infinity();
    }
  }
  rep.h2_c1 = c1;
  rep.h2_c2 = c2;
  rep.h2 = std::isfinite(c1) && std::isfinite(c2) && c1 < 1e4 && c2 < 1e4;

  // almost monotone constants over all probe pairs
  auto g3 = [&](double x) { return std::pow(x, n + k.s - 1) * k.profile(x); };
  auto g4 = [&](double x) { return std::pow(x, n + k.t - 1) * k.profile(x); };
  double m3 = 1, m4 = 1, lo3 = g3(r[0]), hi4 = g4(r[0]);
  for (int i = 1; i < probe_count; ++i) {
    const double v3 = g3(r[i]), v4 = g4(r[i]);
    if (lo3 > 0) m3 = std::max(m3, v3 / lo3);
    else if (v3 > 0) m3 = std::numeric_limits<double>::infinity();
    if (v4 > 0) m4 = std::max(m4, hi4 / v4);
    else if (hi4 > 0) m4 = std::numeric_limits<double>::infinity();
    lo3 = std::min(lo3, v3);
    hi4 = std::max(hi4, v4);
  }
  rep.h3_const = m3;
  rep.h4_const = m4;
  rep.h3 = k.s > 0 && k.s < 1 && m3 <= 2.0;
  rep.h4 = k.t > 0 && k.t < 1 && k.t <= k.s && m4 <= 2.0;
  return rep;
}

double s_infinity(const Kernel& k, double delta_big) {
  const double a = k.profile(1.0 / (std::exp(1.0) * delta_big));
  const double b = k.profile(1.0 / delta_big);
  return std::log(a / b) - k.dim + 1;
}

}  // namespace nlel
