#include "nlel/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace nlel::quad {

double gk(const Fn& f, double a, double b, double tol, unsigned depth) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, depth, tol, &err);
  if (!std::isfinite(v)) throw std::runtime_error("quadrature: non-finite result");
  return v;
}

double singular0(const Fn& f, double b, double alpha, double tol) {
  return singular_left(f, 0.0, b, alpha, tol);
}

double singular_left(const Fn& f, double a, double b, double alpha, double tol) {
  if (!(b > a)) return 0.0;
  if (alpha <= 0.0) return gk(f, a, b, tol);
  if (alpha >= 1.0) throw std::runtime_error("quadrature: non-integrable singularity");
  // r - a = u^p, p = 1/(1-alpha)
  const double p = 1.0 / (1.0 - alpha);
  const double ub = std::pow(b - a, 1.0 - alpha);
  auto g = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double d = std::pow(u, p);
    return f(a + d) * p * d / u;
  };
  double v = gk(g, 0.0, ub, tol);
  // guard against the transformed integrand still being stiff near 0
  return v;
}

double with_breaks(const Fn& f, double a, double b, std::vector<double> breaks, double tol) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double lo = std::max(a, breaks[i]), hi = std::min(b, breaks[i + 1]);
    if (hi > lo) acc += gk(f, lo, hi, tol);
  }
  return acc;
}

double ts(const Fn& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  static boost::math::quadrature::tanh_sinh<double> integrator(12);
  // two-argument form: boost's one-argument finite path asserts on narrow intervals
  auto g = [&](double x, double) {
    if (x <= a || x >= b) return 0.0;
    return f(x);
  };
  double err = 0.0, l1 = 0.0;
  std::size_t levels = 0;
  double v = integrator.integrate(g, a, b, tol, &err, &l1, &levels);
  if (!std::isfinite(v)) throw std::runtime_error("quadrature: tanh-sinh failed");
  return v;
}

double gauss_fixed(const Fn& f, double a, double b, int panels) {
  using G = boost::math::quadrature::gauss<double, 30>;
  if (!(b > a)) return 0.0;
  const double w = (b - a) / panels;
  double s = 0;
  for (int i = 0; i < panels; ++i) s += G::integrate(f, a + i * w, a + (i + 1) * w);
  return s;
}

namespace {
// r^{-alpha} at the endpoint `e`, approached from the side `dir` (+1: from above).
// d is formed directly, so e + dir * d keeps every digit of the small offset.
double singular_end(const Fn& f, double e, double len, int dir, double alpha, int panels) {
  if (!(len > 0)) return 0.0;
  if (alpha >= 1.0) throw std::runtime_error("quadrature: non-integrable singularity");
  const double p = 1.0 / (1.0 - alpha);
  const double ub = std::pow(len, 1.0 - alpha);
  auto g = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double d = std::pow(u, p);
    return f(e + dir * d) * p * d / u;
  };
  // graded panels in u: the transformed integrand still has a weak u^k factor at 0
  double s = 0, hi = ub;
  for (int i = 0; i < panels; ++i) {
    const double lo = i + 1 == panels ? 0.0 : hi * 0.25;
    s += gauss_fixed(g, lo, hi, 1);
    hi = lo;
  }
  return s;
}
}  // namespace

double gauss_singular_left(const Fn& f, double a, double b, double alpha, int panels) {
  if (!(b > a)) return 0.0;
  if (alpha <= 0.0) return gauss_fixed(f, a, b, panels);
  return singular_end(f, a, b - a, 1, alpha, panels);
}

double gauss_singular_right(const Fn& f, double a, double b, double alpha, int panels) {
  if (!(b > a)) return 0.0;
  if (alpha <= 0.0) return gauss_fixed(f, a, b, panels);
  return singular_end(f, b, b - a, -1, alpha, panels);
}

double euler_average(const std::vector<double>& s, int levels) {
  std::vector<double> w(s);
  for (int l = 0; l < levels && w.size() > 1; ++l) {
    std::vector<double> nw(w.size() - 1);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) nw[i] = 0.5 * (w[i] + w[i + 1]);
    w.swap(nw);
  }
  return w.back();
}

}  // namespace nlel::quad
