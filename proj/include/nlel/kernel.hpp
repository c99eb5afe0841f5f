#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace nlel {

enum class KernelKind { Fractional, Truncated, Table, Constant };

// Radial interaction kernel rho(x) = profile(|x|).
// profile(r) = amp * base(r / len), base chosen by kind.
struct Kernel {
  int dim = 1;
  KernelKind kind = KernelKind::Fractional;
  double s = 0.5;        // upper order: r^{n+s-1} rho almost decreasing
  double t = 0.5;        // lower order: r^{n+t-1} rho almost increasing
  double coef = 1.0;     // c_{n,s} for fractional/truncated, level for constant
  double delta = 1.0;    // base horizon (truncated, constant)
  double b0 = 0.5;
  double a0 = 1.0;
  double amp = 1.0;
  double len = 1.0;
  double support = std::numeric_limits<double>::infinity();
  double sigma = 0.0;    // profile ~ r^{-sigma} near 0
  bool normalized = false;
  std::shared_ptr<const std::vector<double>> tab_r, tab_rho;

  double profile(double r) const;
  // radii where the profile is not smooth (already in physical units)
  std::vector<double> breakpoints() const;
  bool compact() const { return std::isfinite(support); }
  std::string name() const;
};

double sphere_area(int n);                  // |S^{n-1}|
double riesz_gamma(int n, double alpha);    // gamma_alpha
double frac_constant(int n, double s);      // c_{n,s}
double blend(double x);                     // C^1 cutoff on [0,1], 1 -> 0

Kernel make_fractional(int n, double s);
// pure power r^{-(n+s-1)} times coef (limit kernel of the diverging rescaling)
Kernel make_power(int n, double s, double coef);
Kernel make_truncated_fractional(int n, double s, double delta, double b0);
// constant level on (0,R); normalized so that the integral is n
Kernel make_constant(int n, double R);
// two-column table (r, rho), strictly increasing r, log-log interpolation
Kernel make_table(int n, std::vector<double> r, std::vector<double> rho, double s, double t);
Kernel load_table_csv(int n, const std::string& path, double s, double t);

enum class RescaleMode { Vanishing, Diverging };
Kernel rescale(const Kernel& k, double delta, RescaleMode mode);

// |S^{n-1}| * int_0^R profile(r) r^{n-1} dr
double total_mass(const Kernel& k);

struct PotentialProfile {
  Kernel kernel;
  std::vector<double> r, q;   // geometric grid, Q values
  bool closed_form = false;
  double operator()(double r) const;
  // -dQ/dr = profile(r)/r
};

PotentialProfile q_profile(const Kernel& k);
// Q by direct quadrature at one radius
double q_direct(const Kernel& k, double r);

// Fourier transform of Q; closed form for the fractional kind
double q_hat(const Kernel& k, double xi);
// always the quadrature of the sine formula (n=1 infinite support uses series acceleration)
double q_hat_quadrature(const Kernel& k, double xi);

struct HypothesisReport {
  bool h1 = false, h2 = false, h3 = false, h4 = false;
  double h2_c1 = 0, h2_c2 = 0;  // measured C(1), C(2)
  double h3_const = 0, h4_const = 0;
  double nu = 0, eps = 0;
  bool all() const { return h1 && h2 && h3 && h4; }
};

HypothesisReport check_hypotheses(const Kernel& k, double eps, int probe_count, double nu = 0.05);

// limit order of the diverging rescaling: log(rho_inf(1/e)) - n + 1
double s_infinity(const Kernel& k, double delta_big = 1e8);

}  // namespace nlel
