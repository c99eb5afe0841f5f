#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace nlel::quad {

using Fn = std::function<double(double)>;

// adaptive Gauss-Kronrod (15 pt) on [a,b], absolute-ish tolerance
double gk(const Fn& f, double a, double b, double tol = 1e-12, unsigned depth = 12);

// integral over [0,b] of f where f(r) ~ r^{-alpha} near 0 (alpha < 1).
// uses u = r^{1-alpha} so the transformed integrand is bounded.
double singular0(const Fn& f, double b, double alpha, double tol = 1e-12);

// same, but on [a,b] with the singular point at a
double singular_left(const Fn& f, double a, double b, double alpha, double tol = 1e-12);

// integrate on [a,b] splitting at the supplied breakpoints (those inside (a,b))
double with_breaks(const Fn& f, double a, double b, std::vector<double> breaks, double tol = 1e-12);

// tanh-sinh, handles endpoint singularities of unknown strength
double ts(const Fn& f, double a, double b, double tol = 1e-11);

// fixed 30-point Gauss-Legendre on `panels` equal panels; no adaptivity, so
// nested use with interpolated integrands stays cheap and deterministic
double gauss_fixed(const Fn& f, double a, double b, int panels = 1);
// same after the r - a = u^{1/(1-alpha)} substitution (singular at a)
double gauss_singular_left(const Fn& f, double a, double b, double alpha, int panels = 2);
double gauss_singular_right(const Fn& f, double a, double b, double alpha, int panels = 2);

// sum of an alternating series of partial integrals via repeated averaging
double euler_average(const std::vector<double>& partial_sums, int levels);

}  // namespace nlel::quad
