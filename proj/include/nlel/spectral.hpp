#pragma once

#include <complex>
#include <vector>

#include "nlel/grid.hpp"
#include "nlel/kernel.hpp"

namespace nlel {

// Fourier backend on a torus. D u = F^{-1}( 2 pi i xi Qhat(|xi|) u^ ).
// The Nyquist mode of odd multipliers is dropped so real fields stay real.
class SpectralOp {
 public:
  SpectralOp(Kernel k, TorusGrid t);

  const Kernel& kernel() const { return k_; }
  const TorusGrid& torus() const { return t_; }
  int n() const { return t_.lat->n; }

  // Qhat at mode (i0, i1) in FFT storage order
  double qhat(int i0, int i1 = 0) const { return qh_[idx(i0, i1)]; }

  Field grad(const Field& u) const;
  Field div(const Field& v) const;
  Field sym_grad(const Field& v) const;
  Field laplacian(const Field& u) const;  // multiplier |2 pi xi Qhat|^2
  Field q_translate(const Field& u) const;
  // throws std::domain_error when |Qhat| < thresh at a frequency present in v
  Field p_translate(const Field& v, double thresh = 1e-12) const;
  // classical spectral gradient (multiplier 2 pi i xi)
  Field local_grad(const Field& u) const;

 private:
  int idx(int i0, int i1) const { return i0 + t_.N * i1; }
  std::vector<std::complex<double>> fwd(const Eigen::VectorXd& col) const;
  Eigen::VectorXd inv(std::vector<std::complex<double>> c) const;
  bool nyquist(int i0, int i1) const;
  // apply i*2pi*xi_d*scale[k] to a column (scale = Qhat or 1)
  Eigen::VectorXd deriv(const Eigen::VectorXd& col, int d, bool with_q) const;

  Kernel k_;
  TorusGrid t_;
  std::vector<double> qh_;
};

// smallest ||sym grad v||^2 / ||grad v||^2 over `count` random zero-mean vector fields
struct KornReport {
  double min_ratio = 0;
  double min_margin = 0;  // min of ||Dsym||^2 - 0.5 ||D||^2
  int trials = 0;
};
KornReport korn_check(const SpectralOp& op, int count, unsigned seed, int modes = 6);

// smooth random zero-mean band-limited field on the torus (deterministic in seed)
Field random_torus_field(const TorusGrid& t, Rank r, unsigned seed, int modes);

}  // namespace nlel
