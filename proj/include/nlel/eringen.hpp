#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "nlel/elasticity.hpp"
#include "nlel/grid.hpp"
#include "nlel/kernel.hpp"

namespace nlel {

// Q for a compact 1-D kernel, accurate to roundoff: closed form on a power-law
// head piece, Chebyshev interpolation on the smooth pieces between breakpoints.
// (The log-Hermite table of q_profile is only C^1, which shows up as ripples in Q * Q.)
struct PotentialPieces {
  std::vector<double> edges;             // 0 < e_1 < ... < support
  std::vector<std::vector<double>> val;  // per piece >= 1: values at Chebyshev points
  double head_c = 0, sigma = 0;          // head: profile = head_c r^{-sigma}
  double head_top = 0;                   // Q at the end of the head piece
  bool power_head = false;
  PotentialProfile fallback;             // head when it is not a pure power
  double operator()(double r) const;
};
PotentialPieces q_pieces(const Kernel& k);

// Atilde = Q * Q (self-convolution of the potential), 1-D only.
// Singular at r = 0 when s >= 1/2 (Q ~ r^{-s}), integrable for every s < 1.
struct EringenKernel {
  Kernel source;
  PotentialPieces Q;
  double support = 0;  // 2 * support of Q
  std::vector<double> kinks;  // radii where Atilde is not smooth
  double alpha = 0;           // Atilde ~ r^{-alpha} near 0
  std::vector<double> r, a;   // coarse table for output
  // interpolation table: segments between kinks, the first in log r
  std::vector<double> edges;
  std::vector<std::vector<double>> seg_pos, seg_val;

  double operator()(double r) const;  // from the table
  double exact(double r, int panels = 3) const;     // direct quadrature of Q * Q
};

EringenKernel build_eringen_kernel(const Kernel& k, int table_points = 64);
// Fourier transform of Atilde by quadrature (compare with q_hat^2)
double eringen_hat(const EringenKernel& A, double xi);

// Double integral with local P1 strains, exact per cell pair:
// a_A(v, w) = sum_{e,e'} W(|e - e'|) C[eps_v(e)] eps_w(e'),
// W(m) = int_{cell 0} int_{cell m} Atilde(x - y) dy dx.
class EringenForm {
 public:
  EringenForm(const EringenKernel& A, const Tensor& C, std::shared_ptr<const Domain> dom, int dense_cap = 4096);

  double operator()(const Field& v, const Field& w) const;
  // int int Atilde(x - y) phi(x) phi(y), phi constant on cells
  double mercer(const Eigen::VectorXd& phi) const;
  int cells() const { return cells_; }
  const std::vector<double>& pair_weights() const { return W_; }
  bool dense() const { return dense_.size() > 0; }

 private:
  Eigen::VectorXd strain(const Field& v) const;
  double quad_form(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  Tensor C_;
  std::shared_ptr<const Domain> dom_;
  int cells_ = 0;
  std::vector<double> W_;
  Eigen::MatrixXd dense_;
};

// smooth bump field with support inside the box, deterministic in `seed`
Field random_bump_field(std::shared_ptr<const Lattice> lat, const Box& box, unsigned seed, int bumps = 3);

struct FormComparison {
  std::vector<int> resolutions;           // cells per unit length
  std::vector<double> discrepancies;      // max over trial pairs
  std::vector<double> norm_discrepancies; // v = w
  std::vector<double> mercer_min;         // min over random phi of phi^T W phi / (h |phi|^2)
  std::vector<double> scalar_identity;    // |a_A(u,u) - ||D u||^2| / ||D u||^2 for a scalar bump
  bool mercer_ok = true;
};

// one resolution: relative |a_A - a_rho| over trial_count random pairs
double compare_forms(const Kernel& k, const Tensor& C, std::shared_ptr<const Domain> dom, int trial_count,
                     unsigned seed = 5, double* norm_disc = nullptr);
FormComparison eringen_study(const Kernel& k, const Tensor& C, const Box& box, const std::vector<int>& resolutions,
                             int trial_count, unsigned seed = 5);

}  // namespace nlel
