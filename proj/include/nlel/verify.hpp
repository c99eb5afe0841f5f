#pragma once

#include <string>
#include <vector>

#include "nlel/config.hpp"
#include "nlel/operators.hpp"
#include "nlel/spectral.hpp"

namespace nlel {

struct Check {
  std::string name;
  double value = 0;      // measured
  double threshold = 0;  // pass iff value <= threshold (or >= for "min" checks)
  bool pass = false;
  std::string note;
};

struct VerifyReport {
  std::vector<Check> checks;
  bool ok() const;
  std::string json(const RunConfig& cfg) const;
};

// Individual identities, shared with the acceptance driver. All deterministic in `seed`.

// max |D(Ax + b) - A| over rows whose whole stencil sees data
double affine_error(const QuadOp& op, unsigned seed);
// max_d max |div_d + G_d^T| over entries
double adjoint_defect(const QuadOp& op);
// |<D u, v> + <u, div v>| / max(|<D u, v>|, |<u, div v>|) with both operators by direct
// quadrature of their integrals, smooth bump pairs, trapezoid sums on a grid of spacing h; max over pairs
double duality_quadrature_residual(const Kernel& k, const Box& box, double h, int pairs, unsigned seed);
// max |tr sym_grad v - div v| nodewise
double trace_defect(const QuadOp& op, unsigned seed);
double trace_defect(const SpectralOp& op, unsigned seed);
// || div((D v)^T) - D(div v) || / || D(div v) ||
double grad_div_defect(const SpectralOp& op, unsigned seed);
// || laplacian(u) + div(grad u) || / || laplacian(u) ||
double laplacian_composition_defect(const SpectralOp& op, unsigned seed);
// discrete: div(phi Phi) - phi div Phi - K(Phi) on complete rows, relative to |div(phi Phi)|
double leibniz_defect(const QuadOp& op, unsigned seed);
// same identity, every term by direct quadrature at `points` sample points (1-D)
double leibniz_defect_direct(const Kernel& k, int points, unsigned seed);

// Poincare for zero-on-complement fields: exact constant sup ||u|| / ||D u|| on the grid
// (smallest singular value) at two resolutions, and the largest ratio seen on random fields
struct PoincareResult {
  double C = 0, C_coarse = 0, sampled_max = 0;
  bool bounded() const { return sampled_max <= C * (1 + 1e-9) && C <= 2 * C_coarse && C_coarse <= 2 * C; }
};
PoincareResult poincare_check(const Kernel& k, const Box& box, int N, int fields, unsigned seed);

// max_i | qhat(rescale(k, d_i), xi_j) - qhat(k, d_i xi_j) | / |qhat(k, d_i xi_j)|
double fourier_scaling_defect(const Kernel& k, const std::vector<double>& deltas, const std::vector<double>& xis);
// max relative | qhat_quadrature(fractional s, xi) - (2 pi xi)^{s-1} |
double fractional_multiplier_defect(double s, const std::vector<double>& xis);

// strong ellipticity of the tensor and H1-H4 of the kernel; throws HypothesisError
void hypothesis_gate(const RunConfig& cfg);

// Runs every check on the configured kernel; throws HypothesisError when the kernel
// hypotheses or strong ellipticity fail (nothing else runs then).
VerifyReport verify_suite(const RunConfig& cfg);

}  // namespace nlel
