#pragma once

#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nlel/grid.hpp"
#include "nlel/kernel.hpp"

namespace nlel {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Offset weights g(z) = int phi_z(y) y/|y|^2 rho(y) dy, phi_z the P1/Q1 hat at offset z.
// The discrete gradient is D u(x) = sum_z g(z) u(x+z); it is the exact nonlocal
// gradient of the piecewise (bi)linear interpolant, evaluated at nodes.
struct Stencil {
  int n = 1;
  double h = 1.0;
  int reach = 0;
  std::vector<std::array<int, 2>> off;
  std::vector<std::array<double, 2>> g;
};

// reach < 0: derived from the support radius (required for infinite support)
Stencil build_stencil(const Kernel& k, double h, int n, int reach = -1);
// scalar weights c(z) = int phi_z(y) Q(|y|) dy, for the convolution with Q
struct ScalarStencil {
  int n = 1;
  std::vector<std::array<int, 2>> off;
  std::vector<double> c;
};
ScalarStencil build_q_stencil(const Kernel& k, double h, int n, int reach = -1);

class QuadOp {
 public:
  // lattice may be periodic (torus quadrature) or a bounded grid (values beyond it are zero)
  QuadOp(Kernel k, std::shared_ptr<const Lattice> lat, int reach = -1);
  QuadOp(Kernel k, std::shared_ptr<const Domain> dom, int reach = -1);

  const Kernel& kernel() const { return k_; }
  const Lattice& lattice() const { return *lat_; }
  std::shared_ptr<const Lattice> lattice_ptr() const { return lat_; }
  const Domain* domain() const { return dom_.get(); }
  const Stencil& stencil() const { return st_; }
  int n() const { return lat_->n; }

  // direction-d gradient matrix on the full grid (cached)
  const SpMat& grad_matrix(int d) const;
  // restricted to the given evaluation rows and data columns
  SpMat grad_matrix(int d, const std::vector<int>& rows, const std::vector<int>& cols) const;
  // divergence matrix for direction d, assembled from the stencil seen at the evaluation node
  SpMat div_matrix(int d) const;

  Field grad(const Field& u) const;       // scalar -> vector, vector -> matrix (rows comps)
  Field div(const Field& v) const;        // vector -> scalar, matrix -> vector (2nd index)
  Field sym_grad(const Field& v) const;
  Field laplacian(const Field& u) const;  // (-Delta)_rho = -div grad
  Field leibniz_remainder(const Field& phi, const Field& Phi) const;
  Field q_translate(const Field& u) const;
  // flux form on the collar nodes, zero elsewhere (see README, boundary terms)
  Field normal_derivative(const Field& Phi) const;

  // rows whose whole stencil lies inside the grid (always true on a torus)
  std::vector<char> complete_rows() const;

 private:
  int neighbor(int k, const std::array<int, 2>& z) const;
  void check_double_collar() const;

  Kernel k_;
  std::shared_ptr<const Lattice> lat_;
  std::shared_ptr<const Domain> dom_;
  Stencil st_;
  mutable std::array<std::shared_ptr<SpMat>, 2> G_;
  mutable std::shared_ptr<ScalarStencil> qs_;
};

// || div((grad v)^T) - grad(div v) || / || grad(div v) ||, over complete rows
double grad_div_identity_check(const QuadOp& op, const Field& v);

void export_coo_csv(const std::string& path, const SpMat& m);

// Pointwise quadrature of the defining integrals for closed-form fields,
// independent of the stencil. rmax bounds the radial range (needed for the
// infinite-support kernel; defaults to the support radius).
namespace direct {
using ScalarFn = std::function<double(const double*)>;
using VecFn = std::function<void(const double*, double*)>;  // n components
std::array<double, 2> grad(const Kernel& k, const ScalarFn& u, const double* x, double rmax = -1);
double div(const Kernel& k, const VecFn& v, const double* x, double rmax = -1);
// K_{rho,phi}(Phi)(x) for a vector field Phi (one row of a matrix field)
double leibniz(const Kernel& k, const ScalarFn& phi, const VecFn& Phi, const double* x, double rmax = -1);
}  // namespace direct

}  // namespace nlel
