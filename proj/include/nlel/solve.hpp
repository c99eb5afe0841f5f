#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <vector>

#include "nlel/elasticity.hpp"
#include "nlel/errors.hpp"
#include "nlel/operators.hpp"

namespace nlel {

struct SolverOptions {
  double tol = 1e-10;  // relative residual
  int max_iter = 20000;
  bool diagonal_precond = false;
};

// Assembled symmetric system on free degrees of freedom.
// Unknown (node dofs[i], component c) sits at index c * dofs.size() + i.
struct StiffnessSystem {
  SpMat K;
  Eigen::VectorXd F;
  std::vector<int> dofs;
  int comps = 1;
  Constraint tag = Constraint::Free;
  double symmetry_defect = 0;  // ||K - K^T||_F / ||K||_F

  Eigen::VectorXd gather(const Field& v) const;  // field -> dof vector
  Field scatter(const Eigen::VectorXd& x, std::shared_ptr<const Lattice> lat) const;
};

struct SolveReport {
  Field v;
  double energy = 0;
  double residual = 0;  // ||K x - F|| / ||F|| (projected for Neumann)
  int iterations = 0;
  bool converged = false;
  int dofs = 0;
  int nullspace_dim = 0;
  double collar_flux_max = 0;  // Neumann: max |N(C[Dsym u])| on the collar
  double operator_discrepancy = -1;
};

// result of a CG run; status flags non-positive curvature (matrix not SPD)
struct CGResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual = 0;
  bool converged = false;
  bool nonpositive = false;
};
using LinOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
// preconditioned CG; `project` (optional) maps onto the admissible subspace
CGResult cg(const LinOp& A, const Eigen::VectorXd& b, const Eigen::VectorXd& x0, const SolverOptions& opt,
            const Eigen::VectorXd* inv_diag = nullptr, const LinOp* project = nullptr);

// ----- Dirichlet -----
// dofs: zero-on-complement -> open Omega nodes; zero-on-collar -> inner nodes
StiffnessSystem assemble_dirichlet(const Tensor& C, const QuadOp& op, const Field& f, Constraint tag);
SolveReport solve_dirichlet(const Tensor& C, const QuadOp& op, const Field& f, Constraint tag,
                            const SolverOptions& opt = {}, const Eigen::VectorXd* x0 = nullptr);
// mu (-Delta) - (mu + lambda) grad div, evaluated at dof rows; scaled by h^n to compare with K
SpMat assemble_strong_iso(double mu, double lambda, const QuadOp& op, const std::vector<int>& dofs);
SolveReport solve_dirichlet_strongform_isotropic(double mu, double lambda, const QuadOp& op, const Field& f,
                                                 Constraint tag, const SolverOptions& opt = {});
// Lanczos estimate of the smallest eigenvalue
double min_ritz_value(const SpMat& K, int steps = 80, unsigned seed = 7);
// x^T K x > 0 for `count` random x
bool random_spd_check(const SpMat& K, int count, unsigned seed = 11);

// ----- Neumann -----
struct NullSpaceBasis {
  std::vector<int> dofs;         // nodes carrying unknowns
  Eigen::MatrixXd B;             // columns: basis (scalar or stacked vector), mass-orthonormal
  double mass = 1.0;             // lumped mass per node (h^n)
  int comps = 1;                 // 1: scalar kernel of D; n: kernel of Dsym for vector fields
  std::vector<double> singular;  // all singular values, descending
  double sigma_max = 0;
  int dim() const { return static_cast<int>(B.cols()); }
};

// Neumann unknowns: nodes of Omega_delta plus whatever else the stencil of a closed-Omega node touches
std::vector<int> neumann_dofs(const QuadOp& op);
// kernel of u -> D u|_closed Omega for scalar u (SVD, threshold rel_tol * sigma_max)
NullSpaceBasis compute_nullspace(const QuadOp& op, double rel_tol = 1e-10);
// kernel of v -> Dsym v|_closed Omega for vector v; differs from the componentwise kernel by rotations when n = 2
NullSpaceBasis compute_sym_nullspace(const QuadOp& op, double rel_tol = 1e-10);
// u - sum <u, b_i> b_i, per component for a scalar basis
Field project_out_nullspace(const NullSpaceBasis& nb, const Field& u);
Eigen::VectorXd project_out(const NullSpaceBasis& nb, const Eigen::VectorXd& x);
// max_i |<f, b_i>| / (||f|| ||b_i||)
double compatibility_defect(const NullSpaceBasis& nb, const Field& f);
// projection of f, supported on the inner region, that is orthogonal to every basis vector
Field compatible_load(const NullSpaceBasis& nb, const Field& f, const Domain& dom);
// Poincare-Wirtinger constant sup ||u - pi u|| / ||D u|| (exact, from the singular values)
double poincare_wirtinger_constant(const NullSpaceBasis& nb, double hn);

StiffnessSystem assemble_neumann(const Tensor& C, const QuadOp& op, const Field& f);
SolveReport solve_neumann(const Tensor& C, const QuadOp& op, const Field& f, const SolverOptions& opt = {},
                          bool project_f = false, const Eigen::VectorXd* x0 = nullptr);
// same with an explicit load vector in dof layout (used for manufactured solutions)
SolveReport solve_neumann_system(const Tensor& C, const QuadOp& op, const StiffnessSystem& sys,
                                 const NullSpaceBasis& sym_basis, const Eigen::VectorXd& F,
                                 const SolverOptions& opt = {}, const Eigen::VectorXd* x0 = nullptr);

// ----- local oracle -----
enum class LocalBC { Dirichlet, Neumann };
// P1 elements (triangles in 2-D) on the grid of `dom` restricted to the closed box
SolveReport solve_local_oracle(const Domain& dom, const Tensor& C, const Field& f, LocalBC bc,
                               const SolverOptions& opt = {});

// copy values of `from` at nodes of `to` (grids must be nested). Nodes of `to`
// absent from `from` are an error unless outside_zero.
Field restrict_to(const Field& from, std::shared_ptr<const Lattice> to, bool outside_zero = false);

}  // namespace nlel
