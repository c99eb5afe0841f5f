#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nlel/grid.hpp"
#include "nlel/operators.hpp"

namespace nlel {

// Either isotropic (mu, lambda) or a general c_ijkl table, row-major ijkl.
struct Tensor {
  int n = 1;
  bool isotropic = true;
  double mu = 1.0, lambda = 0.0;
  std::vector<double> c;  // n^4 entries when !isotropic

  static Tensor iso(int n, double mu, double lambda);
  static Tensor general(int n, std::vector<double> c);
  double at(int i, int j, int k, int l) const;  // c_ijkl (isotropic: expanded)
};

Eigen::MatrixXd apply_tensor(const Tensor& C, const Eigen::MatrixXd& M);

struct Ellipticity {
  bool ok = false;
  double margin = 0;       // min(mu, 2mu + lambda)
  double sampled_min = 0;  // min over unit a, b of (a x b) : C[a x b]
};
Ellipticity strong_ellipticity(const Tensor& C, int samples = 200, unsigned seed = 1);

// smallest eigenvalue of M : C[M] on symmetric M (orthonormal basis of Sym)
double voigt_c1(const Tensor& C);
// max |C[M] - C[M_sym]| and max asymmetry of C[M], over the basis
double minor_symmetry_defect(const Tensor& C);

// Nodal weights for the bilinear forms. Dirichlet: h^n on every node (fields
// vanish off Omega, the integral is over R^n). Neumann: trapezoid on closed Omega.
enum class FormScope { Whole, Omega };
Eigen::VectorXd form_weights(const Domain& dom, FormScope scope);

// sum_k w_k C[Dsym v](x_k) : Dsym w(x_k)
double bilinear(const Tensor& C, const QuadOp& op, const Field& v, const Field& w, const Eigen::VectorXd& wts);
// isotropic expansion 2 mu Dsym v : Dsym w + lambda div v div w (same weights)
double bilinear_iso_expanded(double mu, double lambda, const QuadOp& op, const Field& v, const Field& w,
                             const Eigen::VectorXd& wts);
// 1/2 a(v, v) - <f, v>, mass-lumped with the same weights
double energy(const Tensor& C, const QuadOp& op, const Field& v, const Field& f, const Eigen::VectorXd& wts);
// C[Dsym v] nodewise
Field stress(const Tensor& C, const QuadOp& op, const Field& v);

}  // namespace nlel
