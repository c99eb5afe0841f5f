#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nlel/elasticity.hpp"
#include "nlel/solve.hpp"

namespace nlel {

enum class Regime { HorizonToZero, HorizonToInfinity, SToOne, NeumannHorizonToZero };
const char* regime_name(Regime r);  // h0, hinf, s1, neumann-h0
Regime parse_regime(const std::string& s);

// load as a function of position; componentwise for vector problems
using LoadFn = std::function<void(const double* x, double* out)>;

struct LimitStudy {
  Regime regime = Regime::HorizonToZero;
  std::vector<double> params;
  std::vector<SolveReport> members;
  SolveReport reference;
  std::vector<double> errors;      // L2 over the comparison region
  std::vector<double> energies;    // member energies
  std::vector<double> truncation;  // hinf only: change of the reference under half the padding
  double reference_norm = 0;
  double reference_energy = 0;
  double s_inf = -1;  // hinf only

  // every step err[i+1] <= (1 + slack) err[i]
  bool nonincreasing(double slack = 0.05) const;
  double final_ratio() const;
  std::string table_csv() const;
};

struct LocalizeSetup {
  Box box{};
  double h = 1.0 / 160;
  Tensor C = Tensor::iso(1, 1.0, 0.5);
  LoadFn f;
  SolverOptions solver{};
  double b0 = 0.5;  // plateau fraction of the truncated kernels
};

// base: compact kernel with unit support. Members: rescaled (c = delta^-n), zero
// outside the box; reference: P1 solve on the box. deltas strictly decreasing.
LimitStudy run_horizon_to_zero(const Kernel& base, const LocalizeSetup& S, const std::vector<double>& deltas);
// base: compact, profile positive on (0, 1]. Members: diverging rescaling; reference:
// pure power kernel of order s_inf on a grid padded by the largest member support.
LimitStudy run_horizon_to_infinity(const Kernel& base, const LocalizeSetup& S, const std::vector<double>& deltas);
// truncated fractional kernels of horizon delta, zero on both collars; reference:
// P1 solve on the box shrunk by delta. s_list strictly increasing, < 1.
LimitStudy run_s_to_one(double delta, const LocalizeSetup& S, const std::vector<double>& s_list);
// truncated fractional of order s with horizon delta, Neumann, load projected
// to compatibility; both sides compared after removing the mean over the box.
LimitStudy run_neumann_horizon_to_zero(double s, const LocalizeSetup& S, const std::vector<double>& deltas);

}  // namespace nlel
