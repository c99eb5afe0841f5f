#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlel/elasticity.hpp"
#include "nlel/grid.hpp"
#include "nlel/kernel.hpp"
#include "nlel/solve.hpp"

namespace nlel {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct KernelSpec {
  std::string family = "truncated_fractional";  // fractional | truncated_fractional | constant | table
  int dim = 1;
  double s = 0.5;
  std::optional<double> t;  // table kernels: lower order (defaults to s)
  double delta = 0.25;      // horizon (truncated) or radius (constant)
  double b0 = 0.5;
  double amp = 1.0;         // extra factor on the profile; 1 keeps the normalization
  std::string table;        // CSV path for the table family
};

struct DomainSpec {
  std::vector<double> lo{0.0}, hi{1.0};
  int N = 256;  // cells along the first axis; h = (hi - lo)[0] / N
  int collar = 1;
  double h() const { return (hi[0] - lo[0]) / N; }
  Box box() const;
};

struct LoadSpec {
  std::vector<std::string> expr;  // one per component, or one for all
  std::string csv;
};

struct EringenSpec {
  std::vector<int> resolutions{128, 256, 512};
  int trials = 10;
};

struct LocalizeSpec {
  std::string regime = "h0";
  std::vector<double> params;  // empty: the regime's default list
  double delta = 0.1;          // s1: fixed horizon
  double s = 0.5;              // neumann-h0: fixed order
  int N = 0;                   // 0: regime default
};

struct VerifySpec {
  int korn_fields = 100;
  int poincare_fields = 50;
  int duality_pairs = 20;
  int korn_N = 32;  // 2-D torus side
};

struct RunConfig {
  KernelSpec kernel;
  DomainSpec domain;
  double mu = 1.0, lambda = 0.5;
  std::vector<double> c;  // general tensor (n^4), overrides mu/lambda
  LoadSpec load;
  SolverOptions solver;
  bool project_load = false;
  unsigned seed = 5;
  std::string output = "out";
  EringenSpec eringen;
  LocalizeSpec localize;
  VerifySpec verify;
  std::string canonical;  // normalized JSON of the input
  std::string hash;       // FNV-1a 64 of `canonical`, hex

  Tensor tensor() const;
  // the configured family in dimension n (n = 0: the configured dimension)
  Kernel make_kernel(int n = 0) const;
  // load on a lattice, vector rank (n components)
  Field load_field(std::shared_ptr<const Lattice> lat) const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::uint64_t fnv1a(const std::string& s);

// JSON writer with every float printed as %.17g
class JsonOut {
 public:
  JsonOut& key(const std::string& k);
  JsonOut& value(double v);
  JsonOut& value(long long v);
  JsonOut& value(int v) { return value(static_cast<long long>(v)); }
  JsonOut& value(bool v);
  JsonOut& value(const std::string& v);
  JsonOut& value(const char* v) { return value(std::string(v)); }
  JsonOut& value(const std::vector<double>& v);
  JsonOut& begin_object();
  JsonOut& end_object();
  JsonOut& begin_array();
  JsonOut& end_array();
  JsonOut& raw(const std::string& json);  // already-serialized value
  std::string str() const { return out_ + "\n"; }

 private:
  void comma();
  std::string out_;
  std::vector<bool> first_{true};
  bool after_key_ = false;
};

std::string format17(double v);

}  // namespace nlel
