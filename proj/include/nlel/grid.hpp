#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace nlel {

// uniform tensor grid, n <= 2; node k <-> (i0, i1) with k = i0 + count[0]*i1
struct Lattice {
  int n = 1;
  std::array<int, 2> count{1, 1};
  double h = 1.0;
  std::array<double, 2> origin{0.0, 0.0};
  bool periodic = false;

  int size() const { return count[0] * (n == 2 ? count[1] : 1); }
  std::array<int, 2> index(int k) const { return {k % count[0], n == 2 ? k / count[0] : 0}; }
  int flat(int i0, int i1) const { return i0 + count[0] * i1; }
  double x(int k, int d) const { return origin[d] + h * index(k)[d]; }
  double cell_volume() const { return n == 2 ? h * h : h; }
};

enum class Region : unsigned char { Inner, InnerCollar, Boundary, OuterCollar, Exterior };
const char* region_name(Region r);

struct Box {
  int n = 1;
  std::array<double, 2> lo{0.0, 0.0}, hi{1.0, 1.0};
};

struct Domain {
  std::shared_ptr<const Lattice> lat;
  Box box;
  double delta = 0.0;
  double pad = 0.0;
  int layers = 0;      // delta / h
  int pad_layers = 0;  // pad / h
  std::array<int, 2> lo_idx{0, 0}, hi_idx{0, 0};
  std::vector<Region> region;

  int size() const { return lat->size(); }
  double h() const { return lat->h; }
  int dim() const { return lat->n; }
  // node inside the closed box
  bool in_omega_closure(int k) const;
  // node in Omega_delta (closure), i.e. not Exterior
  bool in_omega_delta(int k) const { return region[k] != Region::Exterior; }
  // trapezoid weight for integrals over the closed box (0 outside)
  double omega_weight(int k) const;
  std::vector<int> nodes_where(const std::function<bool(Region)>& pred) const;
  std::array<int, 5> counts() const;
};

// grid covers Omega + collar_mult * delta on every side
Domain build_domain(const Box& box, double delta, double h, int collar_mult = 1);
// grid covers Omega + pad; masks still use delta
Domain build_domain_padded(const Box& box, double delta, double h, double pad);

struct TorusGrid {
  std::shared_ptr<const Lattice> lat;
  double L = 1.0;
  int N = 0;
  double freq(int i) const { return (i < N / 2 ? i : i - N) / L; }
};

TorusGrid make_torus(int n, double L, int N);

enum class Rank { Scalar, Vector, Matrix };
enum class Constraint { Free, ZeroOnComplement, ZeroOnCollar };

struct Field {
  std::shared_ptr<const Lattice> lat;
  Rank rank = Rank::Scalar;
  Eigen::MatrixXd v;  // rows = nodes, cols = components (matrix: i*n + j)
  Constraint tag = Constraint::Free;

  int comps() const { return static_cast<int>(v.cols()); }
  int n() const { return lat->n; }
};

int rank_comps(Rank r, int n);
Field zeros(std::shared_ptr<const Lattice> lat, Rank r);

using PointFn = std::function<void(const double* x, double* out)>;
Field interpolate(std::shared_ptr<const Lattice> lat, Rank r, const PointFn& fn);
Field interpolate_scalar(std::shared_ptr<const Lattice> lat, const std::function<double(const double*)>& fn);

// zero the nodes excluded by the tag and record it
void apply_constraint(Field& f, const Domain& dom, Constraint c);
bool satisfies_constraint(const Field& f, const Domain& dom);

void write_field_csv(const std::string& path, const Field& f);
std::string domain_metadata_json(const Domain& dom, const Field* f = nullptr);

}  // namespace nlel
