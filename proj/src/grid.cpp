#include "nlel/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace nlel {

namespace {

int as_multiple(double a, double h, const char* what) {
  const double q = a / h;
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-12 * std::max(1.0, std::abs(q)) + 1e-12)
    throw std::invalid_argument(std::string("build_domain: h does not divide ") + what);
  return static_cast<int>(r);
}

}  // namespace

const char* region_name(Region r) {
  switch (r) {
    case Region::Inner: return "inner";
    case Region::InnerCollar: return "inner_collar";
    case Region::Boundary: return "boundary";
    case Region::OuterCollar: return "outer_collar";
    case Region::Exterior: return "exterior";
  }
  return "?";
}

bool Domain::in_omega_closure(int k) const {
  auto ix = lat->index(k);
  for (int d = 0; d < lat->n; ++d)
    if (ix[d] < lo_idx[d] || ix[d] > hi_idx[d]) return false;
  return true;
}

double Domain::omega_weight(int k) const {
  if (!in_omega_closure(k)) return 0.0;
  auto ix = lat->index(k);
  double w = lat->cell_volume();
  for (int d = 0; d < lat->n; ++d)
    if (ix[d] == lo_idx[d] || ix[d] == hi_idx[d]) w *= 0.5;
  return w;
}

std::vector<int> Domain::nodes_where(const std::function<bool(Region)>& pred) const {
  std::vector<int> out;
  for (int k = 0; k < size(); ++k)
    if (pred(region[k])) out.push_back(k);
  return out;
}

std::array<int, 5> Domain::counts() const {
  std::array<int, 5> c{0, 0, 0, 0, 0};
  for (Region r : region) ++c[static_cast<int>(r)];
  return c;
}

Domain build_domain(const Box& box, double delta, double h, int collar_mult) {
  if (collar_mult < 1) throw std::invalid_argument("build_domain: collar multiplier must be >= 1");
  return build_domain_padded(box, delta, h, collar_mult * delta);
}

Domain build_domain_padded(const Box& box, double delta, double h, double pad) {
  const int n = box.n;
  if (n < 1 || n > 2) throw std::invalid_argument("build_domain: n must be 1 or 2");
  if (!(h > 0)) throw std::invalid_argument("build_domain: h must be positive");
  if (!(delta >= 0)) throw std::invalid_argument("build_domain: delta must be >= 0");
  if (delta > 0 && h > delta * (1 + 1e-12)) throw std::invalid_argument("build_domain: h must not exceed delta");
  Domain dom;
  dom.box = box;
  dom.delta = delta;
  dom.pad = pad;
  dom.layers = as_multiple(delta, h, "delta");
  dom.pad_layers = as_multiple(pad, h, "the padding");
  if (dom.pad_layers < dom.layers) throw std::invalid_argument("build_domain: padding smaller than the collar");
  auto lat = std::make_shared<Lattice>();
  lat->n = n;
  lat->h = h;
  std::array<int, 2> side{0, 0};
  for (int d = 0; d < n; ++d) {
    const double w = box.hi[d] - box.lo[d];
    if (!(w > 0)) throw std::invalid_argument("build_domain: empty box");
    side[d] = as_multiple(w, h, "the box side");
    if (!(2 * delta < w)) throw std::invalid_argument("build_domain: Omega_{-delta} is empty");
    lat->count[d] = side[d] + 2 * dom.pad_layers + 1;
    lat->origin[d] = box.lo[d] - dom.pad_layers * h;
    dom.lo_idx[d] = dom.pad_layers;
    dom.hi_idx[d] = dom.pad_layers + side[d];
  }
  dom.lat = lat;
  const int K = dom.layers;
  dom.region.resize(lat->size());
  bool any_inner = false;
  for (int k = 0; k < lat->size(); ++k) {
    auto ix = lat->index(k);
    long out2 = 0;
    int din = 1 << 30;
    bool on_bd = false, outside = false;
    for (int d = 0; d < n; ++d) {
      const int a = dom.lo_idx[d], b = dom.hi_idx[d];
      if (ix[d] < a) { out2 += long(a - ix[d]) * (a - ix[d]); outside = true; }
      else if (ix[d] > b) { out2 += long(ix[d] - b) * (ix[d] - b); outside = true; }
      else {
        din = std::min(din, std::min(ix[d] - a, b - ix[d]));
        if (ix[d] == a || ix[d] == b) on_bd = true;
      }
    }
    Region r;
    if (outside) r = (out2 <= long(K) * K) ? Region::OuterCollar : Region::Exterior;
    else if (on_bd) r = Region::Boundary;
    else if (din > K) r = Region::Inner;
    else r = Region::InnerCollar;
    if (r == Region::Inner) any_inner = true;
    dom.region[k] = r;
  }
  if (!any_inner) throw std::invalid_argument("build_domain: Omega_{-delta} has no nodes");
  return dom;
}

TorusGrid make_torus(int n, double L, int N) {
  if (N < 2 || (N & (N - 1))) throw std::invalid_argument("make_torus: N must be a power of two");
  if (!(L > 0)) throw std::invalid_argument("make_torus: period must be positive");
  auto lat = std::make_shared<Lattice>();
  lat->n = n;
  lat->h = L / N;
  lat->count = {N, n == 2 ? N : 1};
  lat->periodic = true;
  TorusGrid t;
  t.lat = lat;
  t.L = L;
  t.N = N;
  return t;
}

int rank_comps(Rank r, int n) {
  switch (r) {
    case Rank::Scalar: return 1;
    case Rank::Vector: return n;
    case Rank::Matrix: return n * n;
  }
  return 1;
}

Field zeros(std::shared_ptr<const Lattice> lat, Rank r) {
  Field f;
  f.rank = r;
  f.v = Eigen::MatrixXd::Zero(lat->size(), rank_comps(r, lat->n));
  f.lat = std::move(lat);
  return f;
}

Field interpolate(std::shared_ptr<const Lattice> lat, Rank r, const PointFn& fn) {
  Field f = zeros(lat, r);
  std::vector<double> out(f.comps());
  for (int k = 0; k < lat->size(); ++k) {
    double x[2] = {lat->x(k, 0), lat->n == 2 ? lat->x(k, 1) : 0.0};
    fn(x, out.data());
    for (int c = 0; c < f.comps(); ++c) {
      if (!std::isfinite(out[c])) throw std::runtime_error("interpolate: non-finite sample");
      f.v(k, c) = out[c];
    }
  }
  return f;
}

Field interpolate_scalar(std::shared_ptr<const Lattice> lat, const std::function<double(const double*)>& fn) {
  return interpolate(std::move(lat), Rank::Scalar, [&](const double* x, double* o) { o[0] = fn(x); });
}

void apply_constraint(Field& f, const Domain& dom, Constraint c) {
  for (int k = 0; k < dom.size(); ++k) {
    const Region r = dom.region[k];
    bool zero = false;
    if (c == Constraint::ZeroOnComplement) zero = !(r == Region::Inner || r == Region::InnerCollar);
    if (c == Constraint::ZeroOnCollar) zero = r != Region::Inner;
    if (zero) f.v.row(k).setZero();
  }
  f.tag = c;
}

bool satisfies_constraint(const Field& f, const Domain& dom) {
  for (int k = 0; k < dom.size(); ++k) {
    const Region r = dom.region[k];
    bool must = false;
    if (f.tag == Constraint::ZeroOnComplement) must = !(r == Region::Inner || r == Region::InnerCollar);
    if (f.tag == Constraint::ZeroOnCollar) must = r != Region::Inner;
    if (must && f.v.row(k).cwiseAbs().maxCoeff() != 0.0) return false;
  }
  return true;
}

void write_field_csv(const std::string& path, const Field& f) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot write " + path);
  const int n = f.n();
  std::fputs(n == 2 ? "x1,x2" : "x1", fp);
  for (int c = 0; c < f.comps(); ++c) std::fprintf(fp, ",c%d", c);
  std::fputc('\n', fp);
  for (int k = 0; k < f.lat->size(); ++k) {
    std::fprintf(fp, "%.17g", f.lat->x(k, 0));
    if (n == 2) std::fprintf(fp, ",%.17g", f.lat->x(k, 1));
    for (int c = 0; c < f.comps(); ++c) std::fprintf(fp, ",%.17g", f.v(k, c));
    std::fputc('\n', fp);
  }
  std::fclose(fp);
}

std::string domain_metadata_json(const Domain& dom, const Field* f) {
  nlohmann::json j;
  j["dim"] = dom.dim();
  j["box_lo"] = std::vector<double>(dom.box.lo.begin(), dom.box.lo.begin() + dom.dim());
  j["box_hi"] = std::vector<double>(dom.box.hi.begin(), dom.box.hi.begin() + dom.dim());
  j["delta"] = dom.delta;
  j["h"] = dom.h();
  j["pad"] = dom.pad;
  auto c = dom.counts();
  nlohmann::json m;
  for (int i = 0; i < 5; ++i) m[region_name(static_cast<Region>(i))] = c[i];
  j["mask_counts"] = m;
  if (f) {
    j["components"] = f->comps();
    const char* tags[] = {"free", "zero-on-complement", "zero-on-collar"};
    j["constraint"] = tags[static_cast<int>(f->tag)];
  }
  return j.dump(2);
}

}  // namespace nlel
