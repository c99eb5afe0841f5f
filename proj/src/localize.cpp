#include "nlel/localize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <stdexcept>

namespace nlel {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::HorizonToZero: return "h0";
    case Regime::HorizonToInfinity: return "hinf";
    case Regime::SToOne: return "s1";
    case Regime::NeumannHorizonToZero: return "neumann-h0";
  }
  return "?";
}

Regime parse_regime(const std::string& s) {
  for (Regime r : {Regime::HorizonToZero, Regime::HorizonToInfinity, Regime::SToOne, Regime::NeumannHorizonToZero})
    if (s == regime_name(r)) return r;
  throw std::invalid_argument("unknown regime '" + s + "' (h0, hinf, s1, neumann-h0)");
}

bool LimitStudy::nonincreasing(double slack) const {
  for (std::size_t i = 1; i < errors.size(); ++i)
    if (errors[i] > (1 + slack) * errors[i - 1]) return false;
  return true;
}

double LimitStudy::final_ratio() const {
  if (errors.empty()) return 0;
  if (errors.front() == 0) return errors.back() == 0 ? 0 : INFINITY;
  return errors.back() / errors.front();
}

std::string LimitStudy::table_csv() const {
  const bool tr = !truncation.empty();
  std::string s = tr ? "parameter,L2_error,energy,iterations,truncation\n" : "parameter,L2_error,energy,iterations\n";
  char buf[160];
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d", params[i], errors[i], energies[i], members[i].iterations);
    s += buf;
    if (tr) {
      std::snprintf(buf, sizeof buf, ",%.17g", truncation[i]);
      s += buf;
    }
    s += '\n';
  }
  return s;
}

namespace {

void monotone(const std::vector<double>& p, bool increasing, const char* what) {
  if (p.empty()) throw std::invalid_argument(std::string(what) + ": empty parameter list");
  for (std::size_t i = 1; i < p.size(); ++i)
    if (increasing ? !(p[i] > p[i - 1]) : !(p[i] < p[i - 1]))
      throw std::invalid_argument(std::string(what) + ": parameters must be strictly " +
                                  (increasing ? "increasing" : "decreasing"));
}

Field load_on(const LocalizeSetup& S, std::shared_ptr<const Lattice> lat) {
  if (!S.f) return zeros(lat, Rank::Vector);
  return interpolate(lat, Rank::Vector, S.f);
}

// shrink (or grow, d < 0) the box on every side
Box shrink(const Box& b, double d) {
  Box out = b;
  for (int i = 0; i < b.n; ++i) {
    out.lo[i] += d;
    out.hi[i] -= d;
  }
  return out;
}

// smallest usable domain for a P1 reference on the box
Domain reference_domain(const Box& box, double h) { return build_domain(box, h, h); }

// trapezoid L2 over the closed box of `ref` of (u - r); u restricted onto the reference grid
double l2_diff(const Field& u, const Field& r, const Domain& ref) {
  const Field ur = restrict_to(u, ref.lat, true);
  double s = 0;
  for (int k = 0; k < ref.size(); ++k) {
    const double w = ref.omega_weight(k);
    if (w > 0) s += w * (ur.v.row(k) - r.v.row(k)).squaredNorm();
  }
  return std::sqrt(s);
}

double l2_norm(const Field& r, const Domain& ref) {
  double s = 0;
  for (int k = 0; k < ref.size(); ++k) s += ref.omega_weight(k) * r.v.row(k).squaredNorm();
  return std::sqrt(s);
}

// remove the (trapezoid) mean over the closed box, per component
Field zero_mean(const Field& u, const Domain& dom) {
  Field out = u;
  double vol = 0;
  Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(u.comps());
  for (int k = 0; k < dom.size(); ++k) {
    const double w = dom.omega_weight(k);
    vol += w;
    m += w * u.v.row(k);
  }
  m /= vol;
  for (int k = 0; k < dom.size(); ++k) out.v.row(k) -= m;
  return out;
}

// run the member solves concurrently, collect in order
template <class F>
std::vector<SolveReport> members(std::size_t count, F&& solve) {
  std::vector<std::future<SolveReport>> fut;
  for (std::size_t i = 0; i < count; ++i) fut.push_back(std::async(std::launch::async, solve, i));
  std::vector<SolveReport> out;
  for (auto& f : fut) out.push_back(f.get());
  return out;
}

}  // namespace

LimitStudy run_horizon_to_zero(const Kernel& base, const LocalizeSetup& S, const std::vector<double>& deltas) {
  monotone(deltas, false, "run_horizon_to_zero");
  if (!base.compact()) throw std::invalid_argument("run_horizon_to_zero: base kernel must have compact support");
  if (base.dim != S.box.n || S.C.n != S.box.n) throw std::invalid_argument("run_horizon_to_zero: dimension mismatch");
  LimitStudy st;
  st.regime = Regime::HorizonToZero;
  st.params = deltas;
  auto ref = std::make_shared<Domain>(reference_domain(S.box, S.h));
  st.reference = solve_local_oracle(*ref, S.C, load_on(S, ref->lat), LocalBC::Dirichlet, S.solver);
  st.reference_norm = l2_norm(st.reference.v, *ref);
  st.reference_energy = st.reference.energy;
  st.members = members(deltas.size(), [&](std::size_t i) {
    // base support scales to the horizon
    const double d = deltas[i];
    const Kernel k = rescale(base, d / base.support, RescaleMode::Vanishing);
    auto dom = std::make_shared<Domain>(build_domain(S.box, d, S.h));
    QuadOp op(k, dom);
    return solve_dirichlet(S.C, op, load_on(S, dom->lat), Constraint::ZeroOnComplement, S.solver);
  });
  for (const auto& m : st.members) {
    st.errors.push_back(l2_diff(m.v, st.reference.v, *ref));
    st.energies.push_back(m.energy);
  }
  return st;
}

LimitStudy run_horizon_to_infinity(const Kernel& base, const LocalizeSetup& S, const std::vector<double>& deltas) {
  monotone(deltas, true, "run_horizon_to_infinity");
  if (!base.compact()) throw std::invalid_argument("run_horizon_to_infinity: base kernel must have compact support");
  if (base.dim != S.box.n || S.C.n != S.box.n)
    throw std::invalid_argument("run_horizon_to_infinity: dimension mismatch");
  LimitStudy st;
  st.regime = Regime::HorizonToInfinity;
  st.params = deltas;
  st.s_inf = s_infinity(base);
  const double lo = std::min(base.s, base.t), hi = std::max(base.s, base.t);
  if (st.s_inf < lo - 1e-6 || st.s_inf > hi + 1e-6 || !(st.s_inf > 0 && st.s_inf < 1))
    throw HypothesisError("run_horizon_to_infinity: s_inf outside [t, s], the base kernel breaks the order bounds");
  // one padded grid for every member; the reference kernel is truncated at the grid edge
  const double pad = base.support * deltas.back();
  auto dom = std::make_shared<Domain>(build_domain_padded(S.box, S.h, S.h, pad));
  const Field f = load_on(S, dom->lat);
  const Kernel limit = make_power(base.dim, st.s_inf, 1.0);
  auto reference = [&](double p) {
    auto d = std::make_shared<Domain>(build_domain_padded(S.box, S.h, S.h, p));
    // interactions cut at the padding radius
    QuadOp op(limit, d, d->pad_layers);
    return solve_dirichlet(S.C, op, load_on(S, d->lat), Constraint::ZeroOnComplement, S.solver);
  };
  st.reference = reference(pad);
  const SolveReport half = reference(std::round(pad / 2 / S.h) * S.h);
  auto ref = std::make_shared<Domain>(reference_domain(S.box, S.h));
  const Field rv = restrict_to(st.reference.v, ref->lat, true);
  st.reference_norm = l2_norm(rv, *ref);
  st.reference_energy = st.reference.energy;
  const double tdiag = l2_diff(half.v, rv, *ref);
  st.members = members(deltas.size(), [&](std::size_t i) {
    const Kernel k = rescale(base, deltas[i], RescaleMode::Diverging);
    QuadOp op(k, dom);
    return solve_dirichlet(S.C, op, f, Constraint::ZeroOnComplement, S.solver);
  });
  for (const auto& m : st.members) {
    st.errors.push_back(l2_diff(m.v, rv, *ref));
    st.energies.push_back(m.energy);
    st.truncation.push_back(tdiag);
  }
  return st;
}

LimitStudy run_s_to_one(double delta, const LocalizeSetup& S, const std::vector<double>& s_list) {
  monotone(s_list, true, "run_s_to_one");
  if (!(s_list.front() > 0 && s_list.back() < 1)) throw std::invalid_argument("run_s_to_one: s must lie in (0,1)");
  if (S.C.n != S.box.n) throw std::invalid_argument("run_s_to_one: dimension mismatch");
  LimitStudy st;
  st.regime = Regime::SToOne;
  st.params = s_list;
  // the limit problem lives on the box shrunk by delta
  auto ref = std::make_shared<Domain>(reference_domain(shrink(S.box, delta), S.h));
  st.reference = solve_local_oracle(*ref, S.C, load_on(S, ref->lat), LocalBC::Dirichlet, S.solver);
  st.reference_norm = l2_norm(st.reference.v, *ref);
  st.reference_energy = st.reference.energy;
  auto dom = std::make_shared<Domain>(build_domain(S.box, delta, S.h));
  const Field f = load_on(S, dom->lat);
  st.members = members(s_list.size(), [&](std::size_t i) {
    QuadOp op(make_truncated_fractional(S.box.n, s_list[i], delta, S.b0), dom);
    return solve_dirichlet(S.C, op, f, Constraint::ZeroOnCollar, S.solver);
  });
  for (const auto& m : st.members) {
    st.errors.push_back(l2_diff(m.v, st.reference.v, *ref));
    st.energies.push_back(m.energy);
  }
  return st;
}

LimitStudy run_neumann_horizon_to_zero(double s, const LocalizeSetup& S, const std::vector<double>& deltas) {
  monotone(deltas, false, "run_neumann_horizon_to_zero");
  if (S.C.n != S.box.n) throw std::invalid_argument("run_neumann_horizon_to_zero: dimension mismatch");
  LimitStudy st;
  st.regime = Regime::NeumannHorizonToZero;
  st.params = deltas;
  auto ref = std::make_shared<Domain>(reference_domain(S.box, S.h));
  st.reference = solve_local_oracle(*ref, S.C, load_on(S, ref->lat), LocalBC::Neumann, S.solver);
  const Field rv = zero_mean(st.reference.v, *ref);
  st.reference_norm = l2_norm(rv, *ref);
  st.reference_energy = st.reference.energy;
  st.members = members(deltas.size(), [&](std::size_t i) {
    const double d = deltas[i];
    auto dom = std::make_shared<Domain>(build_domain(S.box, d, S.h));
    Field f = load_on(S, dom->lat);
    // the load lives on the inner region; whatever is left gets projected
    for (int k = 0; k < dom->size(); ++k)
      if (dom->region[k] != Region::Inner) f.v.row(k).setZero();
    QuadOp op(make_truncated_fractional(S.box.n, s, d, S.b0), dom);
    return solve_neumann(S.C, op, f, S.solver, true);
  });
  for (const auto& m : st.members) {
    const Field u = restrict_to(m.v, ref->lat, true);
    st.errors.push_back(l2_diff(zero_mean(u, *ref), rv, *ref));
    st.energies.push_back(m.energy);
  }
  return st;
}

}  // namespace nlel
