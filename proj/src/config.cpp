#include "nlel/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nlel/expression.hpp"

namespace nlel {

using nlohmann::json;

namespace {

// reject anything outside the schema; every object goes through here
void only(const json& j, const char* where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(std::string(where) + ": unknown key '" + it.key() + "'");
}

template <class T>
void get(const json& j, const char* key, T& out, const char* where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + ": wrong type");
  }
}

void need(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Box DomainSpec::box() const {
  Box b;
  b.n = static_cast<int>(lo.size());
  for (int d = 0; d < b.n; ++d) {
    b.lo[d] = lo[d];
    b.hi[d] = hi[d];
  }
  return b;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: not valid JSON (") + e.what() + ")");
  }
  only(j, "config", {"kernel", "domain", "tensor", "load", "solver", "seed", "output", "eringen", "localize", "verify"});
  RunConfig c;
  if (j.contains("kernel")) {
    const json& k = j["kernel"];
    only(k, "kernel", {"family", "dim", "s", "t", "delta", "b0", "amp", "table"});
    get(k, "family", c.kernel.family, "kernel");
    get(k, "dim", c.kernel.dim, "kernel");
    get(k, "s", c.kernel.s, "kernel");
    if (k.contains("t")) {
      double t = 0;
      get(k, "t", t, "kernel");
      c.kernel.t = t;
    }
    get(k, "delta", c.kernel.delta, "kernel");
    get(k, "b0", c.kernel.b0, "kernel");
    get(k, "amp", c.kernel.amp, "kernel");
    get(k, "table", c.kernel.table, "kernel");
  }
  const std::set<std::string> families{"fractional", "truncated_fractional", "constant", "table"};
  need(families.count(c.kernel.family) > 0, "kernel.family: one of fractional, truncated_fractional, constant, table");
  need(c.kernel.dim == 1 || c.kernel.dim == 2, "kernel.dim: 1 or 2");
  need(c.kernel.family == "constant" || (c.kernel.s > 0 && c.kernel.s < 1), "kernel.s: must lie in (0,1)");
  need(c.kernel.delta > 0, "kernel.delta: must be positive");
  need(c.kernel.b0 > 0 && c.kernel.b0 < 1, "kernel.b0: must lie in (0,1)");
  need(c.kernel.amp > 0, "kernel.amp: must be positive");
  need(c.kernel.family != "table" || !c.kernel.table.empty(), "kernel.table: path required for the table family");

  const int n = c.kernel.dim;
  c.domain.lo.assign(n, 0.0);
  c.domain.hi.assign(n, 1.0);
  if (j.contains("domain")) {
    const json& d = j["domain"];
    only(d, "domain", {"lo", "hi", "N", "collar"});
    get(d, "lo", c.domain.lo, "domain");
    get(d, "hi", c.domain.hi, "domain");
    get(d, "N", c.domain.N, "domain");
    get(d, "collar", c.domain.collar, "domain");
  }
  need(static_cast<int>(c.domain.lo.size()) == n && static_cast<int>(c.domain.hi.size()) == n,
       "domain.lo/hi: one entry per dimension");
  for (int d = 0; d < n; ++d) need(c.domain.hi[d] > c.domain.lo[d], "domain: hi must exceed lo");
  need(c.domain.N > 0, "domain.N: must be positive");
  need(c.domain.collar >= 1, "domain.collar: must be >= 1");

  if (j.contains("tensor")) {
    const json& t = j["tensor"];
    only(t, "tensor", {"mu", "lambda", "c"});
    get(t, "mu", c.mu, "tensor");
    get(t, "lambda", c.lambda, "tensor");
    get(t, "c", c.c, "tensor");
    need(c.c.empty() || static_cast<int>(c.c.size()) == n * n * n * n, "tensor.c: n^4 entries");
  }
  if (j.contains("load")) {
    const json& l = j["load"];
    only(l, "load", {"expr", "csv"});
    if (l.contains("expr")) {
      if (l["expr"].is_string()) c.load.expr = {l["expr"].get<std::string>()};
      else get(l, "expr", c.load.expr, "load");
    }
    get(l, "csv", c.load.csv, "load");
    need(c.load.expr.empty() || c.load.csv.empty(), "load: give expr or csv, not both");
    need(c.load.expr.size() <= 1 || static_cast<int>(c.load.expr.size()) == n, "load.expr: one or n expressions");
    for (const auto& e : c.load.expr) {
      try {
        need(Expression(e).max_coord() <= n, "load.expr: coordinate beyond the dimension in '" + e + "'");
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("load.expr: ") + ex.what());
      }
    }
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    only(s, "solver", {"tol", "max_iter", "precond", "project_load"});
    get(s, "tol", c.solver.tol, "solver");
    get(s, "max_iter", c.solver.max_iter, "solver");
    get(s, "precond", c.solver.diagonal_precond, "solver");
    get(s, "project_load", c.project_load, "solver");
  }
  need(c.solver.tol > 0 && c.solver.max_iter > 0, "solver: tol and max_iter must be positive");
  get(j, "seed", c.seed, "config");
  get(j, "output", c.output, "config");
  if (j.contains("eringen")) {
    const json& e = j["eringen"];
    only(e, "eringen", {"resolutions", "trials"});
    get(e, "resolutions", c.eringen.resolutions, "eringen");
    get(e, "trials", c.eringen.trials, "eringen");
  }
  need(!c.eringen.resolutions.empty() && c.eringen.trials > 0, "eringen: resolutions and trials required");
  if (j.contains("localize")) {
    const json& l = j["localize"];
    only(l, "localize", {"regime", "params", "delta", "s", "N"});
    get(l, "regime", c.localize.regime, "localize");
    get(l, "params", c.localize.params, "localize");
    get(l, "delta", c.localize.delta, "localize");
    get(l, "s", c.localize.s, "localize");
    get(l, "N", c.localize.N, "localize");
  }
  if (j.contains("verify")) {
    const json& v = j["verify"];
    only(v, "verify", {"korn_fields", "poincare_fields", "duality_pairs", "korn_N"});
    get(v, "korn_fields", c.verify.korn_fields, "verify");
    get(v, "poincare_fields", c.verify.poincare_fields, "verify");
    get(v, "duality_pairs", c.verify.duality_pairs, "verify");
    get(v, "korn_N", c.verify.korn_N, "verify");
  }
  c.canonical = j.dump();  // object keys come out sorted
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(c.canonical)));
  c.hash = buf;
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Tensor RunConfig::tensor() const {
  const int n = kernel.dim;
  return c.empty() ? Tensor::iso(n, mu, lambda) : Tensor::general(n, c);
}

Kernel RunConfig::make_kernel(int n) const {
  if (n == 0) n = kernel.dim;
  Kernel k;
  if (kernel.family == "fractional") k = make_fractional(n, kernel.s);
  else if (kernel.family == "truncated_fractional") k = make_truncated_fractional(n, kernel.s, kernel.delta, kernel.b0);
  else if (kernel.family == "constant") k = make_constant(n, kernel.delta);
  else k = load_table_csv(n, kernel.table, kernel.s, kernel.t.value_or(kernel.s));
  if (kernel.amp != 1.0) {
    k.amp *= kernel.amp;
    k.normalized = false;
  }
  return k;
}

Field RunConfig::load_field(std::shared_ptr<const Lattice> lat) const {
  const int n = lat->n;
  Field f = zeros(lat, Rank::Vector);
  if (!load.expr.empty()) {
    std::vector<Expression> ex;
    for (const auto& e : load.expr) ex.emplace_back(e);
    return interpolate(lat, Rank::Vector, [&](const double* x, double* out) {
      for (int c = 0; c < n; ++c) out[c] = ex[ex.size() == 1 ? 0 : c](x);
    });
  }
  if (load.csv.empty()) return f;
  // columns x1[,x2],c0..: values land on the nodes with matching coordinates
  std::ifstream in(load.csv);
  if (!in) throw ConfigError("cannot read load " + load.csv);
  std::string line;
  std::getline(in, line);  // header
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      v.push_back(std::strtod(cell.c_str(), &end));
      if (end == cell.c_str()) throw ConfigError(load.csv + ": bad number on line " + std::to_string(row));
    }
    if (static_cast<int>(v.size()) != 2 * n) throw ConfigError(load.csv + ": expected coordinates and n values per line");
    std::array<int, 2> ix{0, 0};
    bool hit = true;
    for (int d = 0; d < n; ++d) {
      const double q = (v[d] - lat->origin[d]) / lat->h;
      ix[d] = static_cast<int>(std::lround(q));
      if (std::abs(q - ix[d]) > 1e-6 || ix[d] < 0 || ix[d] >= lat->count[d]) hit = false;
    }
    if (!hit) throw ConfigError(load.csv + ": line " + std::to_string(row) + " is not a grid node");
    for (int c = 0; c < n; ++c) f.v(lat->flat(ix[0], ix[1]), c) = v[n + c];
  }
  return f;
}

std::string format17(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void JsonOut::comma() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (!first_.back()) out_ += ',';
  first_.back() = false;
}

JsonOut& JsonOut::key(const std::string& k) {
  comma();
  out_ += json(k).dump() + ':';
  after_key_ = true;
  return *this;
}

JsonOut& JsonOut::value(double v) {
  comma();
  out_ += format17(v);
  return *this;
}

JsonOut& JsonOut::value(long long v) {
  comma();
  out_ += std::to_string(v);
  return *this;
}

JsonOut& JsonOut::value(bool v) {
  comma();
  out_ += v ? "true" : "false";
  return *this;
}

JsonOut& JsonOut::value(const std::string& v) {
  comma();
  out_ += json(v).dump();
  return *this;
}

JsonOut& JsonOut::value(const std::vector<double>& v) {
  begin_array();
  for (double x : v) value(x);
  return end_array();
}

JsonOut& JsonOut::raw(const std::string& s) {
  comma();
  out_ += s;
  return *this;
}

JsonOut& JsonOut::begin_object() {
  comma();
  out_ += '{';
  first_.push_back(true);
  return *this;
}

JsonOut& JsonOut::end_object() {
  out_ += '}';
  first_.pop_back();
  return *this;
}

JsonOut& JsonOut::begin_array() {
  comma();
  out_ += '[';
  first_.push_back(true);
  return *this;
}

JsonOut& JsonOut::end_array() {
  out_ += ']';
  first_.pop_back();
  return *this;
}

}  // namespace nlel
