#include "nlel/verify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nlel/eringen.hpp"
#include "nlel/errors.hpp"

namespace nlel {

namespace {

// smooth bump with support [c - w, c + w] per axis
struct Bump {
  std::array<double, 2> c{0, 0}, w{1, 1};
  double amp = 1;
  int n = 1;
  double operator()(const double* x) const {
    double p = amp;
    for (int d = 0; d < n; ++d) {
      const double t = (x[d] - c[d]) / w[d];
      if (std::abs(t) >= 1) return 0.0;
      p *= std::exp(1.0 - 1.0 / (1.0 - t * t));
    }
    return p;
  }
};

Bump random_bump(const Box& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Bump b;
  b.n = box.n;
  for (int d = 0; d < box.n; ++d) {
    const double L = box.hi[d] - box.lo[d];
    b.w[d] = L * (0.15 + 0.2 * U(rng));
    b.c[d] = box.lo[d] + b.w[d] + (L - 2 * b.w[d]) * U(rng);
  }
  b.amp = 2 * U(rng) - 1;
  return b;
}

Field transpose(const Field& m) {
  const int n = m.n();
  Field t = m;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.v.col(i * n + j) = m.v.col(j * n + i);
  return t;
}

Field trace(const Field& m) {
  const int n = m.n();
  Field t = zeros(m.lat, Rank::Scalar);
  for (int i = 0; i < n; ++i) t.v.col(0) += m.v.col(i * n + i);
  return t;
}

double max_on(const Eigen::MatrixXd& a, const std::vector<char>& rows) {
  double m = 0;
  for (int k = 0; k < a.rows(); ++k)
    if (rows[k]) m = std::max(m, a.row(k).cwiseAbs().maxCoeff());
  return m;
}

Check make_check(std::string name, double value, double threshold, std::string note = "") {
  Check c{std::move(name), value, threshold, std::isfinite(value) && value <= threshold, std::move(note)};
  return c;
}

Check skipped(std::string name, std::string why) { return Check{std::move(name), 0, 0, true, "skipped: " + why}; }

}  // namespace

double affine_error(const QuadOp& op, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int n = op.n();
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  double b[2] = {0, 0};
  for (int i = 0; i < n; ++i) {
    b[i] = U(rng);
    for (int j = 0; j < n; ++j) A(i, j) = U(rng);
  }
  const Field v = interpolate(op.lattice_ptr(), Rank::Vector, [&](const double* x, double* o) {
    for (int i = 0; i < n; ++i) {
      o[i] = b[i];
      for (int j = 0; j < n; ++j) o[i] += A(i, j) * x[j];
    }
  });
  Field g = op.grad(v);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.v.col(i * n + j).array() -= A(i, j);
  return max_on(g.v, op.complete_rows());
}

double adjoint_defect(const QuadOp& op) {
  double m = 0;
  for (int d = 0; d < op.n(); ++d) {
    const SpMat G = op.grad_matrix(d);
    const SpMat D = op.div_matrix(d);
    const SpMat sum = D + SpMat(G.transpose());
    for (int k = 0; k < sum.outerSize(); ++k)
      for (SpMat::InnerIterator it(sum, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

double duality_quadrature_residual(const Kernel& k, const Box& box, double h, int pairs, unsigned seed) {
  if (!k.compact()) throw std::invalid_argument("duality_quadrature_residual: compact kernel required");
  const int n = k.dim;
  // trapezoid nodes over box + support (beyond that D u and div v vanish)
  std::array<int, 2> cnt{1, 1};
  std::array<double, 2> lo{0, 0};
  for (int d = 0; d < n; ++d) {
    lo[d] = box.lo[d] - k.support;
    cnt[d] = static_cast<int>(std::ceil((box.hi[d] - box.lo[d] + 2 * k.support) / h)) + 1;
  }
  std::mt19937_64 rng(seed);
  double worst = 0;
  for (int p = 0; p < pairs; ++p) {
    const Bump u = random_bump(box, rng);
    std::array<Bump, 2> v{random_bump(box, rng), random_bump(box, rng)};
    double I1 = 0, I2 = 0;
    for (int j = 0; j < cnt[1]; ++j)
      for (int i = 0; i < cnt[0]; ++i) {
        const double x[2] = {lo[0] + i * h, lo[1] + j * h};
        const auto g = direct::grad(k, u, x);
        const double dv = direct::div(k, [&](const double* y, double* o) {
          for (int d = 0; d < n; ++d) o[d] = v[d](y);
        }, x);
        for (int d = 0; d < n; ++d) I1 += g[d] * v[d](x);
        I2 += u(x) * dv;
      }
    const double scale = std::max(std::abs(I1), std::abs(I2));
    if (scale > 0) worst = std::max(worst, std::abs(I1 + I2) / scale);
  }
  return worst;
}

double trace_defect(const QuadOp& op, unsigned seed) {
  const Box& box = op.domain() ? op.domain()->box : Box{op.n(), {0, 0}, {1, 1}};
  const Field v = random_bump_field(op.lattice_ptr(), box, seed);
  const Field t = trace(op.sym_grad(v));
  const Field d = op.div(v);
  return (t.v - d.v).cwiseAbs().maxCoeff();
}

double trace_defect(const SpectralOp& op, unsigned seed) {
  const Field v = random_torus_field(op.torus(), Rank::Vector, seed, 6);
  return (trace(op.sym_grad(v)).v - op.div(v).v).cwiseAbs().maxCoeff();
}

double grad_div_defect(const SpectralOp& op, unsigned seed) {
  const Field v = random_torus_field(op.torus(), Rank::Vector, seed, 6);
  const Field lhs = op.div(transpose(op.grad(v)));
  const Field rhs = op.grad(op.div(v));
  return (lhs.v - rhs.v).norm() / rhs.v.norm();
}

double laplacian_composition_defect(const SpectralOp& op, unsigned seed) {
  const Field u = random_torus_field(op.torus(), Rank::Scalar, seed, 6);
  const Field L = op.laplacian(u);
  const Field c = op.div(op.grad(u));
  return (L.v + c.v).norm() / L.v.norm();
}

double leibniz_defect(const QuadOp& op, unsigned seed) {
  const int n = op.n();
  const Box box = op.domain()->box;
  const Field phi0 = random_bump_field(op.lattice_ptr(), box, seed);
  Field phi = zeros(op.lattice_ptr(), Rank::Scalar);
  phi.v.col(0) = phi0.v.col(0);
  const Field Phi = random_bump_field(op.lattice_ptr(), box, seed + 1);
  Field prod = Phi;
  for (int c = 0; c < n; ++c) prod.v.col(c) = Phi.v.col(c).cwiseProduct(phi.v.col(0));
  const Field a = op.div(prod);
  const Field b = op.div(Phi);
  const Field K = op.leibniz_remainder(phi, Phi);
  const Eigen::MatrixXd r = a.v - b.v.cwiseProduct(phi.v) - K.v;
  const auto rows = op.complete_rows();
  const double scale = max_on(a.v, rows);
  return scale > 0 ? max_on(r, rows) / scale : max_on(r, rows);
}

double leibniz_defect_direct(const Kernel& k, int points, unsigned seed) {
  if (k.dim != 1) throw std::invalid_argument("leibniz_defect_direct: 1-D kernels");
  std::mt19937_64 rng(seed);
  const Box box{1, {0, 0}, {1, 1}};
  const Bump phi = random_bump(box, rng), Phi = random_bump(box, rng);
  auto vec = [&](const double* y, double* o) { o[0] = Phi(y); };
  auto prod = [&](const double* y, double* o) { o[0] = phi(y) * Phi(y); };
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0, scale = 0;
  for (int i = 0; i < points; ++i) {
    const double x[1] = {U(rng)};
    const double a = direct::div(k, prod, x);
    const double r = a - phi(x) * direct::div(k, vec, x) - direct::leibniz(k, phi, vec, x);
    worst = std::max(worst, std::abs(r));
    scale = std::max(scale, std::abs(a));
  }
  return scale > 0 ? worst / scale : worst;
}

namespace {

// exact sup ||u|| / ||D u|| over fields on the open box, and the operator for sampling
double poincare_constant(const Kernel& k, const Box& box, int N, std::shared_ptr<Domain>* keep = nullptr,
                         std::vector<int>* dofs_out = nullptr, std::unique_ptr<QuadOp>* op_out = nullptr) {
  const double h = (box.hi[0] - box.lo[0]) / N;
  auto dom = std::make_shared<Domain>(build_domain(box, k.support, h));
  auto op = std::make_unique<QuadOp>(k, dom);
  const auto dofs = dom->nodes_where([](Region r) { return r == Region::Inner || r == Region::InnerCollar; });
  std::vector<int> rows(dom->size());
  for (int i = 0; i < dom->size(); ++i) rows[i] = i;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dofs.size(), dofs.size());
  for (int d = 0; d < k.dim; ++d) {
    const Eigen::MatrixXd G = Eigen::MatrixXd(op->grad_matrix(d, rows, dofs));
    M += G.transpose() * G;
  }
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (keep) *keep = dom;
  if (dofs_out) *dofs_out = dofs;
  if (op_out) *op_out = std::move(op);
  return lmin > 0 ? 1.0 / std::sqrt(lmin) : INFINITY;
}

}  // namespace

PoincareResult poincare_check(const Kernel& k, const Box& box, int N, int fields, unsigned seed) {
  if (!k.compact()) throw std::invalid_argument("poincare_check: compact kernel required");
  PoincareResult res;
  std::shared_ptr<Domain> dom;
  std::vector<int> dofs;
  std::unique_ptr<QuadOp> op;
  res.C = poincare_constant(k, box, N, &dom, &dofs, &op);
  res.C_coarse = poincare_constant(k, box, N / 2);
  for (int i = 0; i < fields; ++i) {
    const Field b = random_bump_field(dom->lat, box, seed + i);
    Field u = zeros(dom->lat, Rank::Scalar);
    for (int j : dofs) u.v(j, 0) = b.v(j, 0);
    const double gu = op->grad(u).v.norm();
    if (gu > 0) res.sampled_max = std::max(res.sampled_max, u.v.norm() / gu);
  }
  return res;
}

double fourier_scaling_defect(const Kernel& k, const std::vector<double>& deltas, const std::vector<double>& xis) {
  double worst = 0;
  for (double d : deltas) {
    const Kernel kd = rescale(k, d, RescaleMode::Vanishing);
    for (double xi : xis) {
      const double a = q_hat_quadrature(kd, xi), b = q_hat_quadrature(k, d * xi);
      worst = std::max(worst, std::abs(a - b) / std::abs(b));
    }
  }
  return worst;
}

double fractional_multiplier_defect(double s, const std::vector<double>& xis) {
  const Kernel k = make_fractional(1, s);
  double worst = 0;
  for (double xi : xis) {
    const double ref = std::pow(2 * std::numbers::pi * xi, s - 1);
    worst = std::max(worst, std::abs(q_hat_quadrature(k, xi) - ref) / ref);
  }
  return worst;
}

bool VerifyReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string VerifyReport::json(const RunConfig& cfg) const {
  JsonOut j;
  j.begin_object();
  j.key("config_hash").value(cfg.hash);
  j.key("subcommand").value("verify");
  j.key("pass").value(ok());
  j.key("checks").begin_array();
  for (const Check& c : checks) {
    j.begin_object();
    j.key("name").value(c.name);
    j.key("value").value(c.value);
    j.key("threshold").value(c.threshold);
    j.key("pass").value(c.pass);
    if (!c.note.empty()) j.key("note").value(c.note);
    j.end_object();
  }
  j.end_array();
  j.end_object();
  return j.str();
}

void hypothesis_gate(const RunConfig& cfg) {
  const Ellipticity el = strong_ellipticity(cfg.tensor());
  if (!el.ok) throw HypothesisError("tensor is not strongly elliptic (min(mu, 2mu + lambda) = " + format17(el.margin) + ")");
  const Kernel k = cfg.make_kernel();
  const double eps = k.compact() ? 0.5 * k.support * cfg.kernel.b0 : 0.5;
  const HypothesisReport hr = check_hypotheses(k, eps, 20);
  if (!hr.all())
    throw HypothesisError(std::string("kernel hypotheses fail:") + (hr.h1 ? "" : " H1") + (hr.h2 ? "" : " H2") +
                          (hr.h3 ? "" : " H3") + (hr.h4 ? "" : " H4"));
}

VerifyReport verify_suite(const RunConfig& cfg) {
  // nothing runs on a tensor or kernel outside the theory
  hypothesis_gate(cfg);
  const Tensor C = cfg.tensor();
  const Kernel k = cfg.make_kernel();

  VerifyReport rep;
  const unsigned seed = cfg.seed;
  const Box box = cfg.domain.box();
  const int n = k.dim;
  const int N = cfg.domain.N;
  const double h = cfg.domain.h();
  if (k.compact()) {
    auto dom = std::make_shared<Domain>(build_domain(box, k.support, h, 2));
    QuadOp op(k, dom);
    rep.checks.push_back(make_check("affine_exactness", affine_error(op, seed), 1e-5));
    rep.checks.push_back(make_check("adjointness", adjoint_defect(op), 1e-14));
    if (n == 1) {
      const double hc = std::min(h, k.support / 128);  // trapezoid on smooth bumps converges fast
      rep.checks.push_back(
          make_check("duality_quadrature", duality_quadrature_residual(k, box, hc, cfg.verify.duality_pairs, seed), 1e-6));
    } else {
      rep.checks.push_back(skipped("duality_quadrature", "1-D check"));
    }
    rep.checks.push_back(make_check("trace_identity", trace_defect(op, seed), 1e-12));
    Field v = random_bump_field(dom->lat, box, seed + 2);
    rep.checks.push_back(make_check("grad_div_quadrature", grad_div_identity_check(op, v), 1e-5));
    rep.checks.push_back(make_check("leibniz_discrete", leibniz_defect(op, seed), 1e-12));
    if (n == 1) rep.checks.push_back(make_check("leibniz_direct", leibniz_defect_direct(k, 5, seed), 1e-6));
    const PoincareResult pr = poincare_check(k, box, N, cfg.verify.poincare_fields, seed);
    Check pc = make_check("poincare_ratio", pr.C, 2 * pr.C_coarse, "C at N/2 = " + format17(pr.C_coarse) +
                                                                        ", largest sampled ratio = " + format17(pr.sampled_max));
    pc.pass = pr.bounded();
    rep.checks.push_back(pc);
    rep.checks.push_back(make_check("fourier_scaling", fourier_scaling_defect(k, {0.5, 2.0}, {0.5, 1.0, 2.0}), 1e-6));
  } else {
    for (const char* c : {"affine_exactness", "adjointness", "duality_quadrature", "trace_identity",
                          "grad_div_quadrature", "leibniz_discrete", "poincare_ratio", "fourier_scaling"})
      rep.checks.push_back(skipped(c, "quadrature checks need a compact kernel"));
  }
  if (cfg.kernel.family == "fractional" || cfg.kernel.family == "truncated_fractional")
    rep.checks.push_back(make_check("fractional_multiplier",
                                    fractional_multiplier_defect(cfg.kernel.s, {0.1, 0.3, 1.0, 3.0, 10.0}), 1e-4));
  {
    const double L = box.hi[0] - box.lo[0];
    SpectralOp sp(k, make_torus(n, L, n == 1 ? N : std::min(N, 64)));
    rep.checks.push_back(make_check("trace_identity_spectral", trace_defect(sp, seed), 1e-12));
    rep.checks.push_back(make_check("grad_div_spectral", grad_div_defect(sp, seed), 1e-12));
    rep.checks.push_back(make_check("laplacian_composition", laplacian_composition_defect(sp, seed), 1e-12));
  }
  {
    const int kn = cfg.verify.korn_N;
    SpectralOp sp(cfg.make_kernel(2), make_torus(2, 1.0, kn));
    const KornReport kr = korn_check(sp, cfg.verify.korn_fields, seed);
    rep.checks.push_back(make_check("korn_ratio", -kr.min_margin, 1e-9,
                                    "2-D torus, min ||Dsym v||^2 / ||D v||^2 = " + format17(kr.min_ratio)));
  }
  if (n == 1 && k.compact()) {
    const FormComparison fc = eringen_study(k, C, box, {N}, 1, seed);
    Check ec = make_check("eringen_scalar_identity", fc.scalar_identity[0], 1e-2);
    ec.pass = ec.pass && fc.mercer_ok;
    ec.note = "mercer min " + format17(fc.mercer_min[0]);
    rep.checks.push_back(ec);
  } else {
    rep.checks.push_back(skipped("eringen_scalar_identity", "1-D compact kernels"));
  }
  return rep;
}

}  // namespace nlel
