#include "nlel/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace nlel {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

void run_fft(std::vector<std::complex<double>>& a, const Lattice& lat, int sign) {
  auto* p = reinterpret_cast<fftw_complex*>(a.data());
  fftw_plan plan = lat.n == 1 ? fftw_plan_dft_1d(lat.count[0], p, p, sign, FFTW_ESTIMATE)
                              : fftw_plan_dft_2d(lat.count[1], lat.count[0], p, p, sign, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

}  // namespace

SpectralOp::SpectralOp(Kernel k, TorusGrid t) : k_(std::move(k)), t_(std::move(t)) {
  if (k_.dim != t_.lat->n) throw std::invalid_argument("SpectralOp: kernel and torus dimension differ");
  const int N = t_.N;
  const int M = t_.lat->n == 2 ? N : 1;
  qh_.assign(static_cast<std::size_t>(N) * M, 0.0);
  // one evaluation per distinct |xi|^2 (integer units)
  std::map<long, double> cache;
  for (int i1 = 0; i1 < M; ++i1)
    for (int i0 = 0; i0 < N; ++i0) {
      const long a = i0 < N / 2 ? i0 : i0 - N;
      const long b = M == 1 ? 0 : (i1 < N / 2 ? i1 : i1 - N);
      const long key = a * a + b * b;
      auto it = cache.find(key);
      if (it == cache.end()) {
        const double xi = std::sqrt(double(key)) / t_.L;
        it = cache.emplace(key, q_hat(k_, xi)).first;
      }
      qh_[idx(i0, i1)] = it->second;
    }
}

std::vector<std::complex<double>> SpectralOp::fwd(const Eigen::VectorXd& col) const {
  std::vector<std::complex<double>> a(col.size());
  for (Eigen::Index i = 0; i < col.size(); ++i) a[i] = col[i];
  run_fft(a, *t_.lat, FFTW_FORWARD);
  return a;
}

Eigen::VectorXd SpectralOp::inv(std::vector<std::complex<double>> c) const {
  run_fft(c, *t_.lat, FFTW_BACKWARD);
  Eigen::VectorXd out(c.size());
  const double s = 1.0 / static_cast<double>(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real() * s;
  return out;
}

bool SpectralOp::nyquist(int i0, int i1) const {
  return i0 == t_.N / 2 || (t_.lat->n == 2 && i1 == t_.N / 2);
}

Eigen::VectorXd SpectralOp::deriv(const Eigen::VectorXd& col, int d, bool with_q) const {
  auto c = fwd(col);
  const int M = t_.lat->n == 2 ? t_.N : 1;
  for (int i1 = 0; i1 < M; ++i1)
    for (int i0 = 0; i0 < t_.N; ++i0) {
      const int k = idx(i0, i1);
      if (nyquist(i0, i1) || k == 0) {  // k == 0: Qhat(0) may be infinite
        c[k] = 0;
        continue;
      }
      const double xi = t_.freq(d == 0 ? i0 : i1);
      c[k] *= std::complex<double>(0, kTwoPi * xi) * (with_q ? qh_[k] : 1.0);
    }
  return inv(std::move(c));
}

Field SpectralOp::grad(const Field& u) const {
  if (u.rank == Rank::Matrix) throw std::invalid_argument("grad: matrix input");
  const int n = this->n();
  Field out = zeros(t_.lat, u.rank == Rank::Scalar ? Rank::Vector : Rank::Matrix);
  for (int i = 0; i < u.comps(); ++i)
    for (int d = 0; d < n; ++d) out.v.col(i * n + d) = deriv(u.v.col(i), d, true);
  return out;
}

Field SpectralOp::div(const Field& v) const {
  if (v.rank == Rank::Scalar) throw std::invalid_argument("div: scalar input");
  const int n = this->n();
  const int rows = v.rank == Rank::Vector ? 1 : n;
  Field out = zeros(t_.lat, v.rank == Rank::Vector ? Rank::Scalar : Rank::Vector);
  for (int i = 0; i < rows; ++i)
    for (int d = 0; d < n; ++d) out.v.col(i) += deriv(v.v.col(i * n + d), d, true);
  return out;
}

Field SpectralOp::sym_grad(const Field& v) const {
  if (v.rank != Rank::Vector) throw std::invalid_argument("sym_grad: vector input required");
  Field g = grad(v);
  const int n = this->n();
  Field out = g;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.v.col(i * n + j) = 0.5 * (g.v.col(i * n + j) + g.v.col(j * n + i));
  return out;
}

Field SpectralOp::laplacian(const Field& u) const {
  Field out = zeros(t_.lat, u.rank);
  const int M = t_.lat->n == 2 ? t_.N : 1;
  for (int c = 0; c < u.comps(); ++c) {
    auto a = fwd(u.v.col(c));
    for (int i1 = 0; i1 < M; ++i1)
      for (int i0 = 0; i0 < t_.N; ++i0) {
        const int k = idx(i0, i1);
        // same Nyquist convention as grad, so this is exactly -div grad
        double x0 = nyquist(i0, i1) ? 0.0 : t_.freq(i0);
        double x1 = (M == 1 || nyquist(i0, i1)) ? 0.0 : t_.freq(i1);
        const double m = k == 0 ? 0.0 : kTwoPi * kTwoPi * (x0 * x0 + x1 * x1) * qh_[k] * qh_[k];
        a[k] *= m;
      }
    out.v.col(c) = inv(std::move(a));
  }
  return out;
}

Field SpectralOp::q_translate(const Field& u) const {
  Field out = zeros(t_.lat, u.rank);
  for (int c = 0; c < u.comps(); ++c) {
    auto a = fwd(u.v.col(c));
    double scale = 0;
    for (auto& z : a) scale = std::max(scale, std::abs(z));
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (std::abs(a[k]) <= 1e-14 * scale) {
        a[k] = 0;
        continue;
      }
      if (!std::isfinite(qh_[k])) throw std::domain_error("q_translate: Qhat is not finite at an active frequency");
      a[k] *= qh_[k];
    }
    out.v.col(c) = inv(std::move(a));
  }
  return out;
}

Field SpectralOp::p_translate(const Field& v, double thresh) const {
  Field out = zeros(t_.lat, v.rank);
  for (int c = 0; c < v.comps(); ++c) {
    auto a = fwd(v.v.col(c));
    double scale = 0;
    for (auto& z : a) scale = std::max(scale, std::abs(z));
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (std::abs(a[k]) <= 1e-14 * scale) {
        a[k] = 0;
        continue;
      }
      if (std::abs(qh_[k]) < thresh)
        throw std::domain_error("p_translate: Qhat is " + std::to_string(qh_[k]) + " at an active frequency (mode " +
                                std::to_string(k) + ")");
      a[k] /= qh_[k];
    }
    out.v.col(c) = inv(std::move(a));
  }
  return out;
}

Field SpectralOp::local_grad(const Field& u) const {
  if (u.rank == Rank::Matrix) throw std::invalid_argument("local_grad: matrix input");
  const int n = this->n();
  Field out = zeros(t_.lat, u.rank == Rank::Scalar ? Rank::Vector : Rank::Matrix);
  for (int i = 0; i < u.comps(); ++i)
    for (int d = 0; d < n; ++d) out.v.col(i * n + d) = deriv(u.v.col(i), d, false);
  return out;
}

Field random_torus_field(const TorusGrid& t, Rank r, unsigned seed, int modes) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const int n = t.lat->n;
  Field f = zeros(t.lat, r);
  const double L = t.L;
  for (int c = 0; c < f.comps(); ++c) {
    for (int a = -modes; a <= modes; ++a)
      for (int b = (n == 2 ? -modes : 0); b <= (n == 2 ? modes : 0); ++b) {
        if (a == 0 && b == 0) continue;  // zero mean
        const double ca = nd(rng), sa = nd(rng);
        const double damp = 1.0 / (1.0 + a * a + b * b);
        for (int k = 0; k < t.lat->size(); ++k) {
          const double ph = kTwoPi * (a * t.lat->x(k, 0) + (n == 2 ? b * t.lat->x(k, 1) : 0.0)) / L;
          f.v(k, c) += damp * (ca * std::cos(ph) + sa * std::sin(ph));
        }
      }
  }
  return f;
}

KornReport korn_check(const SpectralOp& op, int count, unsigned seed, int modes) {
  KornReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) {
    Field v = random_torus_field(op.torus(), Rank::Vector, seed + 7919u * i, modes);
    const double full = op.grad(v).v.squaredNorm();
    const double sym = op.sym_grad(v).v.squaredNorm();
    rep.min_ratio = std::min(rep.min_ratio, sym / full);
    const double hn = op.torus().lat->cell_volume();
    rep.min_margin = std::min(rep.min_margin, hn * (sym - 0.5 * full));
    ++rep.trials;
  }
  return rep;
}

}  // namespace nlel
