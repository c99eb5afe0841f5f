#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "gen.hpp"
#include "nlel/eringen.hpp"

using namespace nlel;

namespace {

std::shared_ptr<Domain> unit_domain(int cells, double delta) {
  const double h = 1.0 / cells;
  return std::make_shared<Domain>(build_domain(Box{1, {0, 0}, {1, 1}}, delta, h, 2));
}

}  // namespace

TEST(Eringen, KernelVanishesBeyondTwiceTheSupport) {
  const Kernel k = make_truncated_fractional(1, 0.3, 0.25, 0.5);
  const EringenKernel A = build_eringen_kernel(k);
  EXPECT_NEAR(A.support, 0.5, 1e-14);
  for (double r : {0.5, 0.51, 0.8, 3.0}) EXPECT_EQ(A(r), 0.0);
  EXPECT_GT(A(0.49), 0.0);
}

TEST(Eringen, FiniteAtTheOriginBelowOneHalf) {
  for (double s : {0.1, 0.3, 0.45}) {
    const EringenKernel A = build_eringen_kernel(make_truncated_fractional(1, s, 0.25, 0.5));
    EXPECT_TRUE(std::isfinite(A.exact(0.0))) << s;
    EXPECT_GT(A.exact(0.0), 0.0);
  }
}

TEST(Eringen, TableMatchesDirectConvolution) {
  gen::Gen g(61);
  for (double s : {0.3, 0.5, 0.7}) {
    const EringenKernel A = build_eringen_kernel(make_truncated_fractional(1, s, 0.25, 0.5));
    for (int t = 0; t < gen::kCases; ++t) {
      const double r = g.log_uniform(1e-3, 0.49);
      const double e = A.exact(r);
      EXPECT_NEAR(A(r), e, 1e-6 * std::abs(e)) << s << " " << r;
    }
  }
}

TEST(Eringen, SelfConvolutionFromIndependentQuadrature) {
  // Atilde(r) = int Q(y) Q(r - y) dy over the real line, Q even
  const Kernel k = make_truncated_fractional(1, 0.3, 0.25, 0.5);
  const EringenKernel A = build_eringen_kernel(k);
  const PotentialPieces Q = q_pieces(k);
  auto q = [&](double x) { return std::abs(x) >= 0.25 ? 0.0 : Q(std::abs(x)); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  // each panel is split in half and graded towards both ends (y = a + l u^4), which
  // flattens the r^-s singularities of Q at 0 and the kinks at the plateau edge
  auto panel = [](auto f, double a, double b) {
    const double m = 0.5 * (a + b), l = m - a;
    auto left = [&](double u) { return 4 * l * u * u * u * f(a + l * u * u * u * u); };
    auto right = [&](double u) { return 4 * l * u * u * u * f(b - l * u * u * u * u); };
    return GK::integrate(left, 0.0, 1.0, 10, 1e-14) + GK::integrate(right, 0.0, 1.0, 10, 1e-14);
  };
  for (double r : {0.05, 0.2, 0.4}) {
    std::vector<double> pts;
    for (double c : {0.0, r})
      for (double o : {-0.25, -0.125, 0.0, 0.125, 0.25}) pts.push_back(c + o);
    std::sort(pts.begin(), pts.end());
    double sum = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      if (pts[i + 1] - pts[i] > 1e-14) sum += panel([&](double y) { return q(y) * q(r - y); }, pts[i], pts[i + 1]);
    EXPECT_NEAR(A.exact(r), sum, 1e-7 * sum) << r;
  }
}

TEST(Eringen, FourierTransformIsSquaredMultiplier) {
  for (double s : {0.3, 0.5, 0.7}) {
    const Kernel k = make_truncated_fractional(1, s, 0.25, 0.5);
    const EringenKernel A = build_eringen_kernel(k);
    for (double xi : {0.1, 0.5, 1.0, 2.0}) {
      const double qh = q_hat(k, xi);
      EXPECT_NEAR(eringen_hat(A, xi), qh * qh, 1e-4) << s << " " << xi;
    }
  }
}

TEST(EringenForm, ZeroSymmetricPositive) {
  const Kernel k = make_truncated_fractional(1, 0.5, 0.25, 0.5);
  const EringenKernel A = build_eringen_kernel(k);
  auto dom = unit_domain(64, 0.25);
  EringenForm form(A, Tensor::iso(1, 1, 0.5), dom);
  const Box box{1, {0, 0}, {1, 1}};
  const Field z = zeros(dom->lat, Rank::Vector);
  for (int t = 0; t < gen::kCases; ++t) {
    const Field v = random_bump_field(dom->lat, box, 700 + t), w = random_bump_field(dom->lat, box, 800 + t);
    EXPECT_EQ(form(z, v), 0.0);
    const double a = form(v, w), b = form(w, v);
    EXPECT_NEAR(a, b, 1e-12 * (std::abs(a) + 1e-300));
    EXPECT_GT(form(v, v), 0.0);
  }
}

TEST(EringenForm, RigidMotionsHaveNoEnergy) {
  const EringenKernel A = build_eringen_kernel(make_truncated_fractional(1, 0.5, 0.25, 0.5));
  auto dom = unit_domain(64, 0.25);
  EringenForm form(A, Tensor::iso(1, 1, 0.5), dom);
  const Field c = interpolate(dom->lat, Rank::Vector, [](const double*, double* o) { o[0] = 2.5; });
  EXPECT_NEAR(form(c, c), 0.0, 1e-14);
}

TEST(EringenForm, MercerPositivity) {
  gen::Gen g(63);
  const EringenKernel A = build_eringen_kernel(make_truncated_fractional(1, 0.7, 0.25, 0.5));
  auto dom = unit_domain(64, 0.25);
  EringenForm form(A, Tensor::iso(1, 1, 0), dom);
  for (int t = 0; t < gen::kCases; ++t) {
    Eigen::VectorXd phi(form.cells());
    for (int i = 0; i < phi.size(); ++i) phi(i) = g.uniform(-1, 1);
    EXPECT_GT(form.mercer(phi), 0.0);
  }
}

TEST(EringenForm, ConvergesToTheNonlocalForm) {
  const Kernel k = make_truncated_fractional(1, 0.5, 0.25, 0.5);
  const Tensor C = Tensor::iso(1, 1, 0.5);
  double prev = INFINITY, prev_norm = INFINITY;
  for (int cells : {64, 128, 256}) {
    double norm_disc = 0;
    const double d = compare_forms(k, C, unit_domain(cells, 0.25), 6, 3, &norm_disc);
    EXPECT_LT(d, prev);
    EXPECT_LT(norm_disc, prev_norm);
    prev = d, prev_norm = norm_disc;
  }
  EXPECT_LT(prev, 1e-2);
}
