#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "gen.hpp"
#include "nlel/grid.hpp"

using namespace nlel;

namespace {

Box box1(double lo, double hi) { return Box{1, {lo, 0.0}, {hi, 1.0}}; }

// classification from coordinates alone; `tol` absorbs rounding in the node positions
Region classify(const Box& b, const double* x, double delta, double tol) {
  double out2 = 0, din = 1e300;
  bool outside = false, on_bd = false;
  for (int d = 0; d < b.n; ++d) {
    if (x[d] < b.lo[d] - tol) { out2 += (b.lo[d] - x[d]) * (b.lo[d] - x[d]); outside = true; }
    else if (x[d] > b.hi[d] + tol) { out2 += (x[d] - b.hi[d]) * (x[d] - b.hi[d]); outside = true; }
    else {
      const double m = std::min(x[d] - b.lo[d], b.hi[d] - x[d]);
      din = std::min(din, m);
      if (std::abs(m) <= tol) on_bd = true;
    }
  }
  if (outside) return std::sqrt(out2) <= delta + tol ? Region::OuterCollar : Region::Exterior;
  if (on_bd) return Region::Boundary;
  return din > delta + tol ? Region::Inner : Region::InnerCollar;
}

}  // namespace

TEST(Grid, CollarCountsInOneDimension) {
  const Domain d = build_domain(box1(0, 1), 0.25, 0.05);
  int outer_left = 0, outer_right = 0, inner_left = 0, inner_right = 0;
  for (int k = 0; k < d.size(); ++k) {
    const double x = d.lat->x(k, 0);
    if (d.region[k] == Region::OuterCollar) (x < 0.5 ? outer_left : outer_right)++;
    if (d.region[k] == Region::InnerCollar) (x < 0.5 ? inner_left : inner_right)++;
  }
  // Gamma_delta: -0.25..-0.05; Gamma_{-delta} (boundary node excluded): 0.05..0.25
  EXPECT_EQ(outer_left, 5);
  EXPECT_EQ(outer_right, 5);
  EXPECT_EQ(inner_left, 5);
  EXPECT_EQ(inner_right, 5);
  EXPECT_EQ(d.counts()[static_cast<int>(Region::Boundary)], 2);
  EXPECT_EQ(d.counts()[static_cast<int>(Region::Inner)], 9);  // 0.30..0.70
}

TEST(Grid, HorizonEqualToSpacingGivesOneLayer) {
  for (int n : {1, 2}) {
    const Domain d = build_domain(Box{n, {0, 0}, {1, 1}}, 0.1, 0.1);
    EXPECT_EQ(d.layers, 1);
    if (n == 1) {
      EXPECT_EQ(d.counts()[static_cast<int>(Region::OuterCollar)], 2);
      EXPECT_EQ(d.counts()[static_cast<int>(Region::InnerCollar)], 2);
    }
  }
}

TEST(Grid, RegionsMatchCoordinateClassification) {
  gen::Gen g(11);
  for (int i = 0; i < gen::kCases; ++i) {
    const int n = g.integer(1, 2);
    const int cells = n == 1 ? g.integer(20, 80) : g.integer(10, 24);
    const double h = 1.0 / cells;
    const int layers = g.integer(1, std::max(1, cells / 4));
    const double delta = layers * h;
    const Box b{n, {0.0, -0.5}, {1.0, 0.5}};
    const Domain d = build_domain(b, delta, h, g.integer(1, 2));
    for (int k = 0; k < d.size(); ++k) {
      const double x[2] = {d.lat->x(k, 0), n == 2 ? d.lat->x(k, 1) : 0.0};
      ASSERT_EQ(d.region[k], classify(b, x, delta, 1e-9 * h)) << "n=" << n << " node " << k;
    }
  }
}

TEST(Grid, InnerNodesKeepDistanceFromComplement) {
  const Domain d = build_domain(Box{2, {0, 0}, {1, 1}}, 0.2, 0.025);
  for (int k = 0; k < d.size(); ++k) {
    if (d.region[k] != Region::Inner) continue;
    const double x = d.lat->x(k, 0), y = d.lat->x(k, 1);
    EXPECT_GT(std::min({x, 1 - x, y, 1 - y}), 0.2);
  }
}

TEST(Grid, PaddingOnlyChangesTheGrid) {
  const Domain a = build_domain(box1(0, 1), 0.1, 0.02);
  const Domain b = build_domain_padded(box1(0, 1), 0.1, 0.02, 0.3);
  for (int r = 0; r < 4; ++r) EXPECT_EQ(a.counts()[r], b.counts()[r]);  // only the exterior grows
  EXPECT_EQ(b.pad_layers, 15);
  EXPECT_NEAR(b.lat->origin[0], -0.3, 1e-15);
}

TEST(Grid, RejectsIncommensurateSizes) {
  EXPECT_THROW(build_domain(box1(0, 1), 0.25, 0.03), std::invalid_argument);  // delta not a multiple of h
  EXPECT_THROW(build_domain(box1(0, 1), 0.5, 0.05), std::invalid_argument);   // empty inner region
  EXPECT_THROW(build_domain(box1(0, 1), 0.05, 0.1), std::invalid_argument);   // h > delta
  EXPECT_THROW(make_torus(1, 1.0, 48), std::invalid_argument);
}

TEST(Grid, TrapezoidWeightsIntegrateAffineExactly) {
  gen::Gen g(12);
  for (int i = 0; i < gen::kCases; ++i) {
    const int n = g.integer(1, 2);
    const double lo = g.uniform(-1, 1), w = g.integer(2, 6) * 0.25;
    const Box b{n, {lo, lo}, {lo + w, lo + w}};
    const Domain d = build_domain(b, 0.125, 0.0625);
    const double a0 = g.uniform(-2, 2), a1 = g.uniform(-2, 2), c = g.uniform(-2, 2);
    double s = 0;
    for (int k = 0; k < d.size(); ++k)
      s += d.omega_weight(k) * (a0 * d.lat->x(k, 0) + (n == 2 ? a1 * d.lat->x(k, 1) : 0.0) + c);
    const double mid = lo + w / 2;
    const double exact = std::pow(w, n) * (a0 * mid + (n == 2 ? a1 * mid : 0.0) + c);
    EXPECT_NEAR(s, exact, 1e-12 * (1 + std::abs(exact)));
  }
}

TEST(Grid, InterpolateZeroAndAffine) {
  const Domain d = build_domain(Box{2, {0, 0}, {1, 1}}, 0.125, 0.0625);
  const Field z = interpolate(d.lat, Rank::Vector, [](const double*, double* o) { o[0] = o[1] = 0; });
  EXPECT_EQ(z.v.cwiseAbs().maxCoeff(), 0.0);
  gen::Gen g(13);
  double A[2][2], b[2];
  for (auto& r : A) for (double& a : r) a = g.uniform(-3, 3);
  for (double& x : b) x = g.uniform(-3, 3);
  const Field f = interpolate(d.lat, Rank::Vector, [&](const double* x, double* o) {
    for (int i = 0; i < 2; ++i) o[i] = A[i][0] * x[0] + A[i][1] * x[1] + b[i];
  });
  for (int k = 0; k < d.size(); ++k)
    for (int i = 0; i < 2; ++i)
      EXPECT_EQ(f.v(k, i), A[i][0] * d.lat->x(k, 0) + A[i][1] * d.lat->x(k, 1) + b[i]);
}

TEST(Grid, SineOnTorusHasOnlyTheFirstModes) {
  const int N = 64;
  const TorusGrid t = make_torus(1, 1.0, N);
  const Field f = interpolate_scalar(t.lat, [](const double* x) { return std::sin(2 * M_PI * x[0]); });
  // naive DFT as the oracle
  for (int m = 0; m < N; ++m) {
    std::complex<double> c = 0;
    for (int j = 0; j < N; ++j) c += f.v(j, 0) * std::polar(1.0, -2 * M_PI * m * j / N);
    if (m == 1 || m == N - 1) EXPECT_NEAR(std::abs(c), N / 2.0, 1e-12);
    else EXPECT_LT(std::abs(c), 1e-12) << m;
  }
}

TEST(Grid, ConstraintsZeroTheExcludedNodes) {
  const Domain d = build_domain(box1(0, 1), 0.1, 0.025);
  Field f = interpolate(d.lat, Rank::Vector, [](const double*, double* o) { o[0] = 1; });
  Field g = f;
  apply_constraint(f, d, Constraint::ZeroOnComplement);
  apply_constraint(g, d, Constraint::ZeroOnCollar);
  EXPECT_TRUE(satisfies_constraint(f, d));
  EXPECT_TRUE(satisfies_constraint(g, d));
  for (int k = 0; k < d.size(); ++k) {
    const double x = d.lat->x(k, 0);
    EXPECT_EQ(f.v(k, 0), (x > 1e-12 && x < 1 - 1e-12) ? 1.0 : 0.0);
    EXPECT_EQ(g.v(k, 0), d.region[k] == Region::Inner ? 1.0 : 0.0);
  }
  g.v(0, 0) = 1;  // breaks the recorded tag
  EXPECT_FALSE(satisfies_constraint(g, d));
}
