#include <gtest/gtest.h>

#include <cmath>

#include "conelab/cone_lift.hpp"

using namespace conelab;

namespace {

class StaticSine : public VelocitySource {
 public:
  void sample(double, std::span<const double> x, std::span<double> u,
              std::span<double> ux) const override {
    for (std::size_t i = 0; i < x.size(); ++i) {
      u[i] = std::sin(x[i]);
      ux[i] = std::cos(x[i]);
    }
  }
};

}  // namespace

TEST(LiftVelocity, ComponentsAndOrdering) {
  const Grid1D g(16);
  const auto u = PeriodicField::sample(g, [](double x) { return std::cos(2 * x); });
  const std::vector<double> radii{0.5, 3.0};
  const auto s = lift_velocity(u, radii);
  ASSERT_EQ(s.size(), 32u);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 16; ++j) {
      const ConeSample& c = s[i * 16 + j];
      const double x = g.x(j);
      EXPECT_EQ(c.r, radii[i]);
      EXPECT_EQ(c.theta, x);
      EXPECT_NEAR(c.v_theta, radii[i] * std::cos(2 * x), 1e-15);
      EXPECT_NEAR(c.v_r, -radii[i] * std::sin(2 * x), 1e-13);
    }
  const std::vector<double> bad{1.0, 0.0};
  EXPECT_THROW(lift_velocity(u, bad), InvalidArgument);
}

TEST(LiftFlow, IdentityGivesCircles) {
  const Grid1D g(32);
  const std::vector<double> radii{0.5, 1.0, 2.0};
  const auto curves = lift_flow(FlowMap::identity(g), radii);
  ASSERT_EQ(curves.size(), 3u);
  for (const auto& c : curves)
    for (int j = 0; j < g.n(); ++j) {
      EXPECT_NEAR(std::abs(c.points[j]), c.radius, 1e-15);
      EXPECT_NEAR(std::abs(c.points[j] - std::polar(c.radius, g.x(j))), 0.0, 1e-15);
    }
}

TEST(LiftFlow, ClosedFormSineFlowAndRadialScaling) {
  const Grid1D g(32);
  const StaticSine v;
  const FlowMap f = flow_advance(FlowMap::identity(g), v, 0.0, 0.8, 1e-3).map;
  const std::vector<double> radii{1.0, 2.0};
  const auto curves = lift_flow(f, radii);
  for (int j = 0; j < g.n(); ++j) {
    const double x = g.x(j);
    const double phi = 2.0 * std::atan2(std::sin(x / 2) * std::exp(0.8), std::cos(x / 2));
    const double c = std::cos(x / 2), s = std::sin(x / 2);
    const double J = std::exp(0.8) / (c * c + s * s * std::exp(1.6));
    EXPECT_NEAR(std::abs(curves[0].points[j] - std::polar(std::sqrt(J), phi)), 0.0, 1e-10);
    EXPECT_EQ(curves[1].points[j], 2.0 * curves[0].points[j]);
  }
}

TEST(LiftFlow, RejectsBrokenMapAndBadRadii) {
  const Grid1D g(16);
  FlowMap f = FlowMap::identity(g);
  const std::vector<double> radii{1.0};
  f.jacobian[4] = 0.0;
  EXPECT_THROW(lift_flow(f, radii), DomainError);
  const std::vector<double> neg{-1.0};
  EXPECT_THROW(lift_flow(FlowMap::identity(g), neg), InvalidArgument);
}

TEST(Momentum, OneFormMatchesHelmholtz) {
  const Grid1D g(64);
  const auto u = PeriodicField::sample(g, [](double x) { return std::sin(3 * x); });
  const auto n = momentum_oneform(u, 0.5).n;
  EXPECT_LT((n - 3.25 * u).max_abs(), 1e-12);
  EXPECT_LT((n - helmholtz(u, 0.5)).max_abs(), 1e-12);
}

TEST(Curl, SineClosedForm) {
  // curl of (r u'/2, r u) is 2u - u''/2 = 2.5 sin x for u = sin x.
  const Grid1D g(64);
  const auto u = PeriodicField::sample(g, [](double x) { return std::sin(x); });
  const CurlCheck c = curl_identity_residual(u);
  EXPECT_LT(c.relative_error, 1e-13);
  EXPECT_LT(c.radial_spread, 1e-13);
}

TEST(Curl, HoldsForBroadbandDataAndOtherRadii) {
  const Grid1D g(128);
  const auto u = PeriodicField::sample(g, [](double x) { return std::exp(std::sin(x)) - std::cos(5 * x) / 7; });
  const std::vector<double> radii{0.3, 0.9, 1.7, 4.0};
  const CurlCheck c = curl_identity_residual(u, radii);
  EXPECT_LT(c.relative_error, 1e-12);
  EXPECT_LT(c.radial_spread, 1e-11);
  const std::vector<double> two{1.0, 2.0}, dup{1.0, 1.0, 2.0};
  EXPECT_THROW(curl_identity_residual(u, two), InvalidArgument);
  EXPECT_THROW(curl_identity_residual(u, dup), InvalidArgument);
}

TEST(AdvectedVorticity, HoldsForChTendencyOnly) {
  const Grid1D g(128);
  const auto u = PeriodicField::sample(g, [](double x) { return 0.5 * std::sin(x) + 0.3 * std::cos(2 * x); });
  for (double alpha : {0.5, 1.0}) {
    const PeriodicField ut = velocity_tendency(CHState::from_velocity(u, alpha));
    EXPECT_LT(advected_vorticity_check(u, ut, alpha), 1e-11) << alpha;
    // Tendency of a different alpha does not advect this momentum.
    const PeriodicField wrong = velocity_tendency(CHState::from_velocity(u, 2 * alpha));
    EXPECT_GT(advected_vorticity_check(u, wrong, alpha), 1e-2) << alpha;
  }
}

TEST(AdvectedVorticity, ZeroFieldIsAbsolute) {
  const Grid1D g(16);
  EXPECT_EQ(advected_vorticity_check(PeriodicField(g), PeriodicField(g)), 0.0);
}

TEST(Figure1, MarksTruncatedFrames) {
  const Grid1D g(16);
  std::vector<FlowMap> snaps{FlowMap::identity(g, 0.0), FlowMap::identity(g, 1.0)};
  snaps[1].jacobian[3] = -0.1;
  const std::vector<double> radii{1.0, 2.0};
  const auto frames = figure1_emit(snaps, radii);
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_FALSE(frames[0].truncated);
  EXPECT_EQ(frames[0].curves.size(), 2u);
  EXPECT_TRUE(frames[1].truncated);
  EXPECT_TRUE(frames[1].curves.empty());
  EXPECT_EQ(frames[1].time, 1.0);
}
