#include <gtest/gtest.h>

#include <cmath>

#include "conelab/peakon.hpp"

using namespace conelab;

namespace {

// Periodic Green function as a sum over images of the line kernel.
double image_sum(double x, double alpha, double L) {
  double s = 0.0;
  for (int k = -200; k <= 200; ++k) s += std::exp(-std::abs(x + k * L) / alpha) / (2 * alpha);
  return s;
}

// Antisymmetric pair on the line with alpha = 1: the half-gap q obeys
// q' = -sqrt(H (1 - e^{-2q}) / 2). With q = s^2 the time to go from q0 to
// q_end is a smooth integral, done here with composite Simpson.
double reduced_collision_time(double H, double q0, double q_end) {
  auto f = [H](double s) {
    if (s == 0.0) return 2.0 / std::sqrt(H);
    return 2.0 * s / std::sqrt(H * (1.0 - std::exp(-2.0 * s * s)) / 2.0);
  };
  const double a = std::sqrt(q_end), b = std::sqrt(q0);
  const int n = 20000;
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

}  // namespace

TEST(Green, LineKernel) {
  for (double alpha : {0.3, 1.0, 2.5}) {
    const GreenKernel k = GreenKernel::line(alpha);
    for (double x : {-3.0, -0.4, 0.0, 0.7, 5.0}) {
      const GreenValue g = green_eval(k, x);
      const double want = std::exp(-std::abs(x) / alpha) / (2 * alpha);
      EXPECT_NEAR(g.value, want, 1e-15);
      const double slope = x == 0.0 ? 0.0 : -std::copysign(want / alpha, x);
      EXPECT_NEAR(g.slope, slope, 1e-15);
    }
  }
  EXPECT_NEAR(green_eval(GreenKernel::line(1.0, KernelNormalization::unit_peak), 0.8).value,
              std::exp(-0.8), 1e-15);
}

TEST(Green, CircleKernelMatchesImageSum) {
  for (double alpha : {0.25, 0.5, 1.0, 3.0}) {
    for (double L : {kTwoPi, 4.0}) {
      const GreenKernel k = GreenKernel::circle(alpha, L);
      for (double x : {0.0, 0.3, -1.1, 0.5 * L - 1e-3, 1.7 * L}) {
        EXPECT_NEAR(green_eval(k, x).value, image_sum(x, alpha, L), 1e-12 * image_sum(0, alpha, L));
        const double h = 1e-5;
        if (std::abs(k.reduce(x)) > 1e-2 && std::abs(std::abs(k.reduce(x)) - 0.5 * L) > 1e-2) {
          const double fd = (image_sum(x + h, alpha, L) - image_sum(x - h, alpha, L)) / (2 * h);
          EXPECT_NEAR(green_eval(k, x).slope, fd, 1e-7 * (1 + std::abs(fd)));
        }
      }
      EXPECT_EQ(green_eval(k, 0.0).slope, 0.0);
    }
  }
}

TEST(Green, SmallAlphaDoesNotOverflow) {
  const GreenKernel k = GreenKernel::circle(1e-3);
  const GreenValue g = green_eval(k, 1.0);
  EXPECT_TRUE(std::isfinite(g.value));
  EXPECT_NEAR(green_eval(k, 0.0).value, 500.0, 1e-9);
}

TEST(Green, RejectsBadParameters) {
  EXPECT_THROW(GreenKernel::line(0.0), InvalidArgument);
  EXPECT_THROW(GreenKernel::circle(-1.0), InvalidArgument);
  EXPECT_THROW(GreenKernel::circle(1.0, 0.0), InvalidArgument);
}

TEST(Green, ReduceWrapsToHalfOpenInterval) {
  const GreenKernel k = GreenKernel::circle(0.5, 4.0);
  EXPECT_DOUBLE_EQ(k.reduce(3.0), -1.0);
  EXPECT_DOUBLE_EQ(k.reduce(-2.0), -2.0);
  EXPECT_DOUBLE_EQ(k.reduce(2.0), -2.0);
  EXPECT_DOUBLE_EQ(k.reduce(9.5), 1.5);
  EXPECT_DOUBLE_EQ(GreenKernel::line().reduce(9.5), 9.5);
}

TEST(Peakon, FieldIntegratesToTotalMomentum) {
  // (1 - alpha^2 d_xx) u = sum p_i delta_{q_i} and int G = 1.
  const PeakonEnsemble e{{1.0, 4.0}, {0.7, -0.2}, GreenKernel::circle(0.5), 0.0};
  const Grid1D g(4096);
  EXPECT_NEAR(integrate(sample_peakons(e, g)), total_momentum(e), 1e-5);
}

TEST(Peakon, SinglePeakonTravelsAtItsHeight) {
  PeakonEnsemble e{{0.0}, {1.3}, GreenKernel::line(0.5), 0.0};
  const double height = peakon_field(e, 0.0);
  EXPECT_NEAR(height, 1.3, 1e-15);
  for (int k = 0; k < 100; ++k) e = peakon_step(e, 1e-2);
  EXPECT_NEAR(e.q[0], height * 1.0, 1e-12);
  EXPECT_EQ(e.p[0], 1.3);
}

TEST(Peakon, ConservesHamiltonianAndMomentum) {
  PeakonEnsemble e{{0.3 * kTwoPi, 0.7 * kTwoPi}, {1.0, 0.5}, GreenKernel::circle(0.5), 0.0};
  const double h0 = hamiltonian(e), p0 = total_momentum(e);
  for (int k = 0; k < 2000; ++k) e = peakon_step(e, 1e-3);
  EXPECT_LT(std::abs(hamiltonian(e) - h0) / h0, 1e-10);
  EXPECT_NEAR(total_momentum(e), p0, 1e-13);
  for (double q : e.q) {
    EXPECT_GE(q, -M_PI);
    EXPECT_LT(q, M_PI);
  }
}

TEST(Peakon, HamiltonianClosedFormForPair) {
  const PeakonEnsemble e = collision_scenario(1.0, 1.0, GreenKernel::line(1.0));
  EXPECT_NEAR(hamiltonian(e), 0.5 * (1 - std::exp(-2.0)), 1e-15);
  EXPECT_EQ(total_momentum(e), 0.0);
  EXPECT_DOUBLE_EQ(min_gap(e), 2.0);
}

TEST(Peakon, CollisionTimeMatchesReducedOde) {
  const PeakonEnsemble e = collision_scenario(1.0, 1.0, GreenKernel::line(1.0));
  const double H = hamiltonian(e);
  const double tol = 1e-6;
  const double t_detect = detect_collision_time(e, 1e-4, 10.0, tol);
  // The detector fires once the gap 2q drops below tol.
  const double t_oracle = reduced_collision_time(H, 1.0, 0.5 * tol);
  EXPECT_NEAR(t_detect, t_oracle, 2e-4);
  EXPECT_GT(reduced_collision_time(H, 1.0, 0.0), t_detect);
}

TEST(Peakon, CollisionScenarioValidation) {
  EXPECT_THROW(collision_scenario(0.0, 1.0, GreenKernel::line()), InvalidArgument);
  EXPECT_THROW(collision_scenario(1.0, 0.0, GreenKernel::line()), InvalidArgument);
  EXPECT_THROW(collision_scenario(1.0, 4.0, GreenKernel::circle(0.5)), InvalidArgument);
  EXPECT_NO_THROW(collision_scenario(1.0, 100.0, GreenKernel::line()));
}

TEST(Peakon, CoincidentPeakonsRaise) {
  const PeakonEnsemble e{{1.0, 1.0}, {1.0, 0.5}, GreenKernel::line(), 0.0};
  EXPECT_THROW(peakon_rhs(e), CollisionError);
  // Zero combined momentum at a coincidence is not a collision.
  const PeakonEnsemble quiet{{1.0, 1.0}, {1.0, -1.0}, GreenKernel::line(), 0.0};
  EXPECT_NO_THROW(peakon_rhs(quiet));
  EXPECT_THROW(peakon_rhs(PeakonEnsemble{{1.0}, {}, GreenKernel::line(), 0.0}), InvalidArgument);
  EXPECT_THROW(peakon_step(quiet, 0.0), InvalidArgument);
}

TEST(PeakonTrajectory, HermiteInterpolationIsAccurate) {
  PeakonEnsemble e{{0.3 * kTwoPi, 0.7 * kTwoPi}, {1.0, 0.5}, GreenKernel::circle(0.5), 0.0};
  PeakonTrajectory traj;
  traj.push(e);
  for (int k = 0; k < 10; ++k) {
    e = peakon_step(e, 1e-2);
    traj.push(e);
  }
  // Fine reference for t = 0.055.
  PeakonEnsemble ref = traj.states()[5];
  for (int k = 0; k < 50; ++k) ref = peakon_step(ref, 1e-4);
  const PeakonEnsemble mid = traj.at(0.055);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(ref.kernel.reduce(mid.q[i] - ref.q[i]), 0.0, 1e-8);
    EXPECT_NEAR(mid.p[i], ref.p[i], 1e-8);
  }
  std::vector<double> x{0.5, 2.0}, u(2), ux(2);
  traj.sample(0.055, x, u, ux);
  for (int i = 0; i < 2; ++i) {
    const auto [uw, uxw] = peakon_field_and_slope(mid, x[i]);
    EXPECT_EQ(u[i], uw);
    EXPECT_EQ(ux[i], uxw);
  }
  EXPECT_THROW(traj.at(0.2), InvalidArgument);
  EXPECT_THROW(traj.push(traj.states().front()), InvalidArgument);
}

TEST(RunCollision, StopsAtGapWithSymmetricFlow) {
  const PeakonEnsemble e = collision_scenario(1.0, 1.0, GreenKernel::circle(0.5));
  CollisionOptions o;
  o.dt = 1e-3;
  o.grid_n = 64;
  o.snapshot_times = {0.0, 0.5, 1.0};
  const CollisionRun run = run_collision(e, o);
  EXPECT_TRUE(run.stop_reason == "gap" || run.stop_reason == "jacobian" ||
              run.stop_reason == "momentum")
      << run.stop_reason;
  EXPECT_EQ(run.snapshots.size(), 3u);
  EXPECT_NEAR(run.snapshots[1].t, 0.5, 1e-12);
  const double h0 = run.series.front().hamiltonian;
  for (const auto& r : run.series) EXPECT_LT(std::abs(r.midpoint_velocity), 1e-12);
  EXPECT_LT(std::abs(run.series.back().hamiltonian - h0) / h0, 1e-3);
  EXPECT_LT(run.final_state.t, o.t_max);
}

TEST(RunCollision, PeakonsOnlyWithoutGrid) {
  PeakonEnsemble e{{0.0}, {1.0}, GreenKernel::line(1.0), 0.0};
  CollisionOptions o;
  o.dt = 1e-2;
  o.t_max = 1.0;
  o.grid_n = 0;
  const CollisionRun run = run_collision(e, o);
  EXPECT_EQ(run.stop_reason, "t_max");
  EXPECT_TRUE(run.snapshots.empty());
  EXPECT_NEAR(run.final_state.q[0], 0.5, 1e-10);
}
