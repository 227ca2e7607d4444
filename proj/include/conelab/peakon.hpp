#pragma once

// Finite-dimensional peakon dynamics on the line and on the circle.

#include <span>
#include <string>
#include <vector>

#include "conelab/ch_dynamics.hpp"

namespace conelab {

enum class KernelDomain { line, circle };

/// operator: the Green function of (1 - alpha^2 d_xx), so u = G * m exactly.
/// unit_peak: 2 alpha G, which is e^{-|x|} on the line for alpha = 1.
enum class KernelNormalization { operator_green, unit_peak };

struct GreenKernel {
  KernelDomain domain = KernelDomain::circle;
  double alpha = 0.5;
  double circumference = kTwoPi;
  KernelNormalization normalization = KernelNormalization::operator_green;

  static GreenKernel line(double alpha = 1.0,
                          KernelNormalization norm = KernelNormalization::operator_green);
  static GreenKernel circle(double alpha, double length = kTwoPi,
                            KernelNormalization norm = KernelNormalization::operator_green);

  /// Reduces a displacement to [-L/2, L/2) on the circle; identity on the line.
  double reduce(double x) const;
};

struct GreenValue {
  double value;
  /// Derivative, with the symmetric convention G'(0) = 0 at the kink.
  double slope;
};

GreenValue green_eval(const GreenKernel& k, double x);

struct PeakonEnsemble {
  std::vector<double> q;
  std::vector<double> p;
  GreenKernel kernel;
  double t = 0.0;

  std::size_t size() const { return q.size(); }
};

/// u(x) = sum_i p_i G(x - q_i).
double peakon_field(const PeakonEnsemble& e, double x);
/// (u, u_x) at x, using G'(0) = 0 at a peak.
std::pair<double, double> peakon_field_and_slope(const PeakonEnsemble& e, double x);
/// Samples u on a grid.
PeriodicField sample_peakons(const PeakonEnsemble& e, const Grid1D& grid);

/// Raised when two peakons coincide while carrying nonzero combined momentum.
class CollisionError : public Error {
 public:
  using Error::Error;
};

struct PeakonTendency {
  std::vector<double> dq;
  std::vector<double> dp;
};

/// dq_i = sum_j p_j G(q_i - q_j), dp_i = -p_i sum_j p_j G'(q_i - q_j).
PeakonTendency peakon_rhs(const PeakonEnsemble& e);

/// RK4 step of the peakon ODEs; positions are re-reduced on the circle.
PeakonEnsemble peakon_step(const PeakonEnsemble& e, double dt);

/// H = 1/2 sum_ij p_i p_j G(q_i - q_j).
double hamiltonian(const PeakonEnsemble& e);
double total_momentum(const PeakonEnsemble& e);

/// Antisymmetric pair {(-q0, p0), (q0, -p0)} whose midpoint 0 is fixed by the flow.
PeakonEnsemble collision_scenario(double p0, double q0, const GreenKernel& kernel);

/// Smallest pairwise distance between peakons (periodic on the circle).
double min_gap(const PeakonEnsemble& e);

/// Peakon states at successive times, usable as a VelocitySource through
/// cubic Hermite interpolation of (q, p) in time.
class PeakonTrajectory : public VelocitySource {
 public:
  explicit PeakonTrajectory(std::size_t keep_last = 0) : keep_last_(keep_last) {}

  void push(const PeakonEnsemble& e);
  void sample(double t, std::span<const double> x, std::span<double> u,
              std::span<double> ux) const override;
  /// Interpolated ensemble at time t.
  PeakonEnsemble at(double t) const;

  const std::vector<PeakonEnsemble>& states() const { return states_; }

 private:
  std::size_t keep_last_;
  std::vector<PeakonEnsemble> states_;
  std::vector<PeakonTendency> rates_;
};

struct CollisionOptions {
  double dt = 1e-4;
  double t_max = 20.0;
  /// Stop when the gap falls below this or any |p_i| exceeds its inverse.
  double gap_tolerance = 1e-6;
  /// Flow grid; no flow is tracked when n == 0.
  int grid_n = 256;
  /// Times at which flow snapshots are stored (ascending, clipped to the run).
  std::vector<double> snapshot_times;
};

struct CollisionRecord {
  double t;
  double gap;
  double max_abs_p;
  double hamiltonian;
  double min_jacobian;
  /// u at the fixed midpoint x = 0.
  double midpoint_velocity;
};

struct CollisionRun {
  std::vector<CollisionRecord> series;
  std::vector<FlowMap> snapshots;
  PeakonEnsemble final_state;
  FlowMap final_flow;
  /// Why the run stopped: "gap", "momentum", "jacobian" or "t_max".
  std::string stop_reason;
};

/// Evolves the peakons and the flow map they generate together.
CollisionRun run_collision(const PeakonEnsemble& initial, const CollisionOptions& opts);

/// First time the gap/momentum detector fires (peakons only), or t_max.
double detect_collision_time(const PeakonEnsemble& initial, double dt, double t_max,
                             double gap_tolerance);

}  // namespace conelab
