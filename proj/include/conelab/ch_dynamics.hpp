#pragma once

// Camassa-Holm (general alpha) and two-component CH2 dynamics in momentum
// form, RK4 time stepping, Lagrangian flow maps and blow-up monitoring.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "conelab/spectral_grid.hpp"

namespace conelab {

/// Jacobian threshold below which a flow is treated as broken.
inline constexpr double kJacobianBlowup = 1e-3;
/// Field magnitude above which a run is treated as blown up.
inline constexpr double kFieldBlowup = 1e8;

/// Momentum m = u - alpha^2 u_xx of the CH equation at time t.
struct CHState {
  PeriodicField m;
  double alpha = 0.5;
  double t = 0.0;

  PeriodicField velocity() const { return helmholtz_inv(m, alpha); }
  static CHState from_velocity(const PeriodicField& u, double alpha, double t = 0.0) {
    return {helmholtz(u, alpha), alpha, t};
  }
};

/// CH2 state: momentum m, advected density rho, gravity g > 0.
struct CH2State {
  PeriodicField m;
  PeriodicField rho;
  double alpha = 1.0;
  double gravity = 1.0;
  double t = 0.0;

  PeriodicField velocity() const { return helmholtz_inv(m, alpha); }
  static CH2State from_velocity(const PeriodicField& u, const PeriodicField& rho, double alpha,
                                double gravity, double t = 0.0) {
    return {helmholtz(u, alpha), rho, alpha, gravity, t};
  }
};

/// Initial-data checks: rho strictly positive, g > 0, alpha >= 0.
void validate_initial(const CH2State& s);

struct CH2Tendency {
  PeriodicField m;
  PeriodicField rho;
};

/// dm/dt = -(u m_x + 2 m u_x), products dealiased.
PeriodicField ch_rhs(const CHState& s);
/// (dm/dt, drho/dt) = (-u m_x - 2 m u_x - g rho rho_x, -(rho u)_x).
CH2Tendency ch2_rhs(const CH2State& s);

/// du/dt recovered from the momentum tendency.
PeriodicField velocity_tendency(const CHState& s);
CH2Tendency velocity_tendency(const CH2State& s);

/// Largest admissible step, 0.5 dx / max|u| (infinite for u = 0).
double cfl_limit(const PeriodicField& u);

/// Raised when a step produces NaN/Inf or a field beyond kFieldBlowup.
class BlowupError : public Error {
 public:
  using State = std::variant<CHState, CH2State>;
  BlowupError(const std::string& what, State last_valid)
      : Error(what), last_valid_(std::move(last_valid)) {}
  const State& last_valid() const { return last_valid_; }

 private:
  State last_valid_;
};

/// Classical RK4 step. Throws InvalidArgument when dt violates the CFL
/// guard and BlowupError when the result is not admissible.
CHState step(const CHState& s, double dt);
CH2State step(const CH2State& s, double dt);

/// E = 1/2 int u^2 + alpha^2 u_x^2 dx.
double energy(const CHState& s);
/// E = 1/2 int u^2 + alpha^2 u_x^2 + g rho^2 dx.
double energy(const CH2State& s);

/// Lagrangian flow map stored as displacement phi - id and Jacobian d_theta phi.
struct FlowMap {
  PeriodicField displacement;
  PeriodicField jacobian;
  double t = 0.0;

  static FlowMap identity(const Grid1D& grid, double t0 = 0.0) {
    return {PeriodicField(grid), PeriodicField::constant(grid, 1.0), t0};
  }
  const Grid1D& grid() const { return displacement.grid(); }
  /// phi(x_j), not reduced modulo L.
  std::vector<double> positions() const;
};

/// Time-dependent velocity field evaluable at arbitrary points.
class VelocitySource {
 public:
  virtual ~VelocitySource() = default;
  /// Writes u(t, x_i) and u_x(t, x_i).
  virtual void sample(double t, std::span<const double> x, std::span<double> u,
                      std::span<double> ux) const = 0;
};

/// Spatially constant (possibly zero) velocity; handy for tests and controls.
class UniformVelocity : public VelocitySource {
 public:
  explicit UniformVelocity(double c) : c_(c) {}
  void sample(double, std::span<const double> x, std::span<double> u,
              std::span<double> ux) const override;

 private:
  double c_;
};

/// Stored velocity snapshots with their time derivatives. Space is handled
/// by trigonometric interpolation, time by cubic Hermite interpolation.
class VelocityHistory : public VelocitySource {
 public:
  /// Times must be strictly increasing. keep_last > 0 bounds memory.
  explicit VelocityHistory(std::size_t keep_last = 0) : keep_last_(keep_last) {}

  void push(double t, const PeriodicField& u, const PeriodicField& ut);
  void sample(double t, std::span<const double> x, std::span<double> u,
              std::span<double> ux) const override;

  bool empty() const { return frames_.empty(); }
  double t_begin() const { return frames_.front().t; }
  double t_end() const { return frames_.back().t; }

 private:
  struct Frame {
    double t;
    TrigSeries u;
    TrigSeries ut;
  };
  std::size_t keep_last_;
  std::vector<Frame> frames_;
};

struct FlowAdvance {
  FlowMap map;
  /// Set when min d_theta phi dropped below the threshold; map holds the
  /// first state past the threshold.
  bool broke = false;
};

/// Integrates d_t phi = u(t, phi) and d_t J = u_x(t, phi) J with RK4 from
/// t0 to t1 using steps of at most dt.
FlowAdvance flow_advance(const FlowMap& f, const VelocitySource& velocity, double t0, double t1,
                         double dt, double threshold = kJacobianBlowup);

/// min over the grid of d_theta phi.
double blowup_monitor(const FlowMap& f);

/// One row of a run's time series.
struct SeriesRecord {
  double t;
  double energy;
  double integral_m;
  double integral_rho;
  double min_jacobian;
};

struct RunOptions {
  double dt = 1e-3;
  double T = 1.0;
  bool track_flow = true;
  /// Record a series row every this many steps (the final state is always recorded).
  int record_every = 1;
  /// Keep every velocity snapshot (needed for a posteriori flow queries).
  bool keep_history = false;
};

template <class State>
struct Run {
  State final_state;
  FlowMap flow;
  std::vector<SeriesRecord> series;
  /// Empty when T was reached, otherwise the reason the run stopped early.
  std::string stop_reason;
  std::shared_ptr<VelocityHistory> history;

  bool completed() const { return stop_reason.empty(); }
};

using CHRun = Run<CHState>;
using CH2Run = Run<CH2State>;

CHRun simulate(const CHState& initial, const RunOptions& opts);
CH2Run simulate(const CH2State& initial, const RunOptions& opts);

}  // namespace conelab
