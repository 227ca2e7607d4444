#pragma once

// Residual checks that lifted CH / CH2 solutions satisfy the polar
// incompressible Euler system on the cone and the lifted H^div equation.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conelab/ch_dynamics.hpp"
#include "conelab/cone_lift.hpp"

namespace conelab {

struct ResidualReport {
  std::string label;
  /// Relative RMS residual (see each check for its normalisation).
  double l2 = 0.0;
  /// Max-norm of the absolute residual.
  double linf = 0.0;
  /// RMS of the absolute residual.
  double abs_l2 = 0.0;
  int resolution = 0;
  /// Time step behind the tendencies; 0 for exact tendencies.
  double dt = 0.0;
};

/// Residual of div(rho v) = 0 for the lifted field with rho = r^{-4}, one
/// field per radius. Angular derivatives are spectral; the radial one uses
/// the exact power law r rho v_r = C(theta) r^{-2}.
struct DivergenceResidual {
  std::vector<double> radii;
  std::vector<PeriodicField> residual;

  double max_abs() const;
};

DivergenceResidual weighted_divergence(const PeriodicField& u,
                                       std::span<const double> radii = kDefaultRadii);

/// Pressure P(theta, r) = r^2 p(theta).
struct PressureProfile {
  PeriodicField p;
  double at(double theta, double r) const;
};

/// p from the radial momentum equation on the cone r^2 dtheta^2 + a^2 dr^2:
/// p = -(a^2/2)[u_tx/2 + u_x^2/4 + u u_xx/2 - u^2/a^2]. a = 1 is the
/// standard cone.
PressureProfile pressure_recover(const PeriodicField& u, const PeriodicField& ut,
                                 double aperture = 1.0);

/// Residual of the angular momentum equation after substituting the
/// recovered pressure: R = -p_x - (u_t + 2 u u_x). Zero exactly when u
/// solves CH with alpha = aperture/2. Relative norm uses rms(u_t) + rms(u)^2.
/// With resolved_band the residual is projected onto |k| <= n/3 first, which
/// is where the dealiased solver's dynamics live; pointwise products of
/// fields that fill that band otherwise leave an aliasing remainder.
ResidualReport euler_consistency_residual(const PeriodicField& u, const PeriodicField& ut,
                                          double aperture = 1.0, bool resolved_band = false);

struct CH2LiftReport {
  ResidualReport dx;
  ResidualReport dy;
  /// Relative max difference between the genuine (x, y)-grid evaluation and
  /// the 1D reduction; negative when the 2D evaluation was skipped.
  double grid2d_mismatch = -1.0;
};

/// Lifts (u, rho) to w = (u, sqrt(g) rho) on S_1 x S_1 with momentum
/// n~ = n + sqrt(g) rho dy, n = u - alpha^2 u_xx, and evaluates both
/// components of n~_t + L_w n~ + div(w) n~:
///   dx: n_t + u n_x + 2 n u_x + g rho rho_x
///   dy: sqrt(g) (rho_t + u rho_x + rho u_x)
/// When ny > 0 the same residual is also computed on an nx x ny grid with
/// y-constant fields from the coordinate form of the Lie derivative.
/// resolved_band projects the 1D residuals as in euler_consistency_residual.
CH2LiftReport ch2_lift_residual(const PeriodicField& u, const PeriodicField& rho,
                                const PeriodicField& ut, const PeriodicField& rhot, double alpha,
                                double gravity, int ny = 8, bool resolved_band = false);

enum class Identity { divergence, consistency, ch2_lift, curl, vorticity_advect };

Identity parse_identity(const std::string& name);
std::string identity_name(Identity id);

enum class FdStencil {
  /// Five-point centred difference, O(dt^4).
  centered4,
  /// Backward difference, O(dt).
  lagged1,
};

struct FdSample {
  PeriodicField u;
  PeriodicField ut;
  /// Density and its rate; empty for CH.
  std::optional<PeriodicField> rho;
  std::optional<PeriodicField> rhot;
};

/// Integrates from the initial state to T (plus the stencil's overhang) and
/// returns the fields at T with finite-difference time derivatives, all
/// restricted to the dealiased band. T must be a multiple of dt. With
/// monitor_flow the run up to the stencil is made with the flow-map blow-up
/// monitor, and an Error naming the stop reason is thrown if it breaks.
FdSample fd_time_derivative(const CHState& initial, double dt, double T, FdStencil stencil,
                            bool monitor_flow = true);
FdSample fd_time_derivative(const CH2State& initial, double dt, double T, FdStencil stencil,
                            bool monitor_flow = true);

struct SweepOptions {
  Identity identity = Identity::consistency;
  std::vector<int> resolutions{64, 128, 256};
  /// dt = 0 evaluates exact tendencies; dt > 0 uses finite differences in time.
  std::vector<double> dts{0.0};
  std::function<PeriodicField(const Grid1D&)> initial_u;
  /// Density for the ch2_lift identity.
  std::function<PeriodicField(const Grid1D&)> initial_rho;
  double alpha = 0.5;
  double gravity = 1.0;
  double T = 0.1;
  FdStencil stencil = FdStencil::centered4;
  bool monitor_flow = true;
};

struct SweepTable {
  std::vector<ResidualReport> rows;
  /// Observed orders in dt, log(R_i/R_{i+1}) / log(dt_i/dt_{i+1}), per resolution.
  std::vector<double> dt_orders;
  /// Observed decay rates in n between consecutive resolutions (exact tendencies).
  std::vector<double> n_orders;
};

SweepTable convergence_sweep(const SweepOptions& opts);

/// Observed order between two (step, error) pairs.
double observed_order(double h1, double e1, double h2, double e2);

}  // namespace conelab
