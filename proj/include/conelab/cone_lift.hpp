#pragma once

// Lifts of one-dimensional CH data to the cone S_1 x R_{>0}: the velocity
// field w = (u, r u_theta / 2), the Lagrangian map
// Psi(theta, r) = r sqrt(phi_theta) e^{i phi}, the momentum one-form and the
// vorticity identities it satisfies.

#include <complex>
#include <span>
#include <vector>

#include "conelab/ch_dynamics.hpp"

namespace conelab {

/// Polar components of a lifted vector field in the orthonormal frame
/// (e_r, e_theta = r^{-1} d_theta).
struct ConeSample {
  double theta;
  double r;
  double v_r;
  double v_theta;
};

/// Default radii of the tensor (theta, r) grid used by the 2D checks.
inline const std::vector<double> kDefaultRadii{0.5, 1.0, 2.0};

/// v_r = r u_theta / 2, v_theta = r u at every grid angle and radius
/// (radius-major ordering). Throws on a nonpositive radius.
std::vector<ConeSample> lift_velocity(const PeriodicField& u, std::span<const double> radii);

/// Image of the circle of radius r under Psi, one point per grid angle.
struct LiftedCurve {
  double radius;
  std::vector<std::complex<double>> points;
};

/// Throws DomainError when the Jacobian is not strictly positive.
std::vector<LiftedCurve> lift_flow(const FlowMap& f, std::span<const double> radii);

/// n = u - alpha^2 u_xx, the 1D momentum one-form u^flat + alpha^2 d delta u^flat.
struct Momentum1Form {
  PeriodicField n;
};

Momentum1Form momentum_oneform(const PeriodicField& u, double alpha);

struct CurlCheck {
  /// Relative RMS deviation of the discrete curl from 2u - u_xx / 2.
  double relative_error;
  /// Largest pairwise difference of the curl between radii (max norm).
  double radial_spread;
};

/// Samples the lifted field on a (theta, r) tensor grid and computes its
/// scalar curl r^{-1}[d_r(r v_theta) - d_theta v_r]. Radial derivatives use
/// the exact polynomial interpolant through the sampled radii (v is linear
/// in r, so three radii make this exact); angular ones are spectral.
CurlCheck curl_identity_residual(const PeriodicField& u,
                                 std::span<const double> radii = kDefaultRadii);

/// Relative RMS residual of n_t + u n_x + 2 n u_x = 0 with n = u - alpha^2 u_xx,
/// the 1D form of the advection of r^2 n by the lifted field. Normalised by
/// rms(n_t) + rms(u n_x + 2 n u_x), absolute when both vanish. resolved_band
/// projects the residual onto |k| <= n/3 before taking its norm.
double advected_vorticity_check(const PeriodicField& u, const PeriodicField& ut,
                                double alpha = 0.5, bool resolved_band = false);

struct Figure1Frame {
  double time;
  /// Set when the Jacobian was nonpositive; curves are then empty.
  bool truncated;
  std::vector<LiftedCurve> curves;
};

/// Curves of every radius for each flow snapshot, in snapshot order.
std::vector<Figure1Frame> figure1_emit(std::span<const FlowMap> snapshots,
                                       std::span<const double> radii);

}  // namespace conelab
