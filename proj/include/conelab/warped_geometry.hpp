#pragma once

// Geodesics of warped products g_M + w g_N, the Eisenhart lift of
// potential motion, the diagonal metrics of the Euler embeddings and their
// sectional curvature (closed warped-product formula and a finite-difference
// Riemann tensor).

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "conelab/error.hpp"

namespace conelab {

using Vec = std::vector<double>;

/// A scalar function on R^k with its gradient and (optionally) Hessian,
/// the latter row-major k x k.
struct SmoothFunction {
  int dim = 1;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Vec(const Vec&)> hessian;

  static SmoothFunction constant(int dim, double c);
  /// c0 + (c2 / 2) |x|^2.
  static SmoothFunction quadratic(int dim, double c0, double c2);
  /// (|x|^2)^p, singular at the origin for p < 0.
  static SmoothFunction radial_power(int dim, double p);
  /// sin^2 of the single coordinate.
  static SmoothFunction sin_squared();
  /// 1 / f; needs f's Hessian for the Hessian of the result.
  static SmoothFunction reciprocal(const SmoothFunction& f);
};

/// Time-dependent force on the base.
using ForceField = std::function<Vec(double t, const Vec& x)>;

struct WarpedConfig {
  int dim_M = 1;
  int dim_N = 1;
  SmoothFunction warp;
  std::optional<SmoothFunction> potential;
  ForceField force;
  /// Sectional curvatures of the factors; 0 means flat.
  double K_M = 0.0;
  double K_N = 0.0;
};

struct GeodesicState {
  Vec x, xdot, y, ydot;
  double t = 0.0;
};

struct GeodesicTendency {
  Vec x, xdot, y, ydot;
};

/// x'' = 1/2 |y'|^2 grad w + F, y'' = -y' (grad w . x') / w. Flat factors
/// only; throws DomainError when w <= 0 at the current point.
GeodesicTendency warped_rhs(const GeodesicState& s, const WarpedConfig& c);

/// x'' = -grad V + F, the direct potential system (y components unused).
GeodesicTendency potential_rhs(const GeodesicState& s, const WarpedConfig& c);

using GeodesicRhs = std::function<GeodesicTendency(const GeodesicState&, const WarpedConfig&)>;

GeodesicState geodesic_step(const GeodesicState& s, const WarpedConfig& c, double dt,
                            const GeodesicRhs& rhs = warped_rhs);

/// g_N(y', y') w(x)^2.
double conserved_c(const GeodesicState& s, const WarpedConfig& c);
/// g_M(x', x') + w(x) g_N(y', y').
double warped_energy(const GeodesicState& s, const WarpedConfig& c);

struct TrajectoryRow {
  double t;
  Vec x, xdot, y, ydot;
  double c;
  double energy;
};

/// RK4 trajectory from s to T with step dt, one row every record_every steps
/// plus the final state.
std::vector<TrajectoryRow> integrate_geodesic(const GeodesicState& s, const WarpedConfig& c,
                                              double dt, double T, int record_every = 1,
                                              const GeodesicRhs& rhs = warped_rhs);

struct EisenhartProblem {
  SmoothFunction V;
  Vec x0;
  Vec v0;
  double T = 10.0;
  double dt = 1e-4;
  ForceField force;
  /// Optional exact base trajectory to compare against.
  std::function<Vec(double)> exact;
};

struct EisenhartReport {
  /// max over time of |x_warped - x_direct|.
  double max_deviation = 0.0;
  /// max over time of |x_warped - exact|, NaN without an exact solution.
  double max_exact_error = 0.0;
  /// max relative drift of c along the warped trajectory.
  double c_drift = 0.0;
  double c = 0.0;
  long steps = 0;
};

/// Integrates the direct system and the warped geodesic with w = 1/V,
/// fiber speed sqrt(2) V(x0) so that c = 2, and compares base trajectories.
/// Throws DomainError when V <= 0 is met.
EisenhartReport eisenhart_verify(const EisenhartProblem& p);

/// Diagonal metric sum_i g_i(x) (dx^i)^2.
struct MetricDescriptor {
  std::string kind;
  std::vector<std::string> names;
  std::vector<std::function<double(const Vec&)>> coefficients;
  /// Sampling box of each coordinate for curvature scans.
  std::vector<std::pair<double, double>> sample_range;
  /// Exponent k of the r^{-k} fiber coefficient, 0 when not applicable.
  int fiber_exponent = 0;

  int dim() const { return static_cast<int>(names.size()); }
  Vec diagonal(const Vec& x) const;
};

enum class LiftKind { euclidean, sphere2, ch_cone, tao, ch2_corollary };

struct LiftSpec {
  LiftKind kind = LiftKind::ch_cone;
  /// Dimension of M for ch_cone, of the space for euclidean.
  int d = 1;
  /// Potential for tao (one base coordinate).
  std::optional<SmoothFunction> V;
};

LiftKind parse_lift_kind(const std::string& name);

/// ch_cone(d): (x_1..x_d, r, z) with r^2, .., r^2, 1, r^{-2(3+d)}.
/// ch2_corollary: (theta, r, y, z) with r^2, 1, r^2, r^{-10}.
/// tao(V): (x, z, y) with 1, 1/V, V.
MetricDescriptor build_lift_metric(const LiftSpec& spec);

/// A metric written as a warped product, with the map from its own
/// coordinates/vectors to (base point, base vector, fiber vector).
struct WarpedChart {
  WarpedConfig config;
  std::function<Vec(const Vec& point)> base_point;
  std::function<std::pair<Vec, Vec>(const Vec& point, const Vec& X)> split;
};

/// Warped form of euclidean, sphere2 and ch_cone(1); nullopt otherwise.
std::optional<WarpedChart> warped_form(const LiftSpec& spec);

enum class WarpReading {
  /// The formula's warp function is f = sqrt(w), the metric being g_M + f^2 g_N.
  root,
  /// The formula evaluated with w itself.
  literal,
};

/// Unnormalised curvature pairing of the planes spanned by (u1, v1) and
/// (u2, v2) at base point x from the warped-product formula.
double sectional_numerator(const WarpedConfig& c, const Vec& x, const Vec& u1, const Vec& v1,
                           const Vec& u2, const Vec& v2, WarpReading reading = WarpReading::root);

/// <R(X,Y)Y,X> from centred finite differences of the metric coefficients.
/// Throws DomainError if a coefficient is nonpositive or non-finite on the stencil.
double riemann_fd_oracle(const MetricDescriptor& m, const Vec& point, const Vec& X, const Vec& Y);

/// g(X,X) g(Y,Y) - g(X,Y)^2.
double plane_area2(const MetricDescriptor& m, const Vec& point, const Vec& X, const Vec& Y);

/// Uniform point in the descriptor's sampling box.
Vec random_point(const MetricDescriptor& m, std::mt19937_64& rng);

/// Gaussian pair in the metric-orthonormal frame at the point, Gram-Schmidt
/// orthonormalised; pairs with area^2 < 1e-12 are redrawn.
std::pair<Vec, Vec> random_plane(const MetricDescriptor& m, const Vec& point, std::mt19937_64& rng);

/// Largest |K| over the coordinate planes at the point, from the FD oracle.
double curvature_scale(const MetricDescriptor& m, const Vec& point);

struct FormulaCrossCheck {
  int samples = 0;
  /// max |K_formula - K_fd| / max(|K_fd|, curvature_scale) over the samples.
  double max_rel = 0.0;
  /// Same against |K_fd| alone (ill-conditioned where K changes sign).
  double max_rel_pointwise = 0.0;
  /// Scale-relative error of the formula read with w in place of sqrt(w).
  double max_rel_literal = 0.0;
};

/// Compares sectional_numerator on the warped chart with riemann_fd_oracle
/// on random points and planes; throws InvalidArgument without a chart.
FormulaCrossCheck cross_validate_formula(const LiftSpec& spec, int samples, std::uint64_t seed);

struct CurvatureScan {
  std::string metric;
  long samples = 0;
  double max_curvature = 0.0;
  double min_curvature = 0.0;
  Vec argmax_point, argmax_X, argmax_Y;
};

/// Random points in the descriptor's sampling box and random planes
/// (Gaussian pairs orthonormalised in the metric) scored by the FD oracle.
CurvatureScan curvature_sign_scan(const MetricDescriptor& m, int n_points, int n_planes,
                                  std::uint64_t seed);

}  // namespace conelab
