#include "conelab/cone_lift.hpp"

#include <algorithm>
#include <cmath>

namespace conelab {

namespace {

void require_positive_radii(std::span<const double> radii) {
  for (double r : radii)
    if (!(r > 0.0)) throw InvalidArgument("lift radii must be positive");
}

// Derivative at node i of the Lagrange basis polynomial attached to node k.
double lagrange_slope(std::span<const double> r, std::size_t k, std::size_t i) {
  if (k == i) {
    double s = 0.0;
    for (std::size_t m = 0; m < r.size(); ++m)
      if (m != i) s += 1.0 / (r[i] - r[m]);
    return s;
  }
  double num = 1.0;
  double den = 1.0;
  for (std::size_t m = 0; m < r.size(); ++m) {
    if (m != k) den *= r[k] - r[m];
    if (m != k && m != i) num *= r[i] - r[m];
  }
  return num / den;
}

}  // namespace

std::vector<ConeSample> lift_velocity(const PeriodicField& u, std::span<const double> radii) {
  require_positive_radii(radii);
  const PeriodicField ux = deriv(u, 1);
  std::vector<ConeSample> out;
  out.reserve(radii.size() * u.size());
  for (double r : radii)
    for (int j = 0; j < u.size(); ++j) out.push_back({u.grid().x(j), r, 0.5 * r * ux[j], r * u[j]});
  return out;
}

std::vector<LiftedCurve> lift_flow(const FlowMap& f, std::span<const double> radii) {
  require_positive_radii(radii);
  if (!(f.jacobian.min() > 0.0))
    throw DomainError("flow Jacobian is not positive; the map is no longer a diffeomorphism");
  const std::vector<double> phi = f.positions();
  std::vector<LiftedCurve> curves;
  for (double r : radii) {
    LiftedCurve c{r, {}};
    c.points.reserve(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j)
      c.points.push_back(std::polar(r * std::sqrt(f.jacobian[static_cast<int>(j)]), phi[j]));
    curves.push_back(std::move(c));
  }
  return curves;
}

Momentum1Form momentum_oneform(const PeriodicField& u, double alpha) {
  return {u - (alpha * alpha) * deriv(u, 2)};
}

CurlCheck curl_identity_residual(const PeriodicField& u, std::span<const double> radii) {
  require_positive_radii(radii);
  const std::size_t nr = radii.size();
  if (nr < 3) throw InvalidArgument("curl check needs at least three radii");
  for (std::size_t a = 0; a < nr; ++a)
    for (std::size_t b = a + 1; b < nr; ++b)
      if (radii[a] == radii[b]) throw InvalidArgument("curl check radii must be distinct");

  const Grid1D& g = u.grid();
  const int n = g.n();
  // Tabulate the lifted field on the (theta, r) grid.
  const auto samples = lift_velocity(u, radii);
  std::vector<PeriodicField> vr(nr, PeriodicField(g)), r_vtheta(nr, PeriodicField(g));
  for (std::size_t i = 0; i < nr; ++i)
    for (int j = 0; j < n; ++j) {
      const ConeSample& s = samples[i * n + j];
      vr[i][j] = s.v_r;
      r_vtheta[i][j] = s.r * s.v_theta;
    }

  std::vector<PeriodicField> curl;
  for (std::size_t i = 0; i < nr; ++i) {
    PeriodicField d_r(g);
    for (std::size_t k = 0; k < nr; ++k) d_r += lagrange_slope(radii, k, i) * r_vtheta[k];
    curl.push_back((1.0 / radii[i]) * (d_r - deriv(vr[i], 1)));
  }

  const PeriodicField expected = 2.0 * u - 0.5 * deriv(u, 2);
  double worst = 0.0;
  for (const auto& c : curl) worst = std::max(worst, rms(c - expected));
  const double scale = rms(expected);
  double spread = 0.0;
  for (std::size_t a = 0; a < nr; ++a)
    for (std::size_t b = a + 1; b < nr; ++b) spread = std::max(spread, (curl[a] - curl[b]).max_abs());
  return {scale > 0.0 ? worst / scale : worst, spread};
}

double advected_vorticity_check(const PeriodicField& u, const PeriodicField& ut, double alpha,
                                bool resolved_band) {
  const double a2 = alpha * alpha;
  const PeriodicField n = u - a2 * deriv(u, 2);
  const PeriodicField nt = ut - a2 * deriv(ut, 2);
  const PeriodicField transport = u * deriv(n, 1) + 2.0 * (n * deriv(u, 1));
  const double scale = rms(nt) + rms(transport);
  const double res = rms(resolved_band ? dealias(nt + transport) : nt + transport);
  return scale > 0.0 ? res / scale : res;
}

std::vector<Figure1Frame> figure1_emit(std::span<const FlowMap> snapshots,
                                       std::span<const double> radii) {
  require_positive_radii(radii);
  std::vector<Figure1Frame> frames;
  for (const FlowMap& f : snapshots) {
    if (!(f.jacobian.min() > 0.0)) {
      frames.push_back({f.t, true, {}});
      continue;
    }
    frames.push_back({f.t, false, lift_flow(f, radii)});
  }
  return frames;
}

}  // namespace conelab
