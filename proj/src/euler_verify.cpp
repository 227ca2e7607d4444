#include "conelab/euler_verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace conelab {

namespace {

ResidualReport make_report(std::string label, const PeriodicField& residual, double scale,
                           double dt = 0.0) {
  ResidualReport r;
  r.label = std::move(label);
  r.abs_l2 = rms(residual);
  r.linf = residual.max_abs();
  r.l2 = scale > 0.0 ? r.abs_l2 / scale : r.abs_l2;
  r.resolution = residual.size();
  r.dt = dt;
  return r;
}

void require_same_grid(const PeriodicField& a, const PeriodicField& b) {
  if (!(a.grid() == b.grid())) throw InvalidArgument("fields live on different grids");
}

double field_max(const Field2D& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

double DivergenceResidual::max_abs() const {
  double m = 0.0;
  for (const auto& f : residual) m = std::max(m, f.max_abs());
  return m;
}

DivergenceResidual weighted_divergence(const PeriodicField& u, std::span<const double> radii) {
  const auto samples = lift_velocity(u, radii);
  const Grid1D& g = u.grid();
  const int n = g.n();
  DivergenceResidual out;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    const double rho = std::pow(r, -4.0);
    PeriodicField flux_r(g), flux_theta(g);
    for (int j = 0; j < n; ++j) {
      const ConeSample& s = samples[i * n + j];
      // r rho v_r = C r^{-2}, so d_r of it is -2 C r^{-3}.
      const double c = r * r * (r * rho * s.v_r);
      flux_r[j] = -2.0 * c / (r * r * r);
      flux_theta[j] = rho * s.v_theta;
    }
    out.radii.push_back(r);
    out.residual.push_back((1.0 / r) * (flux_r + deriv(flux_theta, 1)));
  }
  return out;
}

double PressureProfile::at(double theta, double r) const {
  const double v = interp(p, std::span<const double>(&theta, 1))[0];
  return r * r * v;
}

PressureProfile pressure_recover(const PeriodicField& u, const PeriodicField& ut,
                                 double aperture) {
  require_same_grid(u, ut);
  if (!(aperture > 0.0)) throw InvalidArgument("cone aperture must be positive");
  const double a2 = aperture * aperture;
  const PeriodicField ux = deriv(u, 1);
  const PeriodicField bracket =
      0.5 * deriv(ut, 1) + 0.25 * (ux * ux) + 0.5 * (u * deriv(u, 2)) - (1.0 / a2) * (u * u);
  return {-(0.5 * a2) * bracket};
}

ResidualReport euler_consistency_residual(const PeriodicField& u, const PeriodicField& ut,
                                          double aperture, bool resolved_band) {
  const PressureProfile pr = pressure_recover(u, ut, aperture);
  PeriodicField residual = -1.0 * deriv(pr.p, 1) - (ut + 2.0 * (u * deriv(u, 1)));
  if (resolved_band) residual = dealias(residual);
  const double s = rms(u);
  return make_report("euler_consistency", residual, rms(ut) + s * s);
}

CH2LiftReport ch2_lift_residual(const PeriodicField& u, const PeriodicField& rho,
                                const PeriodicField& ut, const PeriodicField& rhot, double alpha,
                                double gravity, int ny, bool resolved_band) {
  require_same_grid(u, rho);
  require_same_grid(u, ut);
  require_same_grid(u, rhot);
  if (!(gravity > 0.0)) throw InvalidArgument("CH2 lift needs g > 0");
  const double a2 = alpha * alpha;
  const double sigma = std::sqrt(gravity);

  const PeriodicField ux = deriv(u, 1);
  const PeriodicField n = u - a2 * deriv(u, 2);
  const PeriodicField nt = ut - a2 * deriv(ut, 2);
  const PeriodicField transport_x =
      u * deriv(n, 1) + 2.0 * (n * ux) + gravity * (rho * deriv(rho, 1));
  const PeriodicField transport_y = sigma * (u * deriv(rho, 1) + rho * ux);
  PeriodicField rx = nt + transport_x;
  PeriodicField ry = sigma * rhot + transport_y;
  if (resolved_band) {
    rx = dealias(rx);
    ry = dealias(ry);
  }

  CH2LiftReport rep;
  rep.dx = make_report("ch2_lift_dx", rx, rms(nt) + rms(transport_x));
  rep.dy = make_report("ch2_lift_dy", ry, sigma * rms(rhot) + rms(transport_y));
  if (ny <= 0 || resolved_band) return rep;

  const Grid1D gy(ny);
  const Field2D w1 = Field2D::extrude_y(u, gy);
  const Field2D w2 = sigma * Field2D::extrude_y(rho, gy);
  const Field2D w1t = Field2D::extrude_y(ut, gy);
  const Field2D w2t = sigma * Field2D::extrude_y(rhot, gy);

  const auto momentum = [&](const Field2D& v1, const Field2D& v2) {
    const Field2D div = partial(v1, 0) + partial(v2, 1);
    return std::pair{v1 - a2 * partial(div, 0), v2 - a2 * partial(div, 1)};
  };
  const auto [a, b] = momentum(w1, w2);
  const auto [at, bt] = momentum(w1t, w2t);
  const Field2D div = partial(w1, 0) + partial(w2, 1);

  const Field2D lie_x =
      w1 * partial(a, 0) + w2 * partial(a, 1) + a * partial(w1, 0) + b * partial(w2, 0);
  const Field2D lie_y =
      w1 * partial(b, 0) + w2 * partial(b, 1) + a * partial(w1, 1) + b * partial(w2, 1);
  const Field2D rx2 = at + lie_x + div * a;
  const Field2D ry2 = bt + lie_y + div * b;

  double mismatch = 0.0;
  double scale = 0.0;
  for (int i = 0; i < rx2.nx(); ++i)
    for (int j = 0; j < rx2.ny(); ++j) {
      mismatch = std::max(mismatch, std::abs(rx2.at(i, j) - rx[i]));
      mismatch = std::max(mismatch, std::abs(ry2.at(i, j) - ry[i]));
    }
  scale = std::max({field_max(at), field_max(bt), field_max(lie_x), field_max(lie_y), 1e-300});
  rep.grid2d_mismatch = mismatch / scale;
  return rep;
}

Identity parse_identity(const std::string& name) {
  if (name == "divergence") return Identity::divergence;
  if (name == "consistency") return Identity::consistency;
  if (name == "ch2_lift") return Identity::ch2_lift;
  if (name == "curl") return Identity::curl;
  if (name == "vorticity_advect") return Identity::vorticity_advect;
  throw InvalidArgument("unknown identity '" + name + "'");
}

std::string identity_name(Identity id) {
  switch (id) {
    case Identity::divergence: return "divergence";
    case Identity::consistency: return "consistency";
    case Identity::ch2_lift: return "ch2_lift";
    case Identity::curl: return "curl";
    case Identity::vorticity_advect: return "vorticity_advect";
  }
  return "?";
}

namespace {

long checked_steps(double dt, double T) {
  if (!(dt > 0.0) || !(T >= 0.0)) throw InvalidArgument("need dt > 0 and T >= 0");
  const long steps = std::lround(T / dt);
  if (std::abs(steps * dt - T) > 1e-9 * std::max(1.0, T))
    throw InvalidArgument("T must be a multiple of dt");
  return steps;
}

// Runs the stepper and keeps the states the stencil needs around step N.
template <class State>
std::vector<State> stencil_states(const State& initial, double dt, double T, FdStencil stencil,
                                  bool monitor_flow) {
  const long n = checked_steps(dt, T);
  const long before = stencil == FdStencil::centered4 ? 2 : 1;
  const long after = stencil == FdStencil::centered4 ? 2 : 0;
  if (n < before) throw InvalidArgument("T too short for the finite-difference stencil");
  std::vector<State> kept;
  State s = initial;
  long k0 = 0;
  if (monitor_flow && n - before > 0) {
    RunOptions opts;
    opts.dt = dt;
    opts.T = (n - before) * dt;
    opts.track_flow = true;
    opts.record_every = static_cast<int>(n);
    auto run = simulate(initial, opts);
    if (!run.completed()) throw Error("time integration stopped early: " + run.stop_reason);
    s = run.final_state;
    k0 = n - before;
  }
  for (long k = k0; k <= n + after; ++k) {
    if (k >= n - before) kept.push_back(s);
    if (k == n + after) break;
    s = step(s, dt);
  }
  return kept;
}

PeriodicField fd_rate(const std::vector<PeriodicField>& f, double dt, FdStencil stencil) {
  if (stencil == FdStencil::centered4)
    return (1.0 / (12.0 * dt)) * (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]);
  return (1.0 / dt) * (f[1] - f[0]);
}

std::size_t centre_index(FdStencil stencil) { return stencil == FdStencil::centered4 ? 2 : 1; }

}  // namespace

FdSample fd_time_derivative(const CHState& initial, double dt, double T, FdStencil stencil,
                            bool monitor_flow) {
  const auto states = stencil_states(initial, dt, T, stencil, monitor_flow);
  std::vector<PeriodicField> u;
  for (const auto& s : states) u.push_back(dealias(s.velocity()));
  return {u[centre_index(stencil)], dealias(fd_rate(u, dt, stencil)), std::nullopt,
          std::nullopt};
}

FdSample fd_time_derivative(const CH2State& initial, double dt, double T, FdStencil stencil,
                            bool monitor_flow) {
  const auto states = stencil_states(initial, dt, T, stencil, monitor_flow);
  std::vector<PeriodicField> u, rho;
  for (const auto& s : states) {
    u.push_back(dealias(s.velocity()));
    rho.push_back(dealias(s.rho));
  }
  const std::size_t c = centre_index(stencil);
  return {u[c], dealias(fd_rate(u, dt, stencil)), rho[c], dealias(fd_rate(rho, dt, stencil))};
}

double observed_order(double h1, double e1, double h2, double e2) {
  if (!(h1 > 0.0 && h2 > 0.0 && e1 > 0.0 && e2 > 0.0) || h1 == h2)
    return std::numeric_limits<double>::quiet_NaN();
  return std::log(e1 / e2) / std::log(h1 / h2);
}

namespace {

ResidualReport evaluate_identity(const SweepOptions& o, const Grid1D& grid, double dt) {
  if (!o.initial_u) throw InvalidArgument("sweep needs an initial velocity");
  const PeriodicField u0 = o.initial_u(grid);
  const bool exact = dt == 0.0;
  ResidualReport rep;

  switch (o.identity) {
    case Identity::divergence:
    case Identity::curl: {
      PeriodicField u = u0;
      if (!exact) u = fd_time_derivative(CHState::from_velocity(u0, o.alpha), dt, o.T, o.stencil,
                               o.monitor_flow)
                .u;
      if (o.identity == Identity::curl) {
        const CurlCheck c = curl_identity_residual(u);
        rep.l2 = c.relative_error;
        rep.linf = c.radial_spread;
        rep.abs_l2 = c.relative_error * rms(2.0 * u - 0.5 * deriv(u, 2));
      } else {
        const DivergenceResidual d = weighted_divergence(u);
        double scale = 0.0;
        for (double r : d.radii) scale = std::max(scale, std::pow(r, -4.0) * deriv(u, 1).max_abs());
        rep.linf = d.max_abs();
        for (const auto& f : d.residual) rep.abs_l2 = std::max(rep.abs_l2, rms(f));
        rep.l2 = scale > 0.0 ? rep.linf / scale : rep.linf;
      }
      break;
    }
    case Identity::consistency:
    case Identity::vorticity_advect: {
      const CHState s0 = CHState::from_velocity(u0, o.alpha);
      PeriodicField u = s0.velocity();
      PeriodicField ut = velocity_tendency(s0);
      if (!exact) {
        FdSample fd = fd_time_derivative(s0, dt, o.T, o.stencil, o.monitor_flow);
        u = std::move(fd.u);
        ut = std::move(fd.ut);
      }
      if (o.identity == Identity::consistency) {
        rep = euler_consistency_residual(u, ut, 2.0 * o.alpha, !exact);
      } else {
        const double a2 = o.alpha * o.alpha;
        const PeriodicField n = u - a2 * deriv(u, 2);
        PeriodicField res = (ut - a2 * deriv(ut, 2)) + u * deriv(n, 1) + 2.0 * (n * deriv(u, 1));
        if (!exact) res = dealias(res);
        rep.l2 = advected_vorticity_check(u, ut, o.alpha, !exact);
        rep.linf = res.max_abs();
        rep.abs_l2 = rms(res);
      }
      break;
    }
    case Identity::ch2_lift: {
      if (!o.initial_rho) throw InvalidArgument("ch2_lift sweep needs an initial density");
      const CH2State s0 =
          CH2State::from_velocity(u0, o.initial_rho(grid), o.alpha, o.gravity);
      validate_initial(s0);
      PeriodicField u = s0.velocity();
      PeriodicField rho = s0.rho;
      const CH2Tendency tend = velocity_tendency(s0);
      PeriodicField ut = tend.m;
      PeriodicField rhot = tend.rho;
      if (!exact) {
        FdSample fd = fd_time_derivative(s0, dt, o.T, o.stencil, o.monitor_flow);
        u = std::move(fd.u);
        ut = std::move(fd.ut);
        rho = std::move(*fd.rho);
        rhot = std::move(*fd.rhot);
      }
      const CH2LiftReport lr = ch2_lift_residual(u, rho, ut, rhot, o.alpha, o.gravity, 0, !exact);
      rep = lr.dx.l2 >= lr.dy.l2 ? lr.dx : lr.dy;
      break;
    }
  }
  rep.label = identity_name(o.identity);
  rep.resolution = grid.n();
  rep.dt = dt;
  return rep;
}

}  // namespace

SweepTable convergence_sweep(const SweepOptions& opts) {
  if (opts.resolutions.empty() || opts.dts.empty())
    throw InvalidArgument("sweep needs at least one resolution and one dt");
  SweepTable table;
  for (int n : opts.resolutions) {
    const Grid1D grid(n);
    std::vector<ResidualReport> at_n;
    for (double dt : opts.dts) {
      if (dt < 0.0) throw InvalidArgument("sweep dts must be nonnegative");
      at_n.push_back(evaluate_identity(opts, grid, dt));
    }
    for (std::size_t i = 0; i + 1 < at_n.size(); ++i)
      if (at_n[i].dt > 0.0 && at_n[i + 1].dt > 0.0)
        table.dt_orders.push_back(
            observed_order(at_n[i].dt, at_n[i].l2, at_n[i + 1].dt, at_n[i + 1].l2));
    table.rows.insert(table.rows.end(), at_n.begin(), at_n.end());
  }
  // Decay in n for the exact-tendency rows.
  std::vector<const ResidualReport*> exact;
  for (const auto& r : table.rows)
    if (r.dt == 0.0) exact.push_back(&r);
  for (std::size_t i = 0; i + 1 < exact.size(); ++i)
    table.n_orders.push_back(observed_order(1.0 / exact[i]->resolution, exact[i]->l2,
                                            1.0 / exact[i + 1]->resolution, exact[i + 1]->l2));
  return table;
}

}  // namespace conelab
