#include "conelab/ch_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace conelab {

namespace {

void require_finite(const PeriodicField& f, const char* what) {
  if (!f.is_finite()) throw Error(std::string(what) + ": non-finite state");
}

bool admissible(const PeriodicField& f) { return f.is_finite() && f.max_abs() < kFieldBlowup; }

void check_dt(double dt, const PeriodicField& u) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const double limit = cfl_limit(u);
  if (dt > limit) {
    std::ostringstream os;
    os << "time step " << dt << " exceeds CFL bound " << limit;
    throw InvalidArgument(os.str());
  }
}

PeriodicField momentum_flux(const PeriodicField& u, const PeriodicField& m) {
  PeriodicField r = dealiased_product(u, deriv(m, 1));
  r += 2.0 * dealiased_product(m, deriv(u, 1));
  return r *= -1.0;
}

}  // namespace

void validate_initial(const CH2State& s) {
  if (!(s.gravity > 0.0)) throw InvalidArgument("CH2 gravity must be positive");
  if (!(s.alpha >= 0.0)) throw InvalidArgument("alpha must be nonnegative");
  if (!(s.rho.min() > 0.0)) throw InvalidArgument("CH2 density must be positive at t = 0");
  if (!(s.m.grid() == s.rho.grid())) throw InvalidArgument("m and rho on different grids");
}

PeriodicField ch_rhs(const CHState& s) {
  require_finite(s.m, "ch_rhs");
  return momentum_flux(s.velocity(), s.m);
}

CH2Tendency ch2_rhs(const CH2State& s) {
  require_finite(s.m, "ch2_rhs");
  require_finite(s.rho, "ch2_rhs");
  const PeriodicField u = s.velocity();
  PeriodicField mt = momentum_flux(u, s.m);
  mt -= s.gravity * dealiased_product(s.rho, deriv(s.rho, 1));
  PeriodicField rt = deriv(dealiased_product(s.rho, u), 1) * -1.0;
  return {std::move(mt), std::move(rt)};
}

PeriodicField velocity_tendency(const CHState& s) { return helmholtz_inv(ch_rhs(s), s.alpha); }

CH2Tendency velocity_tendency(const CH2State& s) {
  CH2Tendency t = ch2_rhs(s);
  t.m = helmholtz_inv(t.m, s.alpha);
  return t;
}

double cfl_limit(const PeriodicField& u) {
  const double umax = u.max_abs();
  if (umax == 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 * u.grid().dx() / umax;
}

CHState step(const CHState& s, double dt) {
  check_dt(dt, s.velocity());
  auto shifted = [&](const PeriodicField& k, double h) { return CHState{s.m + h * k, s.alpha}; };
  const PeriodicField k1 = ch_rhs(s);
  const PeriodicField k2 = ch_rhs(shifted(k1, 0.5 * dt));
  const PeriodicField k3 = ch_rhs(shifted(k2, 0.5 * dt));
  const PeriodicField k4 = ch_rhs(shifted(k3, dt));
  CHState next{s.m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), s.alpha, s.t + dt};
  if (!admissible(next.m)) {
    std::ostringstream os;
    os << "CH step blew up at t=" << next.t;
    throw BlowupError(os.str(), s);
  }
  return next;
}

CH2State step(const CH2State& s, double dt) {
  check_dt(dt, s.velocity());
  auto shifted = [&](const CH2Tendency& k, double h) {
    return CH2State{s.m + h * k.m, s.rho + h * k.rho, s.alpha, s.gravity};
  };
  const CH2Tendency k1 = ch2_rhs(s);
  const CH2Tendency k2 = ch2_rhs(shifted(k1, 0.5 * dt));
  const CH2Tendency k3 = ch2_rhs(shifted(k2, 0.5 * dt));
  const CH2Tendency k4 = ch2_rhs(shifted(k3, dt));
  const double w = dt / 6.0;
  CH2State next{s.m + w * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m),
                s.rho + w * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho), s.alpha, s.gravity,
                s.t + dt};
  if (!admissible(next.m) || !admissible(next.rho)) {
    std::ostringstream os;
    os << "CH2 step blew up at t=" << next.t;
    throw BlowupError(os.str(), s);
  }
  return next;
}

double energy(const CHState& s) {
  const PeriodicField u = s.velocity();
  const PeriodicField ux = deriv(u, 1);
  return 0.5 * integrate(u * u + (s.alpha * s.alpha) * (ux * ux));
}

double energy(const CH2State& s) {
  const PeriodicField u = s.velocity();
  const PeriodicField ux = deriv(u, 1);
  return 0.5 * integrate(u * u + (s.alpha * s.alpha) * (ux * ux) + s.gravity * (s.rho * s.rho));
}

std::vector<double> FlowMap::positions() const {
  std::vector<double> p(displacement.size());
  for (int j = 0; j < displacement.size(); ++j) p[j] = grid().x(j) + displacement[j];
  return p;
}

void UniformVelocity::sample(double, std::span<const double> x, std::span<double> u,
                             std::span<double> ux) const {
  for (std::size_t i = 0; i < x.size(); ++i) {
    u[i] = c_;
    ux[i] = 0.0;
  }
}

void VelocityHistory::push(double t, const PeriodicField& u, const PeriodicField& ut) {
  if (!frames_.empty() && !(t > frames_.back().t))
    throw InvalidArgument("velocity snapshots must have increasing times");
  frames_.push_back({t, TrigSeries(u), TrigSeries(ut)});
  if (keep_last_ > 0 && frames_.size() > keep_last_)
    frames_.erase(frames_.begin(), frames_.end() - static_cast<std::ptrdiff_t>(keep_last_));
}

void VelocityHistory::sample(double t, std::span<const double> x, std::span<double> u,
                             std::span<double> ux) const {
  if (frames_.empty()) throw Error("velocity history is empty");
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  if (t < frames_.front().t - slack || t > frames_.back().t + slack)
    throw InvalidArgument("velocity requested outside the stored time window");
  if (frames_.size() == 1) {
    for (std::size_t i = 0; i < x.size(); ++i) std::tie(u[i], ux[i]) = frames_[0].u.value_and_slope(x[i]);
    return;
  }
  auto hi = std::upper_bound(frames_.begin(), frames_.end(), t,
                             [](double v, const Frame& f) { return v < f.t; });
  if (hi == frames_.begin()) ++hi;
  if (hi == frames_.end()) --hi;
  const Frame& a = *(hi - 1);
  const Frame& b = *hi;
  const double h = b.t - a.t;
  const double s = std::clamp((t - a.t) / h, 0.0, 1.0);
  // Cubic Hermite basis.
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto [ua, uxa] = a.u.value_and_slope(x[i]);
    const auto [ub, uxb] = b.u.value_and_slope(x[i]);
    const auto [ta, txa] = a.ut.value_and_slope(x[i]);
    const auto [tb, txb] = b.ut.value_and_slope(x[i]);
    u[i] = h00 * ua + h10 * h * ta + h01 * ub + h11 * h * tb;
    ux[i] = h00 * uxa + h10 * h * txa + h01 * uxb + h11 * h * txb;
  }
}

FlowAdvance flow_advance(const FlowMap& f, const VelocitySource& velocity, double t0, double t1,
                         double dt, double threshold) {
  if (!(dt > 0.0)) throw InvalidArgument("flow_advance: dt must be positive");
  if (t1 < t0) throw InvalidArgument("flow_advance: t1 < t0");
  const int n = f.displacement.size();
  const Grid1D& grid = f.grid();
  std::vector<double> disp(f.displacement.values().begin(), f.displacement.values().end());
  std::vector<double> jac(f.jacobian.values().begin(), f.jacobian.values().end());

  // Stage buffers: positions, velocities, slopes, increments.
  std::vector<double> pos(n), u(n), ux(n);
  std::vector<double> kd[4], kj[4];
  for (auto& v : kd) v.resize(n);
  for (auto& v : kj) v.resize(n);

  auto eval = [&](double t, const std::vector<double>& d, const std::vector<double>& J,
                  std::vector<double>& outd, std::vector<double>& outj) {
    for (int j = 0; j < n; ++j) pos[j] = grid.x(j) + d[j];
    velocity.sample(t, pos, u, ux);
    for (int j = 0; j < n; ++j) {
      outd[j] = u[j];
      outj[j] = ux[j] * J[j];
    }
  };

  const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt - 1e-9)));
  const double h = (t1 - t0) / steps;
  std::vector<double> td(n), tj(n);
  bool broke = false;
  double t = t0;
  for (int s = 0; s < steps && h > 0.0; ++s) {
    eval(t, disp, jac, kd[0], kj[0]);
    for (int st = 1; st < 4; ++st) {
      const double c = (st == 3) ? h : 0.5 * h;
      for (int j = 0; j < n; ++j) {
        td[j] = disp[j] + c * kd[st - 1][j];
        tj[j] = jac[j] + c * kj[st - 1][j];
      }
      eval(t + c, td, tj, kd[st], kj[st]);
    }
    for (int j = 0; j < n; ++j) {
      disp[j] += h / 6.0 * (kd[0][j] + 2 * kd[1][j] + 2 * kd[2][j] + kd[3][j]);
      jac[j] += h / 6.0 * (kj[0][j] + 2 * kj[1][j] + 2 * kj[2][j] + kj[3][j]);
    }
    t = (s + 1 == steps) ? t1 : t0 + (s + 1) * h;
    if (*std::min_element(jac.begin(), jac.end()) < threshold) {
      broke = true;
      break;
    }
  }
  FlowMap out{PeriodicField(grid, std::move(disp)), PeriodicField(grid, std::move(jac)), t};
  return {std::move(out), broke};
}

double blowup_monitor(const FlowMap& f) { return f.jacobian.min(); }

namespace {

double integral_rho(const CHState&) { return 0.0; }
double integral_rho(const CH2State& s) { return integrate(s.rho); }

PeriodicField du_dt(const CHState& s) { return velocity_tendency(s); }
PeriodicField du_dt(const CH2State& s) { return velocity_tendency(s).m; }

template <class State>
Run<State> simulate_impl(const State& initial, const RunOptions& opts) {
  if (!(opts.dt > 0.0) || !(opts.T >= 0.0)) throw InvalidArgument("simulate: need dt > 0, T >= 0");
  Run<State> run{initial, FlowMap::identity(initial.m.grid(), initial.t), {}, {}, nullptr};
  run.history = std::make_shared<VelocityHistory>(opts.keep_history ? 0 : 2);

  auto record = [&](const State& s) {
    run.series.push_back({s.t, energy(s), integrate(s.m), integral_rho(s), blowup_monitor(run.flow)});
  };

  State s = initial;
  record(s);
  if (opts.track_flow) run.history->push(s.t, s.velocity(), du_dt(s));
  const int steps = static_cast<int>(std::llround(opts.T / opts.dt));
  const int every = std::max(1, opts.record_every);
  for (int k = 0; k < steps; ++k) {
    State next = s;
    try {
      next = step(s, opts.dt);
    } catch (const BlowupError& e) {
      run.stop_reason = e.what();
      break;
    } catch (const InvalidArgument& e) {
      run.stop_reason = e.what();
      break;
    }
    next.t = initial.t + (k + 1) * opts.dt;
    if (opts.track_flow) {
      run.history->push(next.t, next.velocity(), du_dt(next));
      FlowAdvance adv = flow_advance(run.flow, *run.history, s.t, next.t, opts.dt);
      run.flow = std::move(adv.map);
      if (adv.broke) {
        s = std::move(next);
        record(s);
        std::ostringstream os;
        os << "flow Jacobian fell below " << kJacobianBlowup << " at t=" << s.t;
        run.stop_reason = os.str();
        break;
      }
    }
    s = std::move(next);
    if ((k + 1) % every == 0 || k + 1 == steps) record(s);
  }
  if (!run.stop_reason.empty() && run.series.back().t != s.t) record(s);
  run.final_state = s;
  return run;
}

}  // namespace

CHRun simulate(const CHState& initial, const RunOptions& opts) { return simulate_impl(initial, opts); }

CH2Run simulate(const CH2State& initial, const RunOptions& opts) {
  validate_initial(initial);
  return simulate_impl(initial, opts);
}

}  // namespace conelab
