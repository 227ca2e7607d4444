#include "conelab/peakon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace conelab {

GreenKernel GreenKernel::line(double alpha, KernelNormalization norm) {
  if (!(alpha > 0.0)) throw InvalidArgument("kernel alpha must be positive");
  return {KernelDomain::line, alpha, 0.0, norm};
}

GreenKernel GreenKernel::circle(double alpha, double length, KernelNormalization norm) {
  if (!(alpha > 0.0)) throw InvalidArgument("kernel alpha must be positive");
  if (!(length > 0.0)) throw InvalidArgument("circle circumference must be positive");
  return {KernelDomain::circle, alpha, length, norm};
}

double GreenKernel::reduce(double x) const {
  if (domain == KernelDomain::line) return x;
  const double L = circumference;
  double y = std::fmod(x + 0.5 * L, L);
  if (y < 0.0) y += L;
  return y - 0.5 * L;
}

GreenValue green_eval(const GreenKernel& k, double x) {
  const double a = k.alpha;
  const double scale = k.normalization == KernelNormalization::unit_peak ? 2.0 * a : 1.0;
  double value = 0.0;
  double slope = 0.0;
  if (k.domain == KernelDomain::line) {
    const double e = std::exp(-std::abs(x) / a) / (2.0 * a);
    value = e;
    slope = (x > 0.0) ? -e / a : (x < 0.0 ? e / a : 0.0);
  } else {
    // cosh((|x| - L/2)/a) / (2a sinh(L/(2a))), written with decaying exponentials
    // so that small alpha does not overflow.
    const double y = k.reduce(x);
    const double b = 0.5 * k.circumference / a;
    const double s = std::abs(y) / a - b;  // in [-b, 0]
    const double denom = 2.0 * a * (1.0 - std::exp(-2.0 * b));
    const double ep = std::exp(s - b);
    const double em = std::exp(-s - b);
    value = (ep + em) / denom;
    const double sinh_term = (ep - em) / (denom * a);  // d/d|x|
    slope = (y > 0.0) ? sinh_term : (y < 0.0 ? -sinh_term : 0.0);
  }
  return {scale * value, scale * slope};
}

std::pair<double, double> peakon_field_and_slope(const PeakonEnsemble& e, double x) {
  double u = 0.0;
  double ux = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const GreenValue g = green_eval(e.kernel, x - e.q[i]);
    u += e.p[i] * g.value;
    ux += e.p[i] * g.slope;
  }
  return {u, ux};
}

double peakon_field(const PeakonEnsemble& e, double x) { return peakon_field_and_slope(e, x).first; }

PeriodicField sample_peakons(const PeakonEnsemble& e, const Grid1D& grid) {
  return PeriodicField::sample(grid, [&](double x) { return peakon_field(e, x); });
}

PeakonTendency peakon_rhs(const PeakonEnsemble& e) {
  const std::size_t n = e.size();
  if (e.p.size() != n || n == 0) throw InvalidArgument("peakon ensemble needs matching q, p (>= 1)");
  PeakonTendency r{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    double slope_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = e.kernel.reduce(e.q[i] - e.q[j]);
      if (i != j && std::abs(d) < 1e-12 && std::abs(e.p[i] + e.p[j]) > 1e-12)
        throw CollisionError("peakons " + std::to_string(i) + " and " + std::to_string(j) +
                             " coincide");
      const GreenValue g = green_eval(e.kernel, d);
      r.dq[i] += e.p[j] * g.value;
      slope_sum += e.p[j] * g.slope;
    }
    r.dp[i] = -e.p[i] * slope_sum;
  }
  return r;
}

PeakonEnsemble peakon_step(const PeakonEnsemble& e, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("peakon step must be positive");
  auto shifted = [&](const PeakonTendency& k, double h) {
    PeakonEnsemble s = e;
    for (std::size_t i = 0; i < e.size(); ++i) {
      s.q[i] += h * k.dq[i];
      s.p[i] += h * k.dp[i];
    }
    return s;
  };
  const PeakonTendency k1 = peakon_rhs(e);
  const PeakonTendency k2 = peakon_rhs(shifted(k1, 0.5 * dt));
  const PeakonTendency k3 = peakon_rhs(shifted(k2, 0.5 * dt));
  const PeakonTendency k4 = peakon_rhs(shifted(k3, dt));
  PeakonEnsemble next = e;
  for (std::size_t i = 0; i < e.size(); ++i) {
    next.q[i] = e.kernel.reduce(e.q[i] + dt / 6.0 * (k1.dq[i] + 2 * k2.dq[i] + 2 * k3.dq[i] + k4.dq[i]));
    next.p[i] += dt / 6.0 * (k1.dp[i] + 2 * k2.dp[i] + 2 * k3.dp[i] + k4.dp[i]);
  }
  next.t = e.t + dt;
  return next;
}

double hamiltonian(const PeakonEnsemble& e) {
  double h = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = 0; j < e.size(); ++j)
      h += e.p[i] * e.p[j] * green_eval(e.kernel, e.q[i] - e.q[j]).value;
  return 0.5 * h;
}

double total_momentum(const PeakonEnsemble& e) {
  double s = 0.0;
  for (double v : e.p) s += v;
  return s;
}

PeakonEnsemble collision_scenario(double p0, double q0, const GreenKernel& kernel) {
  if (!(p0 > 0.0)) throw InvalidArgument("collision scenario needs p0 > 0");
  const double limit = kernel.domain == KernelDomain::circle ? 0.5 * kernel.circumference
                                                             : std::numeric_limits<double>::infinity();
  if (!(q0 > 0.0 && q0 < limit)) throw InvalidArgument("collision scenario needs 0 < q0 < L/2");
  return {{-q0, q0}, {p0, -p0}, kernel, 0.0};
}

double min_gap(const PeakonEnsemble& e) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j)
      g = std::min(g, std::abs(e.kernel.reduce(e.q[i] - e.q[j])));
  return g;
}

void PeakonTrajectory::push(const PeakonEnsemble& e) {
  if (!states_.empty() && !(e.t > states_.back().t))
    throw InvalidArgument("peakon states must have increasing times");
  states_.push_back(e);
  rates_.push_back(peakon_rhs(e));
  if (keep_last_ > 0 && states_.size() > keep_last_) {
    const auto drop = static_cast<std::ptrdiff_t>(states_.size() - keep_last_);
    states_.erase(states_.begin(), states_.begin() + drop);
    rates_.erase(rates_.begin(), rates_.begin() + drop);
  }
}

PeakonEnsemble PeakonTrajectory::at(double t) const {
  if (states_.empty()) throw Error("peakon trajectory is empty");
  if (states_.size() == 1) return states_.front();
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  if (t < states_.front().t - slack || t > states_.back().t + slack)
    throw InvalidArgument("peakon state requested outside the stored window");
  auto hi = std::upper_bound(states_.begin(), states_.end(), t,
                             [](double v, const PeakonEnsemble& s) { return v < s.t; });
  if (hi == states_.begin()) ++hi;
  if (hi == states_.end()) --hi;
  const std::size_t ib = static_cast<std::size_t>(hi - states_.begin());
  const PeakonEnsemble& a = states_[ib - 1];
  const PeakonEnsemble& b = states_[ib];
  const PeakonTendency& ra = rates_[ib - 1];
  const PeakonTendency& rb = rates_[ib];
  const double h = b.t - a.t;
  const double s = std::clamp((t - a.t) / h, 0.0, 1.0);
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  PeakonEnsemble r = a;
  r.t = t;
  for (std::size_t i = 0; i < a.size(); ++i) {
    // Positions may have been re-reduced between the two states.
    const double qb = a.q[i] + a.kernel.reduce(b.q[i] - a.q[i]);
    r.q[i] = h00 * a.q[i] + h10 * h * ra.dq[i] + h01 * qb + h11 * h * rb.dq[i];
    r.p[i] = h00 * a.p[i] + h10 * h * ra.dp[i] + h01 * b.p[i] + h11 * h * rb.dp[i];
  }
  return r;
}

void PeakonTrajectory::sample(double t, std::span<const double> x, std::span<double> u,
                              std::span<double> ux) const {
  const PeakonEnsemble e = at(t);
  for (std::size_t i = 0; i < x.size(); ++i) std::tie(u[i], ux[i]) = peakon_field_and_slope(e, x[i]);
}

namespace {

bool detector_fired(const PeakonEnsemble& e, double gap_tolerance, std::string* why) {
  if (min_gap(e) < gap_tolerance) {
    if (why) *why = "gap";
    return true;
  }
  for (double p : e.p)
    if (std::abs(p) > 1.0 / gap_tolerance) {
      if (why) *why = "momentum";
      return true;
    }
  return false;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double detect_collision_time(const PeakonEnsemble& initial, double dt, double t_max,
                             double gap_tolerance) {
  PeakonEnsemble e = initial;
  while (e.t < t_max) {
    try {
      e = peakon_step(e, dt);
    } catch (const CollisionError&) {
      return e.t;
    }
    if (detector_fired(e, gap_tolerance, nullptr) || !std::isfinite(e.p[0])) return e.t;
  }
  return t_max;
}

CollisionRun run_collision(const PeakonEnsemble& initial, const CollisionOptions& opts) {
  if (!(opts.dt > 0.0)) throw InvalidArgument("run_collision: dt must be positive");
  const bool with_flow = opts.grid_n > 0;
  const Grid1D grid(with_flow ? opts.grid_n : 8,
                    initial.kernel.domain == KernelDomain::circle ? initial.kernel.circumference
                                                                  : kTwoPi);
  FlowMap flow = FlowMap::identity(grid, initial.t);
  CollisionRun run{{}, {}, initial, flow, {}};
  PeakonTrajectory traj(2);
  PeakonEnsemble e = initial;
  traj.push(e);

  auto record = [&]() {
    run.series.push_back({e.t, min_gap(e), max_abs(e.p), hamiltonian(e),
                          with_flow ? blowup_monitor(flow) : 1.0, peakon_field(e, 0.0)});
  };

  std::vector<double> pending = opts.snapshot_times;
  std::sort(pending.begin(), pending.end());
  std::size_t next_snap = 0;
  while (next_snap < pending.size() && pending[next_snap] <= e.t) {
    if (with_flow) run.snapshots.push_back(flow);
    ++next_snap;
  }

  record();
  run.stop_reason = "t_max";
  while (e.t < opts.t_max - 1e-12) {
    PeakonEnsemble next;
    try {
      next = peakon_step(e, opts.dt);
    } catch (const CollisionError&) {
      run.stop_reason = "gap";
      break;
    }
    traj.push(next);
    bool broke = false;
    if (with_flow) {
      // Split the step at requested snapshot times.
      double t = e.t;
      while (next_snap < pending.size() && pending[next_snap] <= next.t) {
        FlowAdvance adv = flow_advance(flow, traj, t, pending[next_snap], opts.dt);
        flow = std::move(adv.map);
        broke = broke || adv.broke;
        t = pending[next_snap];
        run.snapshots.push_back(flow);
        ++next_snap;
      }
      if (next.t > t) {
        FlowAdvance adv = flow_advance(flow, traj, t, next.t, opts.dt);
        flow = std::move(adv.map);
        broke = broke || adv.broke;
      }
    }
    e = std::move(next);
    record();
    std::string why;
    if (broke) {
      run.stop_reason = "jacobian";
      break;
    }
    if (detector_fired(e, opts.gap_tolerance, &why)) {
      run.stop_reason = why;
      break;
    }
  }
  run.final_state = e;
  run.final_flow = flow;
  return run;
}

}  // namespace conelab
