#include "conelab/warped_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace conelab {

namespace {

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double bilinear(const Vec& h, const Vec& a, const Vec& b) {
  const std::size_t k = a.size();
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) s += a[i] * h[i * k + j] * b[j];
  return s;
}

void require_size(const Vec& v, int n, const char* what) {
  if (static_cast<int>(v.size()) != n) throw InvalidArgument(std::string(what) + " has wrong dimension");
}

}  // namespace

SmoothFunction SmoothFunction::constant(int dim, double c) {
  return {dim, [c](const Vec&) { return c; }, [dim](const Vec&) { return Vec(dim, 0.0); },
          [dim](const Vec&) { return Vec(static_cast<std::size_t>(dim * dim), 0.0); }};
}

SmoothFunction SmoothFunction::quadratic(int dim, double c0, double c2) {
  return {dim, [c0, c2](const Vec& x) { return c0 + 0.5 * c2 * dot(x, x); },
          [c2](const Vec& x) {
            Vec g(x);
            for (double& v : g) v *= c2;
            return g;
          },
          [dim, c2](const Vec&) {
            Vec h(static_cast<std::size_t>(dim * dim), 0.0);
            for (int i = 0; i < dim; ++i) h[i * dim + i] = c2;
            return h;
          }};
}

SmoothFunction SmoothFunction::radial_power(int dim, double p) {
  return {dim, [p](const Vec& x) { return std::pow(dot(x, x), p); },
          [p](const Vec& x) {
            const double s = dot(x, x);
            const double a = 2.0 * p * std::pow(s, p - 1.0);
            Vec g(x);
            for (double& v : g) v *= a;
            return g;
          },
          [dim, p](const Vec& x) {
            const double s = dot(x, x);
            const double a = 2.0 * p * std::pow(s, p - 1.0);
            const double b = 4.0 * p * (p - 1.0) * std::pow(s, p - 2.0);
            Vec h(static_cast<std::size_t>(dim * dim));
            for (int i = 0; i < dim; ++i)
              for (int j = 0; j < dim; ++j) h[i * dim + j] = b * x[i] * x[j] + (i == j ? a : 0.0);
            return h;
          }};
}

SmoothFunction SmoothFunction::sin_squared() {
  return {1, [](const Vec& x) { return std::sin(x[0]) * std::sin(x[0]); },
          [](const Vec& x) { return Vec{std::sin(2.0 * x[0])}; },
          [](const Vec& x) { return Vec{2.0 * std::cos(2.0 * x[0])}; }};
}

SmoothFunction SmoothFunction::reciprocal(const SmoothFunction& f) {
  SmoothFunction r;
  r.dim = f.dim;
  r.value = [f](const Vec& x) { return 1.0 / f.value(x); };
  r.gradient = [f](const Vec& x) {
    const double v = f.value(x);
    Vec g = f.gradient(x);
    for (double& c : g) c /= -(v * v);
    return g;
  };
  if (f.hessian)
    r.hessian = [f](const Vec& x) {
      const double v = f.value(x);
      const Vec g = f.gradient(x);
      Vec h = f.hessian(x);
      const std::size_t k = g.size();
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
          h[i * k + j] = -h[i * k + j] / (v * v) + 2.0 * g[i] * g[j] / (v * v * v);
      return h;
    };
  return r;
}

GeodesicTendency warped_rhs(const GeodesicState& s, const WarpedConfig& c) {
  if (c.K_M != 0.0 || c.K_N != 0.0)
    throw InvalidArgument("geodesic integration supports flat base and fiber only");
  require_size(s.x, c.dim_M, "base position");
  require_size(s.y, c.dim_N, "fiber position");
  const double w = c.warp.value(s.x);
  if (!(w > 0.0)) throw DomainError("warp function is not positive along the trajectory");
  const Vec grad = c.warp.gradient(s.x);
  const double speed2 = dot(s.ydot, s.ydot);
  GeodesicTendency t{s.xdot, Vec(s.x.size()), s.ydot, Vec(s.y.size())};
  const Vec force = c.force ? c.force(s.t, s.x) : Vec(s.x.size(), 0.0);
  for (std::size_t i = 0; i < s.x.size(); ++i) t.xdot[i] = 0.5 * speed2 * grad[i] + force[i];
  const double log_rate = dot(grad, s.xdot) / w;
  for (std::size_t i = 0; i < s.y.size(); ++i) t.ydot[i] = -s.ydot[i] * log_rate;
  return t;
}

GeodesicTendency potential_rhs(const GeodesicState& s, const WarpedConfig& c) {
  GeodesicTendency t{s.xdot, Vec(s.x.size(), 0.0), Vec(s.y.size(), 0.0), Vec(s.y.size(), 0.0)};
  if (c.potential) {
    if (!(c.potential->value(s.x) > 0.0)) throw DomainError("potential is not positive");
    const Vec g = c.potential->gradient(s.x);
    for (std::size_t i = 0; i < s.x.size(); ++i) t.xdot[i] = -g[i];
  }
  if (c.force) {
    const Vec f = c.force(s.t, s.x);
    for (std::size_t i = 0; i < s.x.size(); ++i) t.xdot[i] += f[i];
  }
  return t;
}

namespace {

GeodesicState advance(const GeodesicState& s, const GeodesicTendency& k, double h) {
  GeodesicState o = s;
  for (std::size_t i = 0; i < o.x.size(); ++i) {
    o.x[i] += h * k.x[i];
    o.xdot[i] += h * k.xdot[i];
  }
  for (std::size_t i = 0; i < o.y.size(); ++i) {
    o.y[i] += h * k.y[i];
    o.ydot[i] += h * k.ydot[i];
  }
  o.t += h;
  return o;
}

void accumulate(Vec& dst, const Vec& a, const Vec& b, const Vec& c, const Vec& d, double h) {
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] += h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
}

}  // namespace

GeodesicState geodesic_step(const GeodesicState& s, const WarpedConfig& c, double dt,
                            const GeodesicRhs& rhs) {
  const GeodesicTendency k1 = rhs(s, c);
  const GeodesicTendency k2 = rhs(advance(s, k1, 0.5 * dt), c);
  const GeodesicTendency k3 = rhs(advance(s, k2, 0.5 * dt), c);
  const GeodesicTendency k4 = rhs(advance(s, k3, dt), c);
  GeodesicState o = s;
  accumulate(o.x, k1.x, k2.x, k3.x, k4.x, dt);
  accumulate(o.xdot, k1.xdot, k2.xdot, k3.xdot, k4.xdot, dt);
  accumulate(o.y, k1.y, k2.y, k3.y, k4.y, dt);
  accumulate(o.ydot, k1.ydot, k2.ydot, k3.ydot, k4.ydot, dt);
  o.t = s.t + dt;
  return o;
}

double conserved_c(const GeodesicState& s, const WarpedConfig& c) {
  const double w = c.warp.value(s.x);
  return dot(s.ydot, s.ydot) * w * w;
}

double warped_energy(const GeodesicState& s, const WarpedConfig& c) {
  return dot(s.xdot, s.xdot) + c.warp.value(s.x) * dot(s.ydot, s.ydot);
}

std::vector<TrajectoryRow> integrate_geodesic(const GeodesicState& s0, const WarpedConfig& c,
                                              double dt, double T, int record_every,
                                              const GeodesicRhs& rhs) {
  if (!(dt > 0.0) || !(T >= 0.0)) throw InvalidArgument("need dt > 0 and T >= 0");
  if (record_every < 1) throw InvalidArgument("record_every must be positive");
  const long steps = std::lround(T / dt);
  std::vector<TrajectoryRow> rows;
  const auto record = [&](const GeodesicState& s) {
    rows.push_back({s.t, s.x, s.xdot, s.y, s.ydot, conserved_c(s, c), warped_energy(s, c)});
  };
  GeodesicState s = s0;
  record(s);
  for (long k = 1; k <= steps; ++k) {
    s = geodesic_step(s, c, dt, rhs);
    if (k % record_every == 0 || k == steps) record(s);
  }
  return rows;
}

EisenhartReport eisenhart_verify(const EisenhartProblem& p) {
  const int dim = p.V.dim;
  require_size(p.x0, dim, "x0");
  require_size(p.v0, dim, "v0");
  if (!(p.dt > 0.0) || !(p.T >= 0.0)) throw InvalidArgument("need dt > 0 and T >= 0");
  const double V0 = p.V.value(p.x0);
  if (!(V0 > 0.0)) throw DomainError("potential must be positive");

  WarpedConfig direct;
  direct.dim_M = dim;
  direct.potential = p.V;
  direct.force = p.force;
  direct.warp = SmoothFunction::constant(dim, 1.0);

  WarpedConfig lifted;
  lifted.dim_M = dim;
  lifted.warp = SmoothFunction::reciprocal(p.V);
  lifted.force = p.force;

  GeodesicState a{p.x0, p.v0, {0.0}, {0.0}, 0.0};
  GeodesicState b{p.x0, p.v0, {0.0}, {std::sqrt(2.0) * V0}, 0.0};

  EisenhartReport rep;
  rep.c = conserved_c(b, lifted);
  rep.max_exact_error = p.exact ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  const auto compare = [&]() {
    double dev = 0.0;
    for (int i = 0; i < dim; ++i) dev = std::max(dev, std::abs(a.x[i] - b.x[i]));
    rep.max_deviation = std::max(rep.max_deviation, dev);
    if (p.exact) {
      const Vec e = p.exact(b.t);
      for (int i = 0; i < dim; ++i)
        rep.max_exact_error = std::max(rep.max_exact_error, std::abs(b.x[i] - e[i]));
    }
    rep.c_drift = std::max(rep.c_drift, std::abs(conserved_c(b, lifted) - rep.c) / rep.c);
  };
  const long steps = std::lround(p.T / p.dt);
  for (long k = 1; k <= steps; ++k) {
    a = geodesic_step(a, direct, p.dt, potential_rhs);
    b = geodesic_step(b, lifted, p.dt, warped_rhs);
    if (!(p.V.value(b.x) > 0.0)) throw DomainError("potential became nonpositive on the trajectory");
    compare();
  }
  rep.steps = steps;
  return rep;
}

Vec MetricDescriptor::diagonal(const Vec& x) const {
  Vec d(coefficients.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = coefficients[i](x);
  return d;
}

LiftKind parse_lift_kind(const std::string& name) {
  if (name == "euclidean") return LiftKind::euclidean;
  if (name == "sphere2") return LiftKind::sphere2;
  if (name == "ch_cone") return LiftKind::ch_cone;
  if (name == "tao") return LiftKind::tao;
  if (name == "ch2_corollary") return LiftKind::ch2_corollary;
  throw InvalidArgument("unknown metric '" + name + "'");
}

MetricDescriptor build_lift_metric(const LiftSpec& spec) {
  constexpr std::pair<double, double> kAngle{0.0, 2.0 * M_PI};
  constexpr std::pair<double, double> kRadius{0.2, 5.0};
  constexpr std::pair<double, double> kFree{-2.0, 2.0};
  MetricDescriptor m;
  const auto one = [](const Vec&) { return 1.0; };
  switch (spec.kind) {
    case LiftKind::euclidean: {
      if (spec.d < 1) throw InvalidArgument("euclidean metric needs d >= 1");
      m.kind = "euclidean";
      for (int i = 0; i < spec.d; ++i) {
        m.names.push_back("x" + std::to_string(i + 1));
        m.coefficients.push_back(one);
        m.sample_range.push_back(kFree);
      }
      break;
    }
    case LiftKind::sphere2: {
      m.kind = "sphere2";
      m.names = {"theta", "phi"};
      m.coefficients = {one, [](const Vec& x) { return std::sin(x[0]) * std::sin(x[0]); }};
      m.sample_range = {{0.2, M_PI - 0.2}, kAngle};
      break;
    }
    case LiftKind::ch_cone: {
      const int d = spec.d;
      if (d < 1) throw InvalidArgument("ch_cone needs d >= 1");
      m.kind = "ch_cone";
      const int k = 2 * (3 + d);
      m.fiber_exponent = k;
      for (int i = 0; i < d; ++i) {
        m.names.push_back(d == 1 ? "theta" : "x" + std::to_string(i + 1));
        m.coefficients.push_back([d](const Vec& x) { return x[d] * x[d]; });
        m.sample_range.push_back(kAngle);
      }
      m.names.push_back("r");
      m.coefficients.push_back(one);
      m.sample_range.push_back(kRadius);
      m.names.push_back("z");
      m.coefficients.push_back([d, k](const Vec& x) { return std::pow(x[d], -k); });
      m.sample_range.push_back({0.0, 1.0});
      break;
    }
    case LiftKind::ch2_corollary: {
      // M x S_1 has dimension d = 2, so the fiber exponent is 2(3 + 2).
      const int k = 2 * (3 + 2);
      if (k != 10) throw Error("ch2 corollary exponent mismatch");
      m.kind = "ch2_corollary";
      m.fiber_exponent = k;
      m.names = {"theta", "r", "y", "z"};
      const auto r2 = [](const Vec& x) { return x[1] * x[1]; };
      m.coefficients = {r2, one, r2, [k](const Vec& x) { return std::pow(x[1], -k); }};
      m.sample_range = {kAngle, kRadius, kAngle, {0.0, 1.0}};
      break;
    }
    case LiftKind::tao: {
      const SmoothFunction V = spec.V ? *spec.V : SmoothFunction::constant(1, 1.0);
      if (V.dim != 1) throw InvalidArgument("tao metric takes a potential of one variable");
      m.kind = "tao";
      m.names = {"x", "z", "y"};
      m.coefficients = {one, [V](const Vec& x) { return 1.0 / V.value({x[0]}); },
                        [V](const Vec& x) { return V.value({x[0]}); }};
      m.sample_range = {kFree, kFree, kFree};
      break;
    }
  }
  return m;
}

std::optional<WarpedChart> warped_form(const LiftSpec& spec) {
  WarpedChart chart;
  switch (spec.kind) {
    case LiftKind::euclidean: {
      const int d = spec.d;
      if (d < 2) return std::nullopt;
      chart.config.dim_M = d - 1;
      chart.config.warp = SmoothFunction::constant(d - 1, 1.0);
      chart.base_point = [d](const Vec& p) { return Vec(p.begin(), p.begin() + (d - 1)); };
      chart.split = [d](const Vec&, const Vec& X) {
        return std::pair{Vec(X.begin(), X.begin() + (d - 1)), Vec{X[d - 1]}};
      };
      return chart;
    }
    case LiftKind::sphere2: {
      chart.config.warp = SmoothFunction::sin_squared();
      chart.base_point = [](const Vec& p) { return Vec{p[0]}; };
      chart.split = [](const Vec&, const Vec& X) { return std::pair{Vec{X[0]}, Vec{X[1]}}; };
      return chart;
    }
    case LiftKind::ch_cone: {
      if (spec.d != 1) return std::nullopt;
      // (theta, r) are polar coordinates of the flat plane; r^{-8} = (x^2 + y^2)^{-4}.
      chart.config.dim_M = 2;
      chart.config.warp = SmoothFunction::radial_power(2, -4.0);
      chart.base_point = [](const Vec& p) {
        return Vec{p[1] * std::cos(p[0]), p[1] * std::sin(p[0])};
      };
      chart.split = [](const Vec& p, const Vec& X) {
        const double c = std::cos(p[0]), s = std::sin(p[0]), r = p[1];
        return std::pair{Vec{-r * s * X[0] + c * X[1], r * c * X[0] + s * X[1]}, Vec{X[2]}};
      };
      return chart;
    }
    default:
      return std::nullopt;
  }
}

double sectional_numerator(const WarpedConfig& c, const Vec& x, const Vec& u1, const Vec& v1,
                           const Vec& u2, const Vec& v2, WarpReading reading) {
  require_size(x, c.dim_M, "base point");
  require_size(u1, c.dim_M, "u1");
  require_size(u2, c.dim_M, "u2");
  require_size(v1, c.dim_N, "v1");
  require_size(v2, c.dim_N, "v2");
  if (!c.warp.hessian) throw InvalidArgument("sectional curvature needs the warp Hessian");
  const double w = c.warp.value(x);
  if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("warp function is not positive and finite");
  Vec grad = c.warp.gradient(x);
  Vec hess = c.warp.hessian(x);
  double f = w;
  if (reading == WarpReading::root) {
    f = std::sqrt(w);
    const std::size_t k = grad.size();
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        hess[i * k + j] = hess[i * k + j] / (2.0 * f) - grad[i] * grad[j] / (4.0 * f * w);
    for (double& g : grad) g /= 2.0 * f;
  }
  const double area_m = dot(u1, u1) * dot(u2, u2) - dot(u1, u2) * dot(u1, u2);
  const double area_n = dot(v1, v1) * dot(v2, v2) - dot(v1, v2) * dot(v1, v2);
  const double mixed = dot(v1, v1) * bilinear(hess, u2, u2) + dot(v2, v2) * bilinear(hess, u1, u1) -
                       2.0 * dot(v1, v2) * bilinear(hess, u1, u2);
  return c.K_M * area_m - f * mixed + f * f * (c.K_N - dot(grad, grad)) * area_n;
}

namespace {

struct MetricJet {
  Vec g;     // g_i
  Vec dg;    // d_k g_i at [i * n + k]
  Vec ddg;   // d_k d_l g_i at [(i * n + k) * n + l]
};

MetricJet metric_jet(const MetricDescriptor& m, const Vec& x) {
  const int n = m.dim();
  require_size(x, n, "point");
  const auto eval = [&](const Vec& p) {
    Vec d = m.diagonal(p);
    for (double v : d)
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("metric is singular near the point");
    return d;
  };
  Vec h(n);
  for (int k = 0; k < n; ++k) h[k] = 1e-4 * (1.0 + std::abs(x[k]));
  const auto shifted = [&](int k, double sk, int l, double sl) {
    Vec p = x;
    p[k] += sk * h[k];
    if (l >= 0) p[l] += sl * h[l];
    return eval(p);
  };

  MetricJet jet{eval(x), Vec(static_cast<std::size_t>(n * n)),
                Vec(static_cast<std::size_t>(n * n * n))};
  for (int k = 0; k < n; ++k) {
    const Vec plus = shifted(k, 1.0, -1, 0.0);
    const Vec minus = shifted(k, -1.0, -1, 0.0);
    for (int i = 0; i < n; ++i) {
      jet.dg[i * n + k] = (plus[i] - minus[i]) / (2.0 * h[k]);
      jet.ddg[(i * n + k) * n + k] = (plus[i] - 2.0 * jet.g[i] + minus[i]) / (h[k] * h[k]);
    }
    for (int l = k + 1; l < n; ++l) {
      const Vec pp = shifted(k, 1.0, l, 1.0), pm = shifted(k, 1.0, l, -1.0);
      const Vec mp = shifted(k, -1.0, l, 1.0), mm = shifted(k, -1.0, l, -1.0);
      for (int i = 0; i < n; ++i) {
        const double v = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h[k] * h[l]);
        jet.ddg[(i * n + k) * n + l] = v;
        jet.ddg[(i * n + l) * n + k] = v;
      }
    }
  }
  return jet;
}

}  // namespace

double riemann_fd_oracle(const MetricDescriptor& m, const Vec& point, const Vec& X, const Vec& Y) {
  const int n = m.dim();
  require_size(X, n, "X");
  require_size(Y, n, "Y");
  const MetricJet jet = metric_jet(m, point);

  // Diagonal metric: g_ab = delta_ab g_a.
  const auto dmetric = [&](int a, int b, int k) { return a == b ? jet.dg[a * n + k] : 0.0; };
  const auto ddmetric = [&](int a, int b, int k, int l) {
    return a == b ? jet.ddg[(a * n + k) * n + l] : 0.0;
  };
  // Gamma^e_bc.
  std::vector<double> gamma(static_cast<std::size_t>(n * n * n));
  for (int e = 0; e < n; ++e)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        gamma[(e * n + b) * n + c] =
            (dmetric(e, c, b) + dmetric(e, b, c) - dmetric(b, c, e)) / (2.0 * jet.g[e]);
  const auto G = [&](int e, int b, int c) { return gamma[(e * n + b) * n + c]; };

  double pairing = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const double coeff = X[a] * Y[b] * X[c] * Y[d];
          if (coeff == 0.0) continue;
          double R = 0.5 * (ddmetric(a, d, b, c) + ddmetric(b, c, a, d) - ddmetric(a, c, b, d) -
                            ddmetric(b, d, a, c));
          for (int e = 0; e < n; ++e) R += jet.g[e] * (G(e, b, c) * G(e, a, d) - G(e, b, d) * G(e, a, c));
          pairing += R * coeff;
        }
  return pairing;
}

double plane_area2(const MetricDescriptor& m, const Vec& point, const Vec& X, const Vec& Y) {
  const Vec g = m.diagonal(point);
  double xx = 0.0, yy = 0.0, xy = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    xx += g[i] * X[i] * X[i];
    yy += g[i] * Y[i] * Y[i];
    xy += g[i] * X[i] * Y[i];
  }
  return xx * yy - xy * xy;
}

Vec random_point(const MetricDescriptor& m, std::mt19937_64& rng) {
  Vec p(m.dim());
  for (int k = 0; k < m.dim(); ++k)
    p[k] = std::uniform_real_distribution<double>(m.sample_range[k].first, m.sample_range[k].second)(rng);
  return p;
}

std::pair<Vec, Vec> random_plane(const MetricDescriptor& m, const Vec& point, std::mt19937_64& rng) {
  const int n = m.dim();
  const Vec g = m.diagonal(point);
  std::normal_distribution<double> gauss;
  const auto inner = [&](const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += g[i] * a[i] * b[i];
    return s;
  };
  Vec X(n), Y(n);
  for (;;) {
    for (int i = 0; i < n; ++i) X[i] = gauss(rng) / std::sqrt(g[i]);
    for (int i = 0; i < n; ++i) Y[i] = gauss(rng) / std::sqrt(g[i]);
    if (plane_area2(m, point, X, Y) < 1e-12 * inner(X, X) * inner(Y, Y)) continue;
    const double nx = std::sqrt(inner(X, X));
    for (double& v : X) v /= nx;
    const double xy = inner(X, Y);
    for (int i = 0; i < n; ++i) Y[i] -= xy * X[i];
    const double ny = std::sqrt(inner(Y, Y));
    for (double& v : Y) v /= ny;
    if (plane_area2(m, point, X, Y) >= 1e-12) return {X, Y};
  }
}

double curvature_scale(const MetricDescriptor& m, const Vec& point) {
  const int n = m.dim();
  const Vec g = m.diagonal(point);
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vec X(n, 0.0), Y(n, 0.0);
      X[i] = 1.0 / std::sqrt(g[i]);
      Y[j] = 1.0 / std::sqrt(g[j]);
      scale = std::max(scale, std::abs(riemann_fd_oracle(m, point, X, Y)));
    }
  return scale;
}

CurvatureScan curvature_sign_scan(const MetricDescriptor& m, int n_points, int n_planes,
                                  std::uint64_t seed) {
  if (n_points < 1 || n_planes < 1) throw InvalidArgument("scan needs points and planes");
  if (m.dim() < 2) throw InvalidArgument("sectional curvature needs dimension >= 2");
  std::mt19937_64 rng(seed);
  CurvatureScan out;
  out.metric = m.kind;
  out.max_curvature = -std::numeric_limits<double>::infinity();
  out.min_curvature = std::numeric_limits<double>::infinity();
  for (int ip = 0; ip < n_points; ++ip) {
    const Vec p = random_point(m, rng);
    for (int iq = 0; iq < n_planes; ++iq) {
      const auto [X, Y] = random_plane(m, p, rng);
      const double K = riemann_fd_oracle(m, p, X, Y) / plane_area2(m, p, X, Y);
      ++out.samples;
      out.min_curvature = std::min(out.min_curvature, K);
      if (K > out.max_curvature) {
        out.max_curvature = K;
        out.argmax_point = p;
        out.argmax_X = X;
        out.argmax_Y = Y;
      }
    }
  }
  return out;
}

FormulaCrossCheck cross_validate_formula(const LiftSpec& spec, int samples, std::uint64_t seed) {
  const auto chart = warped_form(spec);
  if (!chart) throw InvalidArgument("metric has no warped-product chart");
  const MetricDescriptor m = build_lift_metric(spec);
  std::mt19937_64 rng(seed);
  FormulaCrossCheck out;
  for (int i = 0; i < samples; ++i) {
    const Vec p = random_point(m, rng);
    const auto [X, Y] = random_plane(m, p, rng);
    const double area = plane_area2(m, p, X, Y);
    const double fd = riemann_fd_oracle(m, p, X, Y) / area;
    const Vec base = chart->base_point(p);
    const auto [u1, v1] = chart->split(p, X);
    const auto [u2, v2] = chart->split(p, Y);
    const double root = sectional_numerator(chart->config, base, u1, v1, u2, v2, WarpReading::root) / area;
    const double lit = sectional_numerator(chart->config, base, u1, v1, u2, v2, WarpReading::literal) / area;
    const double scale = std::max(std::abs(fd), curvature_scale(m, p));
    const double err = std::abs(root - fd);
    out.max_rel = std::max(out.max_rel, scale > 0.0 ? err / scale : err);
    out.max_rel_pointwise = std::max(out.max_rel_pointwise, fd != 0.0 ? err / std::abs(fd) : err);
    out.max_rel_literal = std::max(out.max_rel_literal, scale > 0.0 ? std::abs(lit - fd) / scale : std::abs(lit - fd));
    ++out.samples;
  }
  return out;
}

}  // namespace conelab
