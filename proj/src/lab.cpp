#include "conelab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "conelab/euler_verify.hpp"
#include "conelab/warped_geometry.hpp"

namespace conelab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << num(values[i]);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

double relative_drift(double now, double initial, double scale) {
  return std::abs(now - initial) / (scale > 0.0 ? scale : 1.0);
}

double l1(const PeriodicField& f) {
  double s = 0.0;
  for (double v : f.values()) s += std::abs(v);
  return s * f.grid().dx();
}

std::string normalise(std::string s) {
  std::replace(s.begin(), s.end(), '-', '_');
  return s;
}

IcSpec ic_or(const RunConfig& c, const std::string& fallback) {
  return c.ic ? *c.ic : IcSpec::parse(fallback);
}

double param(const IcSpec& ic, const std::string& key, double fallback) {
  const auto it = ic.params.find(key);
  return it == ic.params.end() ? fallback : it->second;
}

CHState as_ch(const InitialState& s, const std::string& preset) {
  if (const auto* ch = std::get_if<CHState>(&s)) return *ch;
  throw InvalidArgument("preset '" + preset + "' does not define a CH state");
}

CH2State as_ch2(const InitialState& s, const std::string& preset, double gravity) {
  if (const auto* ch2 = std::get_if<CH2State>(&s)) return *ch2;
  if (const auto* ch = std::get_if<CHState>(&s)) {
    CH2State out{ch->m, PeriodicField::constant(ch->m.grid(), 1.0), ch->alpha, gravity, 0.0};
    return out;
  }
  throw InvalidArgument("preset '" + preset + "' does not define a CH2 state");
}

PeakonEnsemble as_peakons(const InitialState& s, const std::string& preset) {
  if (const auto* e = std::get_if<PeakonEnsemble>(&s)) return *e;
  throw InvalidArgument("preset '" + preset + "' does not define a peakon ensemble");
}

}  // namespace

IcSpec IcSpec::parse(const std::string& text) {
  IcSpec ic;
  const auto colon = text.find(':');
  ic.name = text.substr(0, colon);
  if (ic.name.empty()) throw InvalidArgument("empty preset name");
  if (colon == std::string::npos) return ic;
  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidArgument("preset parameter '" + item + "' needs key=value");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    char* end = nullptr;
    const double v = std::strtod(val.c_str(), &end);
    if (end == val.c_str() || *end != '\0' || !std::isfinite(v))
      throw InvalidArgument("preset parameter '" + key + "' is not a number");
    ic.params[key] = v;
  }
  return ic;
}

std::string IcSpec::str() const {
  std::string s = name;
  char sep = ':';
  for (const auto& [k, v] : params) {
    s += sep + k + "=" + short_num(v);
    sep = ',';
  }
  return s;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{
      "ch-run",      "ch2-run",   "peakon-run",     "verify-embedding", "verify-ch2-lift",
      "verify-vorticity", "eisenhart", "curvature-scan", "figure1",          "sweep",
      "all"};
  return names;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"sin{k}", "gaussian-bump", "two-peakon",
                                              "antisymmetric-collision", "ch2-stratified"};
  return names;
}

namespace {

bool is_sin_preset(const std::string& name, int* k) {
  if (name.size() < 4 || name.compare(0, 3, "sin") != 0) return false;
  const std::string digits = name.substr(3);
  if (!std::all_of(digits.begin(), digits.end(), ::isdigit) || digits.size() > 4) return false;
  *k = std::stoi(digits);
  return *k > 0;
}

bool known_preset(const std::string& name) {
  int k = 0;
  return is_sin_preset(name, &k) || name == "gaussian-bump" || name == "two-peakon" ||
         name == "antisymmetric-collision" || name == "ch2-stratified";
}

}  // namespace

InitialState preset_ic(const IcSpec& ic, const Grid1D& grid, double alpha, double gravity) {
  const double L = grid.length();
  int k = 0;
  if (is_sin_preset(ic.name, &k)) {
    const double a = param(ic, "amplitude", 1.0);
    const double w = kTwoPi * k / L;
    return CHState::from_velocity(PeriodicField::sample(grid, [&](double x) { return a * std::sin(w * x); }),
                                  alpha);
  }
  if (ic.name == "gaussian-bump") {
    const double a = param(ic, "amplitude", 0.5);
    const double width = param(ic, "width", 0.5);
    const double centre = param(ic, "center", 0.5 * L);
    if (!(width > 0.0)) throw InvalidArgument("gaussian-bump width must be positive");
    // Periodised by summing images until they are negligible.
    const int images = 2 + static_cast<int>(std::ceil(8.0 * width / L));
    const auto u = PeriodicField::sample(grid, [&](double x) {
      double s = 0.0;
      for (int m = -images; m <= images; ++m) {
        const double z = (x - centre + m * L) / width;
        s += std::exp(-0.5 * z * z);
      }
      return a * s;
    });
    return CHState::from_velocity(u, alpha);
  }
  if (ic.name == "two-peakon") {
    PeakonEnsemble e;
    e.kernel = GreenKernel::circle(alpha, L);
    e.q = {param(ic, "q1", 0.3 * L), param(ic, "q2", 0.7 * L)};
    e.p = {param(ic, "p1", 1.0), param(ic, "p2", 0.5)};
    return e;
  }
  if (ic.name == "antisymmetric-collision") {
    const double p0 = param(ic, "p0", 1.0);
    const double q0 = param(ic, "q0", 1.0);
    if (!(p0 > 0.0) || !(q0 > 0.0) || !(q0 < 0.5 * L))
      throw InvalidArgument("antisymmetric-collision needs p0 > 0 and 0 < q0 < L/2");
    return collision_scenario(p0, q0, GreenKernel::circle(alpha, L));
  }
  if (ic.name == "ch2-stratified") {
    const double amp = param(ic, "rho_amplitude", 0.5);
    const auto u = PeriodicField::sample(grid, [](double x) { return std::sin(x); });
    const auto rho = PeriodicField::sample(grid, [&](double x) { return 1.0 + amp * std::cos(x); });
    CH2State s = CH2State::from_velocity(u, rho, alpha, gravity);
    validate_initial(s);
    return s;
  }
  throw InvalidArgument("unknown preset '" + ic.name + "'");
}

void validate(const RunConfig& c) {
  const auto& cmds = subcommands();
  if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end())
    throw InvalidArgument("unknown subcommand '" + c.command + "'");
  if (c.n < 8 || (c.n & (c.n - 1)) != 0) throw InvalidArgument("--n must be a power of two >= 8");
  if (c.dt && !(*c.dt > 0.0)) throw InvalidArgument("--dt must be positive");
  if (c.T && !(*c.T > 0.0)) throw InvalidArgument("--T must be positive");
  if (!(c.alpha > 0.0)) throw InvalidArgument("--alpha must be positive");
  if (!(c.gravity > 0.0)) throw InvalidArgument("--g must be positive");
  if (!(c.tol_scale > 0.0)) throw InvalidArgument("--tol-scale must be positive");
  if (!(c.p0 > 0.0) || !(c.q0 > 0.0)) throw InvalidArgument("--p0 and --q0 must be positive");
  if (c.samples < 1 || c.d < 1) throw InvalidArgument("--samples and --d must be positive");
  for (double r : c.radii)
    if (!(r > 0.0)) throw InvalidArgument("--radii must be positive");
  for (double t : c.times)
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("--times are fractions in [0, 1]");
  for (int n : c.resolutions)
    if (n < 8 || (n & (n - 1)) != 0) throw InvalidArgument("sweep resolutions must be powers of two");
  for (double dt : c.dts)
    if (!(dt >= 0.0)) throw InvalidArgument("sweep dts must be nonnegative");
  if (c.ic && !known_preset(c.ic->name)) throw InvalidArgument("unknown preset '" + c.ic->name + "'");
  parse_identity(c.identity);
  if (c.stencil != "centered4" && c.stencil != "lagged1")
    throw InvalidArgument("--stencil must be centered4 or lagged1");
}

RunConfig config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "command") c.command = v.get<std::string>();
    else if (key == "n") c.n = v.get<int>();
    else if (key == "dt") c.dt = v.get<double>();
    else if (key == "T") c.T = v.get<double>();
    else if (key == "alpha") c.alpha = v.get<double>();
    else if (key == "g") c.gravity = v.get<double>();
    else if (key == "ic") c.ic = IcSpec::parse(v.get<std::string>());
    else if (key == "radii") c.radii = v.get<std::vector<double>>();
    else if (key == "out") c.out = v.get<std::string>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "tol-scale") c.tol_scale = v.get<double>();
    else if (key == "p0") c.p0 = v.get<double>();
    else if (key == "q0") c.q0 = v.get<double>();
    else if (key == "times") c.times = v.get<std::vector<double>>();
    else if (key == "metric") c.metric = v.get<std::string>();
    else if (key == "d") c.d = v.get<int>();
    else if (key == "samples") c.samples = v.get<int>();
    else if (key == "identity") c.identity = v.get<std::string>();
    else if (key == "resolutions") c.resolutions = v.get<std::vector<int>>();
    else if (key == "dts") c.dts = v.get<std::vector<double>>();
    else if (key == "stencil") c.stencil = v.get<std::string>();
    else throw InvalidArgument("unknown config key '" + key + "'");
  }
  return c;
}

json config_to_json(const RunConfig& c) {
  json j{{"command", c.command}, {"n", c.n},         {"alpha", c.alpha},
         {"g", c.gravity},       {"radii", c.radii}, {"seed", c.seed},
         {"tol-scale", c.tol_scale}};
  if (c.dt) j["dt"] = *c.dt;
  if (c.T) j["T"] = *c.T;
  if (c.ic) j["ic"] = c.ic->str();
  j["p0"] = c.p0;
  j["q0"] = c.q0;
  j["times"] = c.times;
  j["metric"] = c.metric;
  j["d"] = c.d;
  j["samples"] = c.samples;
  j["identity"] = c.identity;
  j["resolutions"] = c.resolutions;
  j["dts"] = c.dts;
  j["stencil"] = c.stencil;
  return j;
}

bool Report::pass() const {
  if (!error.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void Report::check_le(const std::string& name, double value, double threshold, double scale) {
  const double t = threshold * scale;
  checks.push_back({name, value, t, "<=", value <= t});
}

void Report::check_ge(const std::string& name, double value, double threshold, double scale) {
  const double t = threshold / scale;
  checks.push_back({name, value, t, ">=", value >= t});
}

json Report::to_json() const {
  json j{{"command", command}, {"pass", pass()}, {"data", data}};
  json cs = json::array();
  for (const auto& c : checks)
    cs.push_back({{"name", c.name},
                  {"value", std::isfinite(c.value) ? json(c.value) : json(nullptr)},
                  {"threshold", c.threshold},
                  {"relation", c.relation},
                  {"pass", c.pass}});
  j["checks"] = cs;
  if (!error.empty()) j["error"] = error;
  return j;
}

namespace {

Report cmd_ch_run(const RunConfig& c) {
  Report rep;
  rep.command = "ch-run";
  const IcSpec ic = ic_or(c, "gaussian-bump");
  const Grid1D grid(c.n);
  const CHState s0 = as_ch(preset_ic(ic, grid, c.alpha, c.gravity), ic.name);
  RunOptions opts;
  opts.dt = c.dt.value_or(1e-3);
  opts.T = c.T.value_or(1.0);
  const CHRun run = simulate(s0, opts);

  CsvWriter csv(c.out / "series.csv", {"t", "energy", "integral_m", "min_jacobian"});
  for (const auto& r : run.series) csv.row({r.t, r.energy, r.integral_m, r.min_jacobian});

  const auto& first = run.series.front();
  const auto& last = run.series.back();
  rep.data = {{"ic", ic.str()}, {"final_t", last.t}, {"stop_reason", run.stop_reason},
              {"min_jacobian", last.min_jacobian}};
  rep.check_le("stopped_early", run.completed() ? 0.0 : 1.0, 0.0);
  rep.check_le("energy_drift", relative_drift(last.energy, first.energy, first.energy), 1e-8, c.tol_scale);
  rep.check_le("integral_m_drift", relative_drift(last.integral_m, first.integral_m, l1(s0.m)), 1e-8,
               c.tol_scale);
  return rep;
}

Report cmd_ch2_run(const RunConfig& c) {
  Report rep;
  rep.command = "ch2-run";
  const IcSpec ic = ic_or(c, "ch2-stratified");
  const Grid1D grid(c.n);
  const CH2State s0 = as_ch2(preset_ic(ic, grid, c.alpha, c.gravity), ic.name, c.gravity);
  RunOptions opts;
  opts.dt = c.dt.value_or(1e-3);
  opts.T = c.T.value_or(1.0);
  const CH2Run run = simulate(s0, opts);

  CsvWriter csv(c.out / "series.csv", {"t", "energy", "integral_m", "integral_rho", "min_jacobian"});
  for (const auto& r : run.series) csv.row({r.t, r.energy, r.integral_m, r.integral_rho, r.min_jacobian});

  const auto& first = run.series.front();
  const auto& last = run.series.back();
  rep.data = {{"ic", ic.str()}, {"final_t", last.t}, {"stop_reason", run.stop_reason},
              {"min_jacobian", last.min_jacobian}};
  rep.check_le("stopped_early", run.completed() ? 0.0 : 1.0, 0.0);
  rep.check_le("energy_drift", relative_drift(last.energy, first.energy, first.energy), 1e-8, c.tol_scale);
  rep.check_le("integral_m_drift", relative_drift(last.integral_m, first.integral_m, l1(s0.m)), 1e-8,
               c.tol_scale);
  rep.check_le("integral_rho_drift",
               relative_drift(last.integral_rho, first.integral_rho, l1(s0.rho)), 1e-8, c.tol_scale);
  return rep;
}

Report cmd_peakon_run(const RunConfig& c) {
  Report rep;
  rep.command = "peakon-run";
  const IcSpec ic = ic_or(c, "two-peakon");
  const Grid1D grid(c.n);
  PeakonEnsemble e = as_peakons(preset_ic(ic, grid, c.alpha, c.gravity), ic.name);
  const double dt = c.dt.value_or(1e-4);
  const double T = c.T.value_or(1.0);
  const long steps = std::lround(T / dt);
  const std::size_t np = e.size();

  std::vector<std::string> header{"t", "hamiltonian", "momentum", "min_gap"};
  for (std::size_t i = 0; i < np; ++i) header.push_back("q" + std::to_string(i + 1));
  for (std::size_t i = 0; i < np; ++i) header.push_back("p" + std::to_string(i + 1));
  CsvWriter csv(c.out / "series.csv", header);
  const auto record = [&]() {
    std::vector<double> row{e.t, hamiltonian(e), total_momentum(e), min_gap(e)};
    row.insert(row.end(), e.q.begin(), e.q.end());
    row.insert(row.end(), e.p.begin(), e.p.end());
    csv.row(row);
  };
  const long every = std::max(1L, steps / 1000);
  const double H0 = hamiltonian(e);
  double worst = 0.0;
  std::string stop;
  record();
  for (long k = 1; k <= steps; ++k) {
    try {
      e = peakon_step(e, dt);
    } catch (const CollisionError& err) {
      stop = err.what();
      break;
    }
    worst = std::max(worst, std::abs(hamiltonian(e) - H0) / std::abs(H0));
    if (k % every == 0 || k == steps) record();
  }
  rep.data = {{"ic", ic.str()}, {"final_t", e.t}, {"stop_reason", stop}, {"min_gap", min_gap(e)}};
  rep.check_le("stopped_early", stop.empty() ? 0.0 : 1.0, 0.0);
  rep.check_le("hamiltonian_drift", worst, 1e-9, c.tol_scale);
  return rep;
}

Report cmd_verify_embedding(const RunConfig& c) {
  Report rep;
  rep.command = "verify-embedding";
  const IcSpec ic = ic_or(c, "sin3");
  const Grid1D grid(c.n);
  const CHState s = as_ch(preset_ic(ic, grid, c.alpha, c.gravity), ic.name);
  const PeriodicField u = s.velocity();
  const PeriodicField ut = velocity_tendency(s);
  const double aperture = 2.0 * c.alpha;

  const DivergenceResidual div = weighted_divergence(u, c.radii);
  const ResidualReport cons = euler_consistency_residual(u, ut, aperture);
  // Negative control: tendencies of a different alpha must not fit this cone.
  const double alpha_ctrl = c.alpha == 1.0 ? 0.5 : 1.0;
  const CHState sc = CHState::from_velocity(u, alpha_ctrl);
  const ResidualReport ctrl = euler_consistency_residual(u, velocity_tendency(sc), aperture);

  CsvWriter csv(c.out / "series.csv", {"theta", "u", "u_t", "pressure"});
  const PressureProfile p = pressure_recover(u, ut, aperture);
  for (int j = 0; j < grid.n(); ++j) csv.row({grid.x(j), u[j], ut[j], p.p[j]});

  rep.data = {{"ic", ic.str()},
              {"alpha", c.alpha},
              {"aperture", aperture},
              {"divergence_max", div.max_abs()},
              {"consistency_rel", cons.l2},
              {"consistency_linf", cons.linf},
              {"control_alpha", alpha_ctrl},
              {"control_rel", ctrl.l2}};
  rep.check_le("divergence_max", div.max_abs(), 1e-10, c.tol_scale);
  rep.check_le("consistency_rel", cons.l2, 1e-9, c.tol_scale);
  rep.check_ge("negative_control_rel", ctrl.l2, 1e-2, c.tol_scale);
  return rep;
}

Report cmd_verify_ch2_lift(const RunConfig& c) {
  Report rep;
  rep.command = "verify-ch2-lift";
  const IcSpec ic = ic_or(c, "ch2-stratified");
  const Grid1D grid(c.n);
  const CH2State s = as_ch2(preset_ic(ic, grid, c.alpha, c.gravity), ic.name, c.gravity);
  const CH2Tendency t = velocity_tendency(s);
  const PeriodicField u = s.velocity();
  const CH2LiftReport lr = ch2_lift_residual(u, s.rho, t.m, t.rho, s.alpha, s.gravity, 8);

  CsvWriter csv(c.out / "series.csv", {"theta", "u", "rho", "u_t", "rho_t"});
  for (int j = 0; j < grid.n(); ++j) csv.row({grid.x(j), u[j], s.rho[j], t.m[j], t.rho[j]});

  rep.data = {{"ic", ic.str()},         {"alpha", s.alpha},  {"g", s.gravity},
              {"dx_rel", lr.dx.l2},     {"dy_rel", lr.dy.l2}, {"grid2d_mismatch", lr.grid2d_mismatch}};
  rep.check_le("dx_rel", lr.dx.l2, 1e-9, c.tol_scale);
  rep.check_le("dy_rel", lr.dy.l2, 1e-9, c.tol_scale);
  rep.check_le("grid2d_mismatch", lr.grid2d_mismatch, 1e-11, c.tol_scale);
  return rep;
}

Report cmd_verify_vorticity(const RunConfig& c) {
  Report rep;
  rep.command = "verify-vorticity";
  const IcSpec ic = ic_or(c, "sin3");
  const Grid1D grid(c.n);
  const CHState s = as_ch(preset_ic(ic, grid, c.alpha, c.gravity), ic.name);
  const PeriodicField u = s.velocity();
  const CurlCheck curl = curl_identity_residual(u, c.radii);
  const double advect = advected_vorticity_check(u, velocity_tendency(s), c.alpha);

  CsvWriter csv(c.out / "series.csv", {"theta", "u", "curl_expected"});
  const PeriodicField expected = 2.0 * u - 0.5 * deriv(u, 2);
  for (int j = 0; j < grid.n(); ++j) csv.row({grid.x(j), u[j], expected[j]});

  rep.data = {{"ic", ic.str()},
              {"curl_rel", curl.relative_error},
              {"curl_radial_spread", curl.radial_spread},
              {"advected_vorticity_rel", advect}};
  rep.check_le("curl_rel", curl.relative_error, 1e-10, c.tol_scale);
  rep.check_le("curl_radial_spread", curl.radial_spread, 1e-10, c.tol_scale);
  rep.check_le("advected_vorticity_rel", advect, 1e-9, c.tol_scale);
  return rep;
}

Report cmd_eisenhart(const RunConfig& c) {
  Report rep;
  rep.command = "eisenhart";
  EisenhartProblem p;
  p.V = SmoothFunction::quadratic(1, 1.0, 1.0);
  p.x0 = {1.0};
  p.v0 = {0.0};
  p.T = c.T.value_or(10.0);
  p.dt = c.dt.value_or(1e-4);
  p.exact = [](double t) { return Vec{std::cos(t)}; };
  const EisenhartReport main = eisenhart_verify(p);

  // Observed order over three halvings of a coarse step.
  std::vector<double> errs, orders;
  const std::vector<double> dts{0.08, 0.04, 0.02, 0.01};
  for (double h : dts) {
    EisenhartProblem q = p;
    q.dt = h;
    errs.push_back(eisenhart_verify(q).max_exact_error);
  }
  for (std::size_t i = 0; i + 1 < dts.size(); ++i)
    orders.push_back(observed_order(dts[i], errs[i], dts[i + 1], errs[i + 1]));

  WarpedConfig lifted;
  lifted.warp = SmoothFunction::reciprocal(p.V);
  const GeodesicState s0{p.x0, p.v0, {0.0}, {std::sqrt(2.0) * p.V.value(p.x0)}, 0.0};
  const int every = std::max(1, static_cast<int>(std::lround(0.01 / p.dt)));
  CsvWriter csv(c.out / "series.csv", {"t", "x", "xdot", "y", "ydot", "c", "energy"});
  for (const auto& r : integrate_geodesic(s0, lifted, p.dt, p.T, every))
    csv.row({r.t, r.x[0], r.xdot[0], r.y[0], r.ydot[0], r.c, r.energy});

  const double min_order = *std::min_element(orders.begin(), orders.end());
  rep.data = {{"potential", "1 + x^2/2"}, {"x0", 1.0},          {"v0", 0.0},
              {"T", p.T},                 {"dt", p.dt},         {"c", main.c},
              {"max_exact_error", main.max_exact_error},        {"max_deviation", main.max_deviation},
              {"c_drift", main.c_drift},  {"order_dts", dts},   {"order_errors", errs},
              {"orders", orders}};
  rep.check_le("max_exact_error", main.max_exact_error, 1e-8, c.tol_scale);
  rep.check_le("max_deviation", main.max_deviation, 1e-8, c.tol_scale);
  rep.check_le("c_drift", main.c_drift, 1e-9, c.tol_scale);
  rep.check_ge("min_observed_order", min_order, 3.5, c.tol_scale);
  return rep;
}

LiftSpec lift_spec_for(const RunConfig& c) {
  const std::string m = normalise(c.metric);
  LiftSpec spec;
  spec.kind = parse_lift_kind(m);
  spec.d = spec.kind == LiftKind::euclidean ? std::max(c.d, 2) : c.d;
  if (spec.kind == LiftKind::tao) spec.V = SmoothFunction::quadratic(1, 1.0, 1.0);
  return spec;
}

Report cmd_curvature_scan(const RunConfig& c) {
  Report rep;
  rep.command = "curvature-scan";
  const LiftSpec spec = lift_spec_for(c);
  const MetricDescriptor m = build_lift_metric(spec);
  const CurvatureScan scan = curvature_sign_scan(m, c.samples, 1, c.seed);
  rep.data = {{"metric", m.kind},
              {"coordinates", m.names},
              {"fiber_exponent", m.fiber_exponent},
              {"samples", scan.samples},
              {"max_curvature", scan.max_curvature},
              {"min_curvature", scan.min_curvature},
              {"argmax_point", scan.argmax_point},
              {"argmax_X", scan.argmax_X},
              {"argmax_Y", scan.argmax_Y}};

  CsvWriter csv(c.out / "series.csv", {"sample", "coordinate", "argmax_point", "argmax_X", "argmax_Y"});
  for (int i = 0; i < m.dim(); ++i)
    csv.row({0.0, static_cast<double>(i), scan.argmax_point[i], scan.argmax_X[i], scan.argmax_Y[i]});

  if (warped_form(spec)) {
    // Closed formula against the finite-difference Riemann tensor.
    const FormulaCrossCheck x = cross_validate_formula(spec, 100, c.seed + 1);
    rep.data["formula_vs_fd_rel"] = x.max_rel;
    rep.data["formula_vs_fd_rel_pointwise"] = x.max_rel_pointwise;
    rep.data["formula_literal_w_vs_fd_rel"] = x.max_rel_literal;
    rep.check_le("formula_vs_fd_rel", x.max_rel, 1e-5, c.tol_scale);
  }
  rep.check_le("max_sectional_curvature", scan.max_curvature, 1e-8, c.tol_scale);
  return rep;
}

Report cmd_figure1(const RunConfig& c) {
  Report rep;
  rep.command = "figure1";
  const Grid1D grid(c.n);
  IcSpec ic = c.ic ? *c.ic : IcSpec{"antisymmetric-collision", {}};
  if (!ic.params.count("p0")) ic.params["p0"] = c.p0;
  if (!ic.params.count("q0")) ic.params["q0"] = c.q0;
  const PeakonEnsemble e0 = as_peakons(preset_ic(ic, grid, c.alpha, c.gravity), ic.name);
  const double dt = c.dt.value_or(1e-4);
  const double t_star = detect_collision_time(e0, dt, c.T.value_or(50.0), 1e-6);

  CollisionOptions opts;
  opts.dt = dt;
  opts.t_max = t_star;
  opts.grid_n = c.n;
  for (double f : c.times) opts.snapshot_times.push_back(f * t_star);
  const CollisionRun run = run_collision(e0, opts);
  const std::vector<Figure1Frame> frames = figure1_emit(run.snapshots, c.radii);

  for (const Figure1Frame& f : frames) {
    if (f.truncated) continue;
    for (const LiftedCurve& curve : f.curves) {
      const fs::path path = c.out / ("curve_" + short_num(f.time) + "_" + short_num(curve.radius) + ".csv");
      CsvWriter csv(path, {"theta", "x", "y"});
      for (std::size_t j = 0; j < curve.points.size(); ++j)
        csv.row({grid.x(static_cast<int>(j)), curve.points[j].real(), curve.points[j].imag()});
    }
  }
  {
    std::ofstream svg(c.out / "figure1.svg");
    if (!svg) throw Error("cannot write figure1.svg");
    svg << figure1_svg(frames);
  }
  CsvWriter csv(c.out / "series.csv",
                {"t", "gap", "max_abs_p", "hamiltonian", "min_jacobian", "midpoint_velocity"});
  double min_j = 1.0, mid = 0.0;
  for (const auto& r : run.series) {
    csv.row({r.t, r.gap, r.max_abs_p, r.hamiltonian, r.min_jacobian, r.midpoint_velocity});
    min_j = std::min(min_j, r.min_jacobian);
    mid = std::max(mid, std::abs(r.midpoint_velocity));
  }

  // Exact radial scaling of the lifted curves and pinching toward the ray theta = 0.
  double scaling = 0.0;
  long nonmonotone = 0;
  double prev_pinch = std::numeric_limits<double>::infinity();
  double pinch_angle = 0.0;
  for (const Figure1Frame& f : frames) {
    if (f.truncated || f.curves.empty()) continue;
    const LiftedCurve& ref = f.curves.front();
    for (const LiftedCurve& other : f.curves)
      for (std::size_t j = 0; j < ref.points.size(); ++j) {
        const auto expect = (other.radius / ref.radius) * ref.points[j];
        scaling = std::max(scaling, std::abs(other.points[j] - expect) / std::abs(expect));
      }
    std::size_t jmin = 0;
    for (std::size_t j = 1; j < ref.points.size(); ++j)
      if (std::abs(ref.points[j]) < std::abs(ref.points[jmin])) jmin = j;
    const double pinch = std::abs(ref.points[jmin]) / ref.radius;
    if (pinch > prev_pinch) ++nonmonotone;
    prev_pinch = pinch;
    pinch_angle = std::abs(std::remainder(std::arg(ref.points[jmin]), kTwoPi));
  }

  rep.data = {{"ic", ic.str()},
              {"collision_time", t_star},
              {"snapshot_times", opts.snapshot_times},
              {"stop_reason", run.stop_reason},
              {"min_jacobian", min_j},
              {"max_midpoint_velocity", mid},
              {"final_pinch_radius_ratio", prev_pinch},
              {"final_pinch_angle", pinch_angle}};
  rep.check_le("min_jacobian", min_j, 1e-2, c.tol_scale);
  rep.check_le("max_midpoint_velocity", mid, 1e-10, c.tol_scale);
  rep.check_le("radial_scaling_rel", scaling, 1e-12, c.tol_scale);
  rep.check_le("pinch_nonmonotone_frames", static_cast<double>(nonmonotone), 0.0);
  rep.check_le("pinch_angle", pinch_angle, 2.0 * grid.dx(), c.tol_scale);
  return rep;
}

Report cmd_sweep(const RunConfig& c) {
  Report rep;
  rep.command = "sweep";
  SweepOptions o;
  o.identity = parse_identity(c.identity);
  o.resolutions = c.resolutions.empty() ? std::vector<int>{c.n} : c.resolutions;
  o.dts = c.dts.empty() ? std::vector<double>{1e-3, 5e-4, 2.5e-4} : c.dts;
  o.alpha = c.alpha;
  o.gravity = c.gravity;
  o.T = c.T.value_or(1.0);
  o.stencil = c.stencil == "lagged1" ? FdStencil::lagged1 : FdStencil::centered4;
  const IcSpec ic = ic_or(c, o.identity == Identity::ch2_lift ? "ch2-stratified" : "sin3");
  const double alpha = c.alpha, g = c.gravity;
  o.initial_u = [ic, alpha, g](const Grid1D& grid) {
    const InitialState s = preset_ic(ic, grid, alpha, g);
    if (const auto* ch = std::get_if<CHState>(&s)) return ch->velocity();
    if (const auto* ch2 = std::get_if<CH2State>(&s)) return ch2->velocity();
    throw InvalidArgument("sweep needs a grid preset");
  };
  o.initial_rho = [ic, alpha, g](const Grid1D& grid) {
    const InitialState s = preset_ic(ic, grid, alpha, g);
    if (const auto* ch2 = std::get_if<CH2State>(&s)) return ch2->rho;
    return PeriodicField::constant(grid, 1.0);
  };

  const SweepTable table = convergence_sweep(o);
  CsvWriter csv(c.out / "series.csv", {"resolution", "dt", "rel_l2", "linf", "abs_l2"});
  json rows = json::array();
  for (const auto& r : table.rows) {
    csv.row({static_cast<double>(r.resolution), r.dt, r.l2, r.linf, r.abs_l2});
    rows.push_back({{"resolution", r.resolution}, {"dt", r.dt}, {"rel_l2", r.l2}});
  }
  rep.data = {{"identity", c.identity}, {"ic", ic.str()}, {"T", o.T}, {"stencil", c.stencil},
              {"rows", rows},           {"dt_orders", table.dt_orders},
              {"n_orders", table.n_orders}};
  if (!table.dt_orders.empty()) {
    double worst = std::numeric_limits<double>::infinity();
    for (double p : table.dt_orders) worst = std::isnan(p) ? -1.0 : std::min(worst, p);
    rep.check_ge("min_dt_order", worst, o.stencil == FdStencil::centered4 ? 3.5 : 0.8, c.tol_scale);
  } else {
    double worst = 0.0;
    for (const auto& r : table.rows) worst = std::max(worst, r.l2);
    rep.check_le("max_rel_residual", worst, 1e-9, c.tol_scale);
  }
  return rep;
}

}  // namespace

Report run_command(const RunConfig& c) {
  validate(c);
  fs::create_directories(c.out);
  using Fn = Report (*)(const RunConfig&);
  static const std::map<std::string, Fn> table{
      {"ch-run", cmd_ch_run},
      {"ch2-run", cmd_ch2_run},
      {"peakon-run", cmd_peakon_run},
      {"verify-embedding", cmd_verify_embedding},
      {"verify-ch2-lift", cmd_verify_ch2_lift},
      {"verify-vorticity", cmd_verify_vorticity},
      {"eisenhart", cmd_eisenhart},
      {"curvature-scan", cmd_curvature_scan},
      {"figure1", cmd_figure1},
      {"sweep", cmd_sweep},
  };
  const auto it = table.find(c.command);
  if (it == table.end()) throw InvalidArgument("'" + c.command + "' is not a single suite");
  Report rep;
  try {
    rep = it->second(c);
  } catch (const InvalidArgument&) {
    throw;
  } catch (const Error& e) {
    rep.command = c.command;
    rep.error = e.what();
  }
  rep.data["config"] = config_to_json(c);
  return rep;
}

namespace {

void write_report(const fs::path& dir, const json& j) {
  std::ofstream out(dir / "report.json");
  if (!out) throw Error("cannot write " + (dir / "report.json").string());
  out << j.dump(2) << '\n';
}

void print_summary(const Report& r) {
  for (const auto& c : r.checks)
    std::printf("%s %s %s: %.6g %s %.3g\n", c.pass ? "PASS" : "FAIL", r.command.c_str(),
                c.name.c_str(), c.value, c.relation.c_str(), c.threshold);
  if (!r.error.empty()) std::printf("FAIL %s: %s\n", r.command.c_str(), r.error.c_str());
}

}  // namespace

int run(const RunConfig& c) {
  RunConfig cfg = c;
  if (cfg.out.empty()) {
    const char* env = std::getenv("CONELAB_OUT");
    cfg.out = env && *env ? fs::path(env) : fs::path("conelab_out");
  }
  if (cfg.command != "all") {
    const Report r = run_command(cfg);
    write_report(cfg.out, r.to_json());
    print_summary(r);
    return r.pass() ? 0 : 1;
  }
  validate(cfg);
  fs::create_directories(cfg.out);
  json all = json::array();
  bool ok = true;
  for (const std::string& name : subcommands()) {
    if (name == "all") continue;
    RunConfig sub;
    sub.command = name;
    sub.out = cfg.out / name;
    sub.seed = cfg.seed;
    sub.tol_scale = cfg.tol_scale;
    const Report r = run_command(sub);
    write_report(sub.out, r.to_json());
    print_summary(r);
    ok = ok && r.pass();
    all.push_back({{"command", name}, {"pass", r.pass()}});
  }
  write_report(cfg.out, json{{"command", "all"}, {"pass", ok}, {"suites", all}});
  return ok ? 0 : 1;
}

std::string figure1_svg(const std::vector<Figure1Frame>& frames) {
  const double panel = 240.0, pad = 10.0;
  double extent = 0.0;
  for (const auto& f : frames)
    for (const auto& c : f.curves)
      for (const auto& p : c.points) extent = std::max(extent, std::abs(p));
  if (extent == 0.0) extent = 1.0;
  const double scale = (0.5 * panel - pad) / extent;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << panel * std::max<std::size_t>(1, frames.size())
    << "\" height=\"" << panel + 20 << "\">\n";
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const double cx = (i + 0.5) * panel, cy = 0.5 * panel;
    s << "<text x=\"" << cx << "\" y=\"" << panel + 14 << "\" text-anchor=\"middle\" font-size=\"12\">t = "
      << short_num(frames[i].time) << (frames[i].truncated ? " (broken)" : "") << "</text>\n";
    s << "<line x1=\"" << cx << "\" y1=\"" << cy << "\" x2=\"" << cx + 0.5 * panel - pad << "\" y2=\"" << cy
      << "\" stroke=\"#bbb\" stroke-dasharray=\"3,3\"/>\n";
    for (const auto& c : frames[i].curves) {
      s << "<polygon fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"1\" points=\"";
      for (const auto& p : c.points)
        s << short_num(cx + scale * p.real()) << ',' << short_num(cy - scale * p.imag()) << ' ';
      s << "\"/>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace conelab
