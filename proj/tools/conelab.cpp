// conelab: command-line front end of the lab runner.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "conelab/lab.hpp"

namespace {

template <class T>
std::vector<T> split_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    if constexpr (std::is_same_v<T, int>)
      out.push_back(std::stoi(item, &used));
    else
      out.push_back(std::stod(item, &used));
    if (used != item.size()) throw conelab::InvalidArgument("bad list entry '" + item + "'");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Camassa-Holm / incompressible Euler embedding lab"};
  app.require_subcommand(1);

  std::string config_path;
  int n = 0;
  double dt = 0, T = 0, alpha = 0, g = 0, tol_scale = 0, p0 = 0, q0 = 0;
  std::string ic, radii, out, times, metric, identity, resolutions, dts, stencil;
  std::uint64_t seed = 0;
  int d = 0, samples = 0;

  for (const std::string& name : conelab::subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON file of flag values (flags override it)");
    sub->add_option("--n", n, "grid size (power of two)");
    sub->add_option("--dt", dt, "time step");
    sub->add_option("--T", T, "final time");
    sub->add_option("--alpha", alpha, "length scale alpha");
    sub->add_option("--g", g, "CH2 gravity");
    sub->add_option("--ic", ic, "preset[:key=value,...]");
    sub->add_option("--radii", radii, "comma-separated radii");
    sub->add_option("--out", out, "output directory (default $CONELAB_OUT)");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--tol-scale", tol_scale, "threshold multiplier");
    sub->add_option("--p0", p0, "collision momentum");
    sub->add_option("--q0", q0, "collision half-separation");
    sub->add_option("--times", times, "figure1 snapshot fractions of the collision time");
    sub->add_option("--metric", metric, "ch-cone | ch2-corollary | tao | sphere2 | euclidean");
    sub->add_option("--d", d, "dimension of M for ch-cone");
    sub->add_option("--samples", samples, "curvature scan sample count");
    sub->add_option("--identity", identity, "sweep identity");
    sub->add_option("--resolutions", resolutions, "sweep grid sizes");
    sub->add_option("--dts", dts, "sweep time steps (0 = exact tendencies)");
    sub->add_option("--stencil", stencil, "centered4 | lagged1");
  }
  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    conelab::RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw conelab::Error("cannot read " + config_path);
      cfg = conelab::config_from_json(nlohmann::json::parse(in), cfg);
    }
    cfg.command = sub->get_name();
    const auto given = [&](const char* flag) { return sub->count(flag) > 0; };
    if (given("--n")) cfg.n = n;
    if (given("--dt")) cfg.dt = dt;
    if (given("--T")) cfg.T = T;
    if (given("--alpha")) cfg.alpha = alpha;
    if (given("--g")) cfg.gravity = g;
    if (given("--ic")) cfg.ic = conelab::IcSpec::parse(ic);
    if (given("--radii")) cfg.radii = split_list<double>(radii);
    if (given("--out")) cfg.out = out;
    if (given("--seed")) cfg.seed = seed;
    if (given("--tol-scale")) cfg.tol_scale = tol_scale;
    if (given("--p0")) cfg.p0 = p0;
    if (given("--q0")) cfg.q0 = q0;
    if (given("--times")) cfg.times = split_list<double>(times);
    if (given("--metric")) cfg.metric = metric;
    if (given("--d")) cfg.d = d;
    if (given("--samples")) cfg.samples = samples;
    if (given("--identity")) cfg.identity = identity;
    if (given("--resolutions")) cfg.resolutions = split_list<int>(resolutions);
    if (given("--dts")) cfg.dts = split_list<double>(dts);
    if (given("--stencil")) cfg.stencil = stencil;
    return conelab::run(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "conelab: %s\n", e.what());
    return 2;
  }
}
