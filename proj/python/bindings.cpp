#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "conelab/ch_dynamics.hpp"
#include "conelab/cone_lift.hpp"
#include "conelab/euler_verify.hpp"
#include "conelab/lab.hpp"
#include "conelab/peakon.hpp"
#include "conelab/warped_geometry.hpp"

namespace py = pybind11;
using namespace conelab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PeriodicField to_field(const Array& a, double length) {
  if (a.ndim() != 1) throw InvalidArgument("expected a one-dimensional array");
  const Grid1D g(static_cast<int>(a.shape(0)), length);
  PeriodicField f(g);
  auto r = a.unchecked<1>();
  for (int j = 0; j < g.n(); ++j) f[j] = r(j);
  return f;
}

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Array to_array(const PeriodicField& f) { return to_array(f.values()); }

py::dict residual_dict(const ResidualReport& r) {
  py::dict d;
  d["l2"] = r.l2;
  d["linf"] = r.linf;
  d["abs_l2"] = r.abs_l2;
  return d;
}

PeakonEnsemble ensemble(const std::vector<double>& q, const std::vector<double>& p, double alpha,
                        double length) {
  PeakonEnsemble e;
  e.kernel = GreenKernel::circle(alpha, length);
  e.q = q;
  e.p = p;
  return e;
}

// Accepts the CLI spelling ("ch-cone") as well as the enum spelling ("ch_cone").
LiftSpec lift_spec(std::string name, int d) {
  std::replace(name.begin(), name.end(), '-', '_');
  return {parse_lift_kind(name), d, std::nullopt};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Camassa-Holm dynamics and their Euler lift on a cone";

  auto& base = py::register_exception<Error>(m, "ConelabError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<BlowupError>(m, "BlowupError", base.ptr());
  py::register_exception<CollisionError>(m, "CollisionError", base.ptr());

  m.def(
      "ch_tendency",
      [](const Array& u, double alpha, double length) {
        return to_array(velocity_tendency(CHState::from_velocity(to_field(u, length), alpha)));
      },
      py::arg("u"), py::arg("alpha") = 0.5, py::arg("length") = kTwoPi);

  m.def(
      "ch_energy",
      [](const Array& u, double alpha, double length) {
        return energy(CHState::from_velocity(to_field(u, length), alpha));
      },
      py::arg("u"), py::arg("alpha") = 0.5, py::arg("length") = kTwoPi);

  m.def(
      "simulate_ch",
      [](const Array& u, double alpha, double dt, double T, int record_every, double length) {
        RunOptions o;
        o.dt = dt;
        o.T = T;
        o.record_every = record_every;
        const CHState initial = CHState::from_velocity(to_field(u, length), alpha);
        const CHRun run = [&] {
          py::gil_scoped_release release;
          return simulate(initial, o);
        }();
        std::vector<double> t, e, mass, jac;
        for (const auto& r : run.series) {
          t.push_back(r.t);
          e.push_back(r.energy);
          mass.push_back(r.integral_m);
          jac.push_back(r.min_jacobian);
        }
        py::dict d;
        d["u"] = to_array(run.final_state.velocity());
        d["t"] = run.final_state.t;
        d["completed"] = run.completed();
        d["stop_reason"] = run.stop_reason;
        d["series_t"] = to_array(t);
        d["energy"] = to_array(e);
        d["integral_m"] = to_array(mass);
        d["min_jacobian"] = to_array(jac);
        return d;
      },
      py::arg("u"), py::arg("alpha") = 0.5, py::arg("dt") = 1e-3, py::arg("T") = 1.0,
      py::arg("record_every") = 10, py::arg("length") = kTwoPi);

  m.def(
      "weighted_divergence",
      [](const Array& u, const std::vector<double>& radii) {
        const DivergenceResidual d = weighted_divergence(to_field(u, kTwoPi), radii);
        const auto n = static_cast<py::ssize_t>(u.shape(0));
        Array out({static_cast<py::ssize_t>(radii.size()), n});
        for (std::size_t i = 0; i < radii.size(); ++i)
          std::copy(d.residual[i].values().begin(), d.residual[i].values().end(), out.mutable_data() + i * n);
        return out;
      },
      py::arg("u"), py::arg("radii") = kDefaultRadii);

  m.def(
      "lift_velocity",
      [](const Array& u, const std::vector<double>& radii) {
        const auto s = lift_velocity(to_field(u, kTwoPi), radii);
        const auto n = static_cast<py::ssize_t>(u.shape(0));
        Array vr({static_cast<py::ssize_t>(radii.size()), n}), vt({static_cast<py::ssize_t>(radii.size()), n});
        for (std::size_t k = 0; k < s.size(); ++k) {
          vr.mutable_data()[k] = s[k].v_r;
          vt.mutable_data()[k] = s[k].v_theta;
        }
        return py::make_tuple(vr, vt);
      },
      py::arg("u"), py::arg("radii") = kDefaultRadii);

  m.def(
      "consistency_residual",
      [](const Array& u, const Array& ut, double aperture) {
        return residual_dict(euler_consistency_residual(to_field(u, kTwoPi), to_field(ut, kTwoPi), aperture));
      },
      py::arg("u"), py::arg("ut"), py::arg("aperture") = 1.0);

  m.def(
      "pressure",
      [](const Array& u, const Array& ut, double aperture, double theta, double r) {
        return pressure_recover(to_field(u, kTwoPi), to_field(ut, kTwoPi), aperture).at(theta, r);
      },
      py::arg("u"), py::arg("ut"), py::arg("aperture"), py::arg("theta"), py::arg("r"));

  m.def(
      "curl_identity",
      [](const Array& u, const std::vector<double>& radii) {
        const CurlCheck c = curl_identity_residual(to_field(u, kTwoPi), radii);
        return py::make_tuple(c.relative_error, c.radial_spread);
      },
      py::arg("u"), py::arg("radii") = kDefaultRadii);

  m.def(
      "peakon_step",
      [](const std::vector<double>& q, const std::vector<double>& p, double dt, double alpha, double length) {
        const PeakonEnsemble e = peakon_step(ensemble(q, p, alpha, length), dt);
        return py::make_tuple(e.q, e.p);
      },
      py::arg("q"), py::arg("p"), py::arg("dt"), py::arg("alpha") = 0.5, py::arg("length") = kTwoPi);

  m.def(
      "peakon_hamiltonian",
      [](const std::vector<double>& q, const std::vector<double>& p, double alpha, double length) {
        return hamiltonian(ensemble(q, p, alpha, length));
      },
      py::arg("q"), py::arg("p"), py::arg("alpha") = 0.5, py::arg("length") = kTwoPi);

  m.def(
      "collision_time",
      [](double p0, double q0, double alpha, double dt, double t_max) {
        py::gil_scoped_release release;
        return detect_collision_time(collision_scenario(p0, q0, GreenKernel::circle(alpha)), dt, t_max, 1e-6);
      },
      py::arg("p0") = 1.0, py::arg("q0") = 1.0, py::arg("alpha") = 0.5, py::arg("dt") = 1e-4,
      py::arg("t_max") = 50.0);

  m.def(
      "eisenhart_harmonic",
      [](double x0, double T, double dt) {
        EisenhartProblem p;
        p.V = SmoothFunction::quadratic(1, 1.0, 1.0);
        p.x0 = {x0};
        p.v0 = {0.0};
        p.T = T;
        p.dt = dt;
        p.exact = [x0](double t) { return Vec{x0 * std::cos(t)}; };
        const EisenhartReport r = [&] {
          py::gil_scoped_release release;
          return eisenhart_verify(p);
        }();
        py::dict d;
        d["max_deviation"] = r.max_deviation;
        d["max_exact_error"] = r.max_exact_error;
        d["c_drift"] = r.c_drift;
        d["c"] = r.c;
        d["steps"] = r.steps;
        return d;
      },
      py::arg("x0") = 1.0, py::arg("T") = 10.0, py::arg("dt") = 1e-3);

  m.def(
      "fiber_exponent",
      [](const std::string& metric, int d) { return build_lift_metric(lift_spec(metric, d)).fiber_exponent; },
      py::arg("metric") = "ch-cone", py::arg("d") = 1);

  m.def(
      "curvature_scan",
      [](const std::string& metric, int d, int samples, std::uint64_t seed) {
        const CurvatureScan s = curvature_sign_scan(build_lift_metric(lift_spec(metric, d)),
                                                    samples, 1, seed);
        py::dict out;
        out["samples"] = s.samples;
        out["max_curvature"] = s.max_curvature;
        out["min_curvature"] = s.min_curvature;
        out["argmax_point"] = s.argmax_point;
        return out;
      },
      py::arg("metric") = "ch-cone", py::arg("d") = 1, py::arg("samples") = 1000, py::arg("seed") = 1);

  m.def(
      "cross_validate_formula",
      [](const std::string& metric, int d, int samples, std::uint64_t seed) {
        const FormulaCrossCheck c = cross_validate_formula(lift_spec(metric, d), samples, seed);
        py::dict out;
        out["samples"] = c.samples;
        out["max_rel"] = c.max_rel;
        out["max_rel_pointwise"] = c.max_rel_pointwise;
        out["max_rel_literal"] = c.max_rel_literal;
        return out;
      },
      py::arg("metric") = "ch-cone", py::arg("d") = 1, py::arg("samples") = 100, py::arg("seed") = 1);

  m.def(
      "run_command_json",
      [](const std::string& config) {
        const RunConfig c = config_from_json(nlohmann::json::parse(config));
        validate(c);
        const Report r = [&] {
          py::gil_scoped_release release;
          return run_command(c);
        }();
        return r.to_json().dump();
      },
      py::arg("config"));
}
