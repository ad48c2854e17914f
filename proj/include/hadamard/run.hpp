#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hadamard/config.hpp"
#include "hadamard/energy.hpp"
#include "hadamard/errors.hpp"
#include "hadamard/flows.hpp"
#include "hadamard/heat.hpp"
#include "hadamard/io.hpp"
#include "hadamard/operators.hpp"
#include "hadamard/serialize.hpp"

namespace hadamard {

enum class RunStatus { converged, max_iterations, error };

inline std::string_view status_name(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iterations: return "max-iterations";
    case RunStatus::error: return "error";
  }
  return {};
}

inline int exit_code(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return 0;
    case RunStatus::max_iterations: return 2;
    case RunStatus::error: return 1;
  }
  return 1;
}

struct RunReport {
  std::string config_echo;
  RunStatus status = RunStatus::error;
  std::size_t iterations = 0;  // PPA steps, grid steps or λ samples
  double final_residual = 0.0;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, std::string>> details;  // extra key/value lines
  std::string records;                                       // CSV body
  std::string error;
};

/// Footer lines appended to record files: everything except wall clock.
inline std::string report_footer(const RunReport& r) {
  std::string s = "# status: " + std::string(status_name(r.status)) + "\n";
  s += "# iterations: " + std::to_string(r.iterations) + "\n";
  s += "# final_residual: " + format_double(r.final_residual) + "\n";
  for (const auto& [k, v] : r.details) s += "# " + k + ": " + v + "\n";
  for (const auto& w : r.warnings) s += "# warning: " + w + "\n";
  if (!r.error.empty()) s += "# error: " + r.error + "\n";
  return s;
}

inline void print_report(std::ostream& os, const RunReport& r) {
  os << "== config\n" << r.config_echo;
  os << "== report\n";
  os << "status: " << status_name(r.status) << "\n";
  os << "iterations: " << r.iterations << "\n";
  os << "final_residual: " << format_double(r.final_residual) << "\n";
  for (const auto& [k, v] : r.details) os << k << ": " << v << "\n";
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  if (!r.error.empty()) os << "error: " << r.error << "\n";
  os << "wall_clock_seconds: " << r.wall_clock_seconds << "\n";
}

namespace detail {

inline Point start_point(const RunConfig& c, const Space& space) {
  if (c.x0) return parse_point(space, *c.x0);
  std::mt19937_64 rng(c.seed);
  return space.sample(rng, 5.0);
}

inline std::string bool_text(bool b) { return b ? "true" : "false"; }

inline void add_lipschitz_sample(RunReport& rep, const RunConfig& c, const Space& space, const NonexpansiveMap& f) {
  std::mt19937_64 rng(c.seed);
  const auto lip = sample_lipschitz(space, f, rng, 200, 5.0);
  rep.details.emplace_back("lipschitz_sample_max_ratio", format_double(lip.max_ratio));
}

inline std::optional<Point> fejer_reference(const RunConfig& c, const Space& space, const NonexpansiveMap& f,
                                            const Point& x0) {
  if (c.fixed_point) return parse_point(space, *c.fixed_point);
  if (f.fixed_set()) return space.project(*f.fixed_set(), x0);
  return std::nullopt;
}

inline void run_resolvent_curve(const RunConfig& c, RunReport& rep) {
  const Space space(c.space);
  const auto f = parse_map(space, *c.map);
  add_lipschitz_sample(rep, c, space, f);
  const Point x0 = start_point(c, space);
  const auto curve = resolvent_curve(space, f, x0, c.lambdas, std::min(1e-11, c.tol * 1e-3));
  std::ostringstream os;
  os << "lambda,point,displacement,residual,iterations\n";
  for (const auto& s : curve.samples) {
    os << format_double(s.lambda) << ',' << csv_quote(format_point(space, s.point)) << ','
       << format_double(s.displacement) << ',' << format_double(s.residual) << ',' << s.iterations << '\n';
  }
  rep.records = os.str();
  rep.status = RunStatus::converged;
  rep.iterations = curve.samples.size();
  rep.final_residual = curve.samples.back().residual;
  rep.details.emplace_back("displacement_monotone", bool_text(curve.displacement_monotone));
  if (auto ref = fejer_reference(c, space, f, x0)) {
    rep.details.emplace_back("distance_to_fixed_point_projection",
                             format_double(space.distance(curve.samples.back().point, *ref)));
  }
}

template <class P>
void finish_trajectory(RunReport& rep, const Trajectory<P>& traj) {
  rep.iterations = traj.samples.size() - 1;
  rep.final_residual = traj.final_residual();
  for (const auto& w : traj.warnings) rep.warnings.push_back(w);
}

inline void run_ppa(const RunConfig& c, RunReport& rep) {
  const Space space(c.space);
  const Point x0 = start_point(c, space);
  const StepSchedule schedule = parse_schedule(*c.schedule);
  const PpaOptions opt{c.max_iter, c.tol, 0.0};
  std::ostringstream os;
  if (c.map) {
    const auto f = parse_map(space, *c.map);
    add_lipschitz_sample(rep, c, space, f);
    const auto ref = fejer_reference(c, space, f, x0);
    const auto traj = ppa(space, f, x0, schedule, opt, ref ? &*ref : nullptr);
    write_trajectory_csv(os, space, traj, false);
    finish_trajectory(rep, traj);
    rep.status = traj.converged ? RunStatus::converged : RunStatus::max_iterations;
    if (ref) {
      const auto fe = fejer_check(space, traj, *ref);
      rep.details.emplace_back("fejer_reference_residual", format_double(space.distance(*ref, f(*ref))));
      rep.details.emplace_back("fejer_pass", bool_text(fe.pass));
    }
  } else {
    const auto phi = parse_functional(space, *c.functional);
    const auto traj = ppa_functional(phi, x0, schedule, opt);
    write_trajectory_csv(os, space, traj, true);
    finish_trajectory(rep, traj);
    rep.status = traj.converged ? RunStatus::converged : RunStatus::max_iterations;
    rep.details.emplace_back("final_value", format_double(phi.value(traj.final_point())));
  }
  rep.records = os.str();
}

inline void run_semigroup(const RunConfig& c, RunReport& rep) {
  const Space space(c.space);
  const Point x0 = start_point(c, space);
  const FlowOptions opt{c.tol, 8, true};
  std::ostringstream os;
  if (c.map) {
    const auto f = parse_map(space, *c.map);
    add_lipschitz_sample(rep, c, space, f);
    const auto ref = fejer_reference(c, space, f, x0);
    const auto traj = semigroup_trajectory(space, f, x0, c.t_grid, opt, ref ? &*ref : nullptr);
    write_trajectory_csv(os, space, traj, false);
    finish_trajectory(rep, traj);
    rep.details.emplace_back("fixed_point_reached", bool_text(traj.converged));
  } else {
    const auto phi = parse_functional(space, *c.functional);
    const auto traj = gradient_flow(phi, x0, c.t_grid, opt);
    write_trajectory_csv(os, space, traj, true);
    finish_trajectory(rep, traj);
    rep.details.emplace_back("minimizer_reached", bool_text(traj.converged));
  }
  // Every grid point was evaluated to tolerance; reaching a fixed point is reported separately.
  rep.status = RunStatus::converged;
  rep.records = os.str();
}

inline DirichletSpec load_spec(const RunConfig& c) {
  std::filesystem::path path(*c.instance);
  if (path.is_relative() && !c.base_dir.empty()) path = std::filesystem::path(c.base_dir) / path;
  const Space target(c.space);
  return make_dirichlet_spec(parse_instance(read_file(path.string()), target), target, c.symmetrize);
}

inline void run_dirichlet(const RunConfig& c, RunReport& rep) {
  const DirichletSpec spec = load_spec(c);
  const MapField f0 = spec.anchor();
  const FieldSpace fs = spec.field_space();
  const std::string method = c.method.value_or("ppa");
  Trajectory<MapField> traj;
  if (method == "ppa") {
    const StepSchedule schedule = c.schedule ? parse_schedule(*c.schedule) : StepSchedule::constant(1.0);
    traj = solve_dirichlet_ppa(spec, f0, schedule, PpaOptions{c.max_iter, c.tol, 0.0});
  } else {
    traj = solve_dirichlet_flow(spec, f0, c.t_grid, FlowOptions{c.tol, 8, true});
  }
  std::ostringstream os;
  write_trajectory_csv(os, fs, traj, true);
  rep.records = os.str();
  finish_trajectory(rep, traj);
  rep.status = traj.converged ? RunStatus::converged : RunStatus::max_iterations;
  spec.check_boundary(traj.final_point());
  rep.details.emplace_back("method", method);
  rep.details.emplace_back("kernel_symmetrized", bool_text(spec.kernel().symmetrized()));
  rep.details.emplace_back("boundary_preserved", "true");
  rep.details.emplace_back("spectral_bound_lambda_1", format_double(spectral_bound(spec, 1).lambda));
  rep.details.emplace_back("final_field", format_field(spec.target(), traj.final_point()));
}

inline void run_probe(const RunConfig& c, RunReport& rep) {
  const DirichletSpec spec = load_spec(c);
  const auto rows = conjecture_probe(spec, spec.anchor(), c.t_grid, FlowOptions{c.tol, 8, true});
  std::ostringstream os;
  os << "t,heat_energy,d2_gap_t,d2_gap_half_t,d2_gap_double_t,energy_gap_t,energy_gap_half_t,energy_gap_double_t\n";
  for (const auto& r : rows) {
    os << format_double(r.t) << ',' << format_double(r.heat_energy);
    for (double g : r.d2_gap) os << ',' << format_double(g);
    for (double g : r.energy_gap) os << ',' << format_double(g);
    os << '\n';
  }
  rep.records = os.str();
  rep.status = RunStatus::converged;
  rep.iterations = rows.size();
  rep.final_residual = rows.back().d2_gap[1];
  rep.details.emplace_back("kernel_symmetrized", bool_text(spec.kernel().symmetrized()));
  rep.details.emplace_back("note", "final_residual is the d2 gap of the t/2 column at the last time");
}

}  // namespace detail

/// Runs one configured command. Library errors become status `error`; the
/// records (if any) and the footer are written to `c.output` when set.
inline RunReport run(const RunConfig& c) {
  RunReport rep;
  rep.config_echo = serialize_config(c);
  const auto start = std::chrono::steady_clock::now();
  try {
    validate(c);
    switch (c.command) {
      case Command::resolvent_curve: detail::run_resolvent_curve(c, rep); break;
      case Command::ppa: detail::run_ppa(c, rep); break;
      case Command::semigroup: detail::run_semigroup(c, rep); break;
      case Command::dirichlet: detail::run_dirichlet(c, rep); break;
      case Command::probe_conjecture: detail::run_probe(c, rep); break;
    }
  } catch (const Error& e) {
    rep.status = RunStatus::error;
    rep.error = e.what();
  }
  rep.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (c.output) {
    std::ofstream out(*c.output, std::ios::binary);
    if (!out) {
      rep.status = RunStatus::error;
      rep.error = "cannot write output file '" + *c.output + "'";
    } else {
      out << rep.records << report_footer(rep);
    }
  }
  return rep;
}

}  // namespace hadamard
