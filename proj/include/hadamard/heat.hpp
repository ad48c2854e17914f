#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "hadamard/energy.hpp"
#include "hadamard/errors.hpp"
#include "hadamard/flows.hpp"
#include "hadamard/markov.hpp"

namespace hadamard {

/// Discrete heat flow: the PPA with F = P_D over (MapField, d_2). Samples
/// carry the Dirichlet energy; residual is d_2(f, P_D f).
inline Trajectory<MapField> solve_dirichlet_ppa(const DirichletSpec& spec, const MapField& f0,
                                                const StepSchedule& schedule, const PpaOptions& opt = {}) {
  spec.check_boundary(f0);
  const FieldSpace fs = spec.field_space();
  const DirichletOperator op{spec};
  auto traj = ppa(fs, op, f0, schedule, opt);
  const DirichletEnergy energy(spec);
  for (auto& s : traj.samples) s.energy = energy.value(s.point);
  return traj;
}

/// Continuous heat flow T_t f0 with F = P_D on a grid starting at 0.
inline Trajectory<MapField> solve_dirichlet_flow(const DirichletSpec& spec, const MapField& f0,
                                                 std::span<const double> grid, const FlowOptions& opt = {}) {
  spec.check_boundary(f0);
  const FieldSpace fs = spec.field_space();
  const DirichletOperator op{spec};
  auto traj = semigroup_trajectory(fs, op, f0, grid, opt);
  const DirichletEnergy energy(spec);
  for (auto& s : traj.samples) s.energy = energy.value(s.point);
  return traj;
}

inline constexpr std::array<double, 3> kConjectureRescalings{1.0, 0.5, 2.0};

struct ConjectureRow {
  double t = 0.0;
  double heat_energy = 0.0;                // E(T_t f0)
  std::array<double, 3> d2_gap{};          // d_2(T_t f0, S_{c t} f0), c in kConjectureRescalings
  std::array<double, 3> energy_gap{};      // E(T_t f0) - E(S_{c t} f0)
};

/// Compares the heat flow T_t of P_D with the gradient flow S of the
/// Dirichlet energy at the rescaled times t, t/2 and 2t. Report only.
inline std::vector<ConjectureRow> conjecture_probe(const DirichletSpec& spec, const MapField& f0,
                                                   std::span<const double> grid, const FlowOptions& opt = {}) {
  const auto heat = solve_dirichlet_flow(spec, f0, grid, opt);
  const DirichletEnergy energy(spec);
  const FieldSpace fs = spec.field_space();

  std::array<std::vector<TrajectorySample<MapField>>, 3> grads;
  for (std::size_t c = 0; c < kConjectureRescalings.size(); ++c) {
    std::vector<double> scaled(grid.begin(), grid.end());
    for (double& t : scaled) t *= kConjectureRescalings[c];
    grads[c] = gradient_flow(energy, f0, scaled, opt).samples;
  }

  std::vector<ConjectureRow> rows;
  for (std::size_t k = 0; k < heat.samples.size(); ++k) {
    ConjectureRow row;
    row.t = heat.samples[k].time;
    row.heat_energy = *heat.samples[k].energy;
    for (std::size_t c = 0; c < 3; ++c) {
      row.d2_gap[c] = fs.distance(heat.samples[k].point, grads[c][k].point);
      row.energy_gap[c] = row.heat_energy - *grads[c][k].energy;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hadamard
