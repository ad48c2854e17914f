#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hadamard/errors.hpp"
#include "hadamard/geometry.hpp"
#include "hadamard/operators.hpp"

namespace hadamard {

/// Step sizes λ_1, λ_2, ... for the proximal point algorithm.
class StepSchedule {
 public:
  enum class Kind { constant, power, explicit_list };

  static StepSchedule constant(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("schedule needs a positive step");
    return StepSchedule(Kind::constant, lambda, 0.0, {});
  }
  /// λ_n = c·n^(-alpha)
  static StepSchedule power(double c, double alpha) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("schedule needs a positive step");
    if (!std::isfinite(alpha)) throw ValidationError("power schedule exponent must be finite");
    return StepSchedule(Kind::power, c, alpha, {});
  }
  static StepSchedule explicit_list(std::vector<double> steps) {
    if (steps.empty()) throw ValidationError("explicit schedule needs at least one positive step");
    for (double s : steps) {
      if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("schedule needs a positive step");
    }
    return StepSchedule(Kind::explicit_list, 0.0, 0.0, std::move(steps));
  }

  Kind kind() const noexcept { return kind_; }
  double scale() const noexcept { return c_; }
  double exponent() const noexcept { return alpha_; }
  const std::vector<double>& steps() const noexcept { return steps_; }

  /// λ_n for n >= 1.
  double at(std::size_t n) const {
    if (n == 0) throw DomainError("schedule index starts at 1");
    switch (kind_) {
      case Kind::constant:
        return c_;
      case Kind::power:
        return c_ * std::pow(static_cast<double>(n), -alpha_);
      case Kind::explicit_list:
        if (n > steps_.size()) throw DomainError("explicit schedule exhausted");
        return steps_[n - 1];
    }
    return c_;
  }

  /// Number of available steps; unbounded schedules return nullopt.
  std::optional<std::size_t> length() const {
    if (kind_ == Kind::explicit_list) return steps_.size();
    return std::nullopt;
  }

  /// Σ λ_n² = ∞ is guaranteed (the hypothesis for fixed points of maps).
  bool squares_diverge() const noexcept {
    return kind_ == Kind::constant || (kind_ == Kind::power && alpha_ <= 0.5);
  }
  /// Σ λ_n = ∞ is guaranteed (the hypothesis for minimizers of functionals).
  bool sum_diverges() const noexcept {
    return kind_ == Kind::constant || (kind_ == Kind::power && alpha_ <= 1.0);
  }

 private:
  StepSchedule(Kind k, double c, double alpha, std::vector<double> steps)
      : kind_(k), c_(c), alpha_(alpha), steps_(std::move(steps)) {}

  Kind kind_;
  double c_;
  double alpha_;
  std::vector<double> steps_;
};

template <class P>
struct TrajectorySample {
  std::size_t step = 0;
  double time = 0.0;  // cumulative Σλ for PPA, flow time for semigroups
  P point;
  double residual = 0.0;
  std::optional<double> fejer_distance;
  std::optional<double> energy;
};

template <class P>
struct Trajectory {
  std::vector<TrajectorySample<P>> samples;
  bool converged = false;
  std::vector<std::string> warnings;

  const P& final_point() const { return samples.back().point; }
  double final_residual() const { return samples.back().residual; }
};

/// One backward step plus the stationarity residual used to stop the PPA.
template <class S, class G>
concept ProximalStepper =
    Geometry<G> && requires(const S& s, const typename G::point_type& x, double lambda, double tol) {
      { s.step(x, lambda, tol) } -> std::same_as<typename G::point_type>;
      { s.residual(x) } -> std::convertible_to<double>;
      { s.needs_square_summable_divergence() } -> std::convertible_to<bool>;
    };

/// PPA steps for a nonexpansive map: x -> R_λ x, residual d(x, F x).
template <Geometry G, class F>
  requires SelfMap<F, G>
struct MapStepper {
  const G& geom;
  const F& map;

  typename G::point_type step(const typename G::point_type& x, double lambda, double tol) const {
    return resolvent(geom, map, lambda, x, tol).point;
  }
  double residual(const typename G::point_type& x) const { return geom.distance(x, map(x)); }
  bool needs_square_summable_divergence() const { return true; }
};

struct PpaOptions {
  std::size_t max_iter = 100000;
  double tol = 1e-8;        // stop when the residual is <= tol
  double inner_tol = 0.0;   // resolvent tolerance; 0 picks min(1e-11, tol/1000)
};

/// x_n = R_{λ_n} x_{n-1} (or the stepper's backward step) until the residual
/// is <= tol or max_iter steps are taken. Sample 0 is x0. If `fejer_ref` is
/// given every sample also records its distance to that point.
template <Geometry G, class S>
  requires ProximalStepper<S, G>
Trajectory<typename G::point_type> ppa_with(const G& geom, const S& stepper,
                                            const typename G::point_type& x0, const StepSchedule& schedule,
                                            const PpaOptions& opt,
                                            const typename G::point_type* fejer_ref = nullptr) {
  using P = typename G::point_type;
  if (!(opt.tol > 0.0)) throw DomainError("ppa needs tol > 0");
  const double inner = opt.inner_tol > 0.0 ? opt.inner_tol : std::min(1e-11, opt.tol * 1e-3);

  Trajectory<P> traj;
  const bool certified =
      stepper.needs_square_summable_divergence() ? schedule.squares_diverge() : schedule.sum_diverges();
  if (!certified) {
    traj.warnings.push_back(stepper.needs_square_summable_divergence()
                                ? "schedule divergence uncertified: sum of squared steps may be finite"
                                : "schedule divergence uncertified: sum of steps may be finite");
  }

  auto record = [&](std::size_t n, double time, const P& x, double r) {
    TrajectorySample<P> s{n, time, x, r, std::nullopt, std::nullopt};
    if (fejer_ref) s.fejer_distance = geom.distance(*fejer_ref, x);
    traj.samples.push_back(std::move(s));
  };

  P x = x0;
  double r = stepper.residual(x);
  record(0, 0.0, x, r);
  if (r <= opt.tol) {
    traj.converged = true;
    return traj;
  }
  std::size_t limit = opt.max_iter;
  if (auto len = schedule.length()) limit = std::min(limit, *len);
  double time = 0.0;
  for (std::size_t n = 1; n <= limit; ++n) {
    const double lambda = schedule.at(n);
    x = stepper.step(x, lambda, inner);
    time += lambda;
    r = stepper.residual(x);
    record(n, time, x, r);
    if (r <= opt.tol) {
      traj.converged = true;
      break;
    }
  }
  return traj;
}

template <Geometry G, class F>
  requires SelfMap<F, G>
Trajectory<typename G::point_type> ppa(const G& geom, const F& f, const typename G::point_type& x0,
                                       const StepSchedule& schedule, const PpaOptions& opt = {},
                                       const typename G::point_type* fejer_ref = nullptr) {
  return ppa_with(geom, MapStepper<G, F>{geom, f}, x0, schedule, opt, fejer_ref);
}

// ---------------------------------------------------------------------------
// Exponential formula T_t x = lim (R_{t/n})^n x.

struct SemigroupQuery {
  double t = 0.0;
  double tol = 1e-8;
  std::size_t n_initial = 8;
  /// Richardson-extrapolate successive products along geodesics where the
  /// geometry can continue them uniquely.
  bool extrapolate = true;
};

template <class P>
struct SemigroupResult {
  P point;
  std::size_t steps = 0;  // n of the last product evaluated
  double gap = 0.0;       // distance between the last two estimates
};

inline constexpr std::size_t kMaxSemigroupSteps = std::size_t{1} << 20;

/// (R_{t/n})^n x with each resolvent solved to tol/(4n).
template <class P, class StepFn>
P backward_euler_product(const StepFn& step, const P& x, double t, std::size_t n, double tol) {
  P y = x;
  const double h = t / static_cast<double>(n);
  const double inner = tol / (4.0 * static_cast<double>(n));
  for (std::size_t j = 0; j < n; ++j) y = step(y, h, inner);
  return y;
}

/// Doubles n from q.n_initial until successive estimates are within q.tol.
/// Estimates are the products (R_{t/n})^n x themselves, or, when
/// extrapolating on an extendable geometry, the point at parameter 2 on the
/// geodesic from the n/2-product to the n-product.
template <Geometry G, class StepFn>
SemigroupResult<typename G::point_type> exponential_formula(const G& geom, const StepFn& step,
                                                            const typename G::point_type& x,
                                                            const SemigroupQuery& q) {
  using P = typename G::point_type;
  if (!(q.t >= 0.0) || !std::isfinite(q.t)) throw DomainError("semigroup time must be finite and >= 0");
  if (!(q.tol > 0.0)) throw DomainError("semigroup tolerance must be > 0");
  if (q.n_initial < 1) throw DomainError("semigroup n_initial must be >= 1");
  if (q.t == 0.0) return {x, 0, 0.0};

  auto product = [&](std::size_t n) { return backward_euler_product(step, x, q.t, n, q.tol); };
  auto estimate = [&](const P& coarse, const P& fine) -> P {
    if constexpr (ExtendableGeometry<G>) {
      if (q.extrapolate) {
        if (auto e = geom.extend(coarse, fine, 2.0)) return std::move(*e);
      }
    }
    return fine;
  };

  std::size_t n = q.n_initial;
  P coarse = product(n);
  P prev_estimate = coarse;
  bool have_estimate = false;
  double gap = 0.0;
  while (true) {
    const std::size_t next = 2 * n;
    if (next > kMaxSemigroupSteps) {
      throw ConvergenceFailure<P>("exponential formula did not settle within 2^20 steps", n, gap,
                                  std::move(prev_estimate));
    }
    P fine = product(next);
    P est = estimate(coarse, fine);
    const bool extrapolated = !(est == fine);
    if (have_estimate || !extrapolated) {
      gap = geom.distance(prev_estimate, est);
      if (gap <= q.tol) return {std::move(est), next, gap};
    }
    have_estimate = true;
    prev_estimate = std::move(est);
    coarse = std::move(fine);
    n = next;
  }
}

template <Geometry G, class F>
  requires SelfMap<F, G>
SemigroupResult<typename G::point_type> semigroup_apply(const G& geom, const F& f,
                                                        const typename G::point_type& x,
                                                        const SemigroupQuery& q) {
  auto step = [&](const typename G::point_type& y, double h, double tol) {
    return resolvent(geom, f, h, y, tol).point;
  };
  return exponential_formula(geom, step, x, q);
}

struct FlowOptions {
  double tol = 1e-8;
  std::size_t n_initial = 8;
  bool extrapolate = true;
};

/// T_t x0 on an increasing grid starting at 0, stepping from each grid point
/// to the next with T_{t_k - t_{k-1}}. `converged` reports whether the final
/// residual d(x, F x) is <= tol.
template <Geometry G, class F>
  requires SelfMap<F, G>
Trajectory<typename G::point_type> semigroup_trajectory(const G& geom, const F& f,
                                                        const typename G::point_type& x0,
                                                        std::span<const double> grid,
                                                        const FlowOptions& opt = {},
                                                        const typename G::point_type* fejer_ref = nullptr) {
  using P = typename G::point_type;
  if (grid.empty() || grid.front() != 0.0) throw DomainError("time grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw DomainError("time grid must be strictly increasing");
  }
  Trajectory<P> traj;
  P x = x0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (k > 0) {
      x = semigroup_apply(geom, f, x, SemigroupQuery{grid[k] - grid[k - 1], opt.tol, opt.n_initial, opt.extrapolate})
              .point;
    }
    TrajectorySample<P> s{k, grid[k], x, geom.distance(x, f(x)), std::nullopt, std::nullopt};
    if (fejer_ref) s.fejer_distance = geom.distance(*fejer_ref, x);
    traj.samples.push_back(std::move(s));
  }
  traj.converged = traj.final_residual() <= opt.tol;
  return traj;
}

struct FejerReport {
  bool pass = true;
  double max_violation = 0.0;  // max over n of d(ref,x_{n+1}) - d(ref,x_n), clipped at 0
  std::vector<double> distances;
};

/// d(ref, x_{n+1}) <= d(ref, x_n)(1 + 1e-9) + abs_slack along the trajectory.
template <Geometry G>
FejerReport fejer_check(const G& geom, const Trajectory<typename G::point_type>& traj,
                        const typename G::point_type& ref, double abs_slack = 1e-12) {
  FejerReport rep;
  for (const auto& s : traj.samples) rep.distances.push_back(geom.distance(ref, s.point));
  for (std::size_t i = 1; i < rep.distances.size(); ++i) {
    const double excess = rep.distances[i] - rep.distances[i - 1];
    rep.max_violation = std::max(rep.max_violation, excess);
    if (rep.distances[i] > rep.distances[i - 1] * (1.0 + 1e-9) + abs_slack) rep.pass = false;
  }
  return rep;
}

/// Same, after certifying that ref is a fixed point: d(ref, F ref) <= tol.
template <Geometry G, class F>
  requires SelfMap<F, G>
FejerReport fejer_check(const G& geom, const F& f, const Trajectory<typename G::point_type>& traj,
                        const typename G::point_type& ref, double tol, double abs_slack = 1e-12) {
  if (geom.distance(ref, f(ref)) > tol) throw DomainError("Fejér reference is not a certified fixed point");
  return fejer_check(geom, traj, ref, abs_slack);
}

}  // namespace hadamard
