#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hadamard/errors.hpp"
#include "hadamard/flows.hpp"
#include "hadamard/geometry.hpp"
#include "hadamard/markov.hpp"
#include "hadamard/space.hpp"

namespace hadamard {

/// A convex functional with an exact or iterative proximal map
/// J_λ x = argmin_y φ(y) + d(x,y)²/(2λ), and a stationarity residual that
/// vanishes exactly on the minimizers.
template <class Phi>
concept ConvexFunctional = requires(const Phi& phi, const typename Phi::geometry_type::point_type& x,
                                    double lambda, double tol) {
  typename Phi::geometry_type;
  requires Geometry<typename Phi::geometry_type>;
  { phi.geometry() } -> std::convertible_to<const typename Phi::geometry_type&>;
  { phi.value(x) } -> std::convertible_to<double>;
  { phi.prox(lambda, x, tol) } -> std::same_as<typename Phi::geometry_type::point_type>;
  { phi.residual(x) } -> std::convertible_to<double>;
};

/// φ(y) = ½ (y - c)ᵀ Q (y - c) on R^n with Q symmetric positive semidefinite.
/// Min φ = c + ker Q.
class EuclideanQuadratic {
 public:
  using geometry_type = Space;

  EuclideanQuadratic(Eigen::MatrixXd q, Eigen::VectorXd offset)
      : space_(Space::euclidean(static_cast<std::size_t>(std::max<Eigen::Index>(q.rows(), 1)))),
        q_(std::move(q)),
        c_(std::move(offset)) {
    const auto n = q_.rows();
    if (n < 1 || q_.cols() != n || c_.size() != n) throw StructuralError("quadratic needs n x n Q and length-n c");
    if ((q_ - q_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw StructuralError("quadratic form matrix must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q_);
    const double top = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-12 * top) throw StructuralError("quadratic form must be PSD");
    // Orthonormal basis of ker Q, for projections onto Min φ.
    std::vector<Eigen::Index> kernel_cols;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (eig.eigenvalues()(i) <= 1e-12 * top) kernel_cols.push_back(i);
    }
    kernel_ = Eigen::MatrixXd(n, static_cast<Eigen::Index>(kernel_cols.size()));
    for (std::size_t j = 0; j < kernel_cols.size(); ++j) {
      kernel_.col(static_cast<Eigen::Index>(j)) = eig.eigenvectors().col(kernel_cols[j]);
    }
  }

  const Space& geometry() const noexcept { return space_; }
  const Eigen::MatrixXd& matrix() const noexcept { return q_; }
  const Eigen::VectorXd& offset() const noexcept { return c_; }

  double value(const Point& y) const {
    const Eigen::VectorXd r = vec(y) - c_;
    return 0.5 * r.dot(q_ * r);
  }

  /// (I + λQ)^{-1}(x + λQc); J_0 is the identity.
  Point prox(double lambda, const Point& x, double /*tol*/ = 0.0) const {
    if (!(lambda >= 0.0)) throw DomainError("prox needs λ >= 0");
    if (lambda == 0.0) return x;
    const auto n = q_.rows();
    const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) + lambda * q_;
    const Eigen::VectorXd rhs = vec(x) + lambda * (q_ * c_);
    return to_point(lhs.ldlt().solve(rhs));
  }

  /// |Q (x - c)|, the gradient norm.
  double residual(const Point& x) const { return (q_ * (vec(x) - c_)).norm(); }

  double min_value() const noexcept { return 0.0; }

  /// Orthogonal projection of x onto Min φ = c + ker Q.
  Point min_projection(const Point& x) const {
    const Eigen::VectorXd r = vec(x) - c_;
    return to_point(c_ + kernel_ * (kernel_.transpose() * r));
  }

 private:
  Eigen::VectorXd vec(const Point& p) const {
    space_.check(p);
    return Eigen::Map<const Eigen::VectorXd>(p.coords().data(), static_cast<Eigen::Index>(p.coords().size()));
  }
  static Point to_point(const Eigen::VectorXd& v) { return Point(std::vector<double>(v.data(), v.data() + v.size())); }

  Space space_;
  Eigen::MatrixXd q_;
  Eigen::VectorXd c_;
  Eigen::MatrixXd kernel_;
};

struct ProxOptions {
  std::size_t max_sweeps = 100000;
};

/// E(f) = ½ Σ_i μ_i Σ_j p_ij d(f_i, f_j)² on fields that agree with the
/// boundary data off D; only interior values move.
class DirichletEnergy {
 public:
  using geometry_type = FieldSpace;

  explicit DirichletEnergy(const DirichletSpec& spec, ProxOptions opt = {})
      : spec_(&spec), fields_(spec.field_space()), opt_(opt) {}

  const FieldSpace& geometry() const noexcept { return fields_; }
  const DirichletSpec& spec() const noexcept { return *spec_; }

  double value(const MapField& f) const {
    const auto& k = spec_->kernel();
    const auto& target = spec_->target();
    double e = 0.0;
    for (std::size_t i = 0; i < k.states(); ++i) {
      for (std::size_t j = 0; j < k.states(); ++j) {
        if (k.p(i, j) == 0.0) continue;
        const double d = target.distance(f[i], f[j]);
        e += k.mu()[i] * k.p(i, j) * d * d;
      }
    }
    return 0.5 * e;
  }

  /// d_2(f, P_D f); zero exactly on the minimizers with the given boundary data.
  double residual(const MapField& f) const { return fields_.distance(f, dirichlet_apply(*spec_, f)); }

  /// Cyclic block-coordinate minimization over interior states in ascending
  /// order; each block is a weighted Fréchet mean of the neighbours (weights
  /// λ(μ_i p_ij + μ_j p_ji)) and the anchor x_i (weight μ_i). Sweeps stop
  /// when the d_2 displacement of a sweep, and its geometric tail estimate,
  /// are both <= tol.
  MapField prox(double lambda, const MapField& x, double tol) const {
    std::vector<double> history;
    return prox_with_history(lambda, x, tol, history);
  }

  MapField prox_with_history(double lambda, const MapField& x, double tol, std::vector<double>& history) const {
    if (!(lambda >= 0.0)) throw DomainError("prox needs λ >= 0");
    if (!(tol > 0.0)) throw DomainError("prox needs tol > 0");
    spec_->check_boundary(x);
    if (lambda == 0.0) return x;
    const auto& k = spec_->kernel();
    const auto& mu = k.mu();
    const auto& target = spec_->target();

    MapField y = x;
    auto objective = [&](const MapField& f) {
      const double d = fields_.distance(x, f);
      return value(f) + d * d / (2.0 * lambda);
    };
    history.clear();
    history.push_back(objective(y));

    std::vector<Point> pts;
    std::vector<double> w;
    double prev_disp = 0.0;
    for (std::size_t sweep = 1; sweep <= opt_.max_sweeps; ++sweep) {
      double disp2 = 0.0;
      for (std::size_t i : spec_->interior()) {
        pts.clear();
        w.clear();
        for (std::size_t j = 0; j < k.states(); ++j) {
          if (j == i) continue;
          const double wij = lambda * (mu[i] * k.p(i, j) + mu[j] * k.p(j, i));
          if (wij > 0.0) {
            pts.push_back(y[j]);
            w.push_back(wij);
          }
        }
        pts.push_back(x[i]);
        w.push_back(mu[i]);
        Point next = target.frechet_mean(pts, w);
        const double d = target.distance(next, y[i]);
        disp2 += mu[i] * d * d;
        y[i] = std::move(next);
      }
      history.push_back(objective(y));
      const double disp = std::sqrt(disp2);
      if (disp == 0.0) return y;
      if (disp <= tol && sweep > 1) {
        const double rate = prev_disp > 0.0 ? disp / prev_disp : 1.0;
        if (rate < 1.0 && disp * rate / (1.0 - rate) <= tol) return y;
      }
      prev_disp = disp;
    }
    throw ConvergenceFailure<std::vector<double>>("dirichlet-energy prox sweep cap exceeded", opt_.max_sweeps,
                                                  prev_disp, history);
  }

 private:
  const DirichletSpec* spec_;
  FieldSpace fields_;
  ProxOptions opt_;
};

/// PPA steps for a functional: x -> J_λ x, residual from the functional.
/// The convergence hypothesis on the steps is Σ λ_n = ∞.
template <ConvexFunctional Phi>
struct FunctionalStepper {
  const Phi& phi;

  auto step(const typename Phi::geometry_type::point_type& x, double lambda, double tol) const {
    return phi.prox(lambda, x, tol);
  }
  double residual(const typename Phi::geometry_type::point_type& x) const { return phi.residual(x); }
  bool needs_square_summable_divergence() const { return false; }
};

template <ConvexFunctional Phi>
Trajectory<typename Phi::geometry_type::point_type> ppa_functional(
    const Phi& phi, const typename Phi::geometry_type::point_type& x0, const StepSchedule& schedule,
    const PpaOptions& opt = {}) {
  auto traj = ppa_with(phi.geometry(), FunctionalStepper<Phi>{phi}, x0, schedule, opt);
  for (auto& s : traj.samples) s.energy = phi.value(s.point);
  return traj;
}

/// S_t x0 = lim (J_{t/n})^n x0 on a time grid starting at 0, by the same
/// doubling scheme as the map semigroup. Samples carry φ values.
template <ConvexFunctional Phi>
Trajectory<typename Phi::geometry_type::point_type> gradient_flow(
    const Phi& phi, const typename Phi::geometry_type::point_type& x0, std::span<const double> grid,
    const FlowOptions& opt = {}) {
  using P = typename Phi::geometry_type::point_type;
  if (grid.empty() || grid.front() != 0.0) throw DomainError("time grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw DomainError("time grid must be strictly increasing");
  }
  auto step = [&](const P& y, double h, double tol) { return phi.prox(h, y, tol); };
  Trajectory<P> traj;
  P x = x0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (k > 0) {
      x = exponential_formula(phi.geometry(), step, x,
                              SemigroupQuery{grid[k] - grid[k - 1], opt.tol, opt.n_initial, opt.extrapolate})
              .point;
    }
    TrajectorySample<P> s{k, grid[k], x, phi.residual(x), std::nullopt, phi.value(x)};
    traj.samples.push_back(std::move(s));
  }
  traj.converged = traj.final_residual() <= opt.tol;
  return traj;
}

template <class P>
struct ProxProbeSample {
  double lambda = 0.0;
  P point;
  double value = 0.0;
  std::optional<double> distance_to_target;  // d(J_λ x0, target) when a target is known
};

/// J_λ x0 along an increasing λ grid. `target` is the projection of x0
/// onto Min φ when it is known.
template <ConvexFunctional Phi>
std::vector<ProxProbeSample<typename Phi::geometry_type::point_type>> resolvent_limit_probe(
    const Phi& phi, const typename Phi::geometry_type::point_type& x0, std::span<const double> lambdas,
    double tol, const typename Phi::geometry_type::point_type* target = nullptr) {
  using P = typename Phi::geometry_type::point_type;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw DomainError("probe needs positive λ values");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw DomainError("λ grid must be strictly increasing");
  }
  std::vector<ProxProbeSample<P>> out;
  for (double lambda : lambdas) {
    ProxProbeSample<P> s;
    s.lambda = lambda;
    s.point = phi.prox(lambda, x0, tol);
    s.value = phi.value(s.point);
    if (target) s.distance_to_target = phi.geometry().distance(s.point, *target);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hadamard
