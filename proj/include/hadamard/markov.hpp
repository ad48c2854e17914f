#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hadamard/errors.hpp"
#include "hadamard/space.hpp"

namespace hadamard {

/// A finite state space with a row-stochastic kernel p that is symmetric
/// with respect to the positive weights μ: p_ij μ_i = p_ji μ_j.
class MarkovKernel {
 public:
  /// Validates row sums and μ-symmetry to 1e-12.
  MarkovKernel(Eigen::MatrixXd p, std::vector<double> mu) : p_(std::move(p)), mu_(std::move(mu)) {
    validate();
  }

  /// Builds the kernel from W_ij = (p_ij μ_i + p_ji μ_j)/2: new weights
  /// μ'_i = Σ_j W_ij and p'_ij = W_ij / μ'_i. The result is exactly
  /// μ'-symmetric and stochastic; `symmetrized()` reports that this happened.
  static MarkovKernel symmetrize(const Eigen::MatrixXd& p, const std::vector<double>& mu) {
    const auto m = p.rows();
    if (p.cols() != m || static_cast<std::size_t>(m) != mu.size()) {
      throw ValidationError("kernel matrix and weights have mismatched sizes");
    }
    Eigen::MatrixXd w(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) w(i, j) = 0.5 * (p(i, j) * mu[i] + p(j, i) * mu[j]);
    }
    std::vector<double> new_mu(m);
    Eigen::MatrixXd q(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      new_mu[i] = w.row(i).sum();
      if (!(new_mu[i] > 0.0)) throw ValidationError("symmetrized state has zero weight");
      q.row(i) = w.row(i) / new_mu[i];
    }
    MarkovKernel k(std::move(q), std::move(new_mu));
    k.symmetrized_ = true;
    return k;
  }

  std::size_t states() const noexcept { return mu_.size(); }
  const Eigen::MatrixXd& p() const noexcept { return p_; }
  double p(std::size_t i, std::size_t j) const { return p_(i, j); }
  const std::vector<double>& mu() const noexcept { return mu_; }
  bool symmetrized() const noexcept { return symmetrized_; }

 private:
  void validate() const {
    const auto m = p_.rows();
    if (m < 1) throw ValidationError("kernel needs at least one state");
    if (p_.cols() != m || static_cast<std::size_t>(m) != mu_.size()) {
      throw ValidationError("kernel matrix and weights have mismatched sizes");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!(mu_[i] > 0.0) || !std::isfinite(mu_[i])) throw ValidationError("state weights must be positive");
      double row = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (!(p_(i, j) >= 0.0)) throw ValidationError("kernel entries must be non-negative");
        row += p_(i, j);
      }
      if (std::abs(row - 1.0) > 1e-12) {
        throw ValidationError("kernel row " + std::to_string(i) + " is not stochastic (sum " +
                              std::to_string(row) + ")");
      }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        if (std::abs(p_(i, j) * mu_[i] - p_(j, i) * mu_[j]) > 1e-12) {
          throw ValidationError("kernel is not symmetric with respect to mu at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
        }
      }
    }
  }

  Eigen::MatrixXd p_;
  std::vector<double> mu_;
  bool symmetrized_ = false;
};

/// One target point per state.
struct MapField {
  std::vector<Point> values;

  std::size_t size() const noexcept { return values.size(); }
  const Point& operator[](std::size_t i) const { return values[i]; }
  Point& operator[](std::size_t i) { return values[i]; }

  friend bool operator==(const MapField&, const MapField&) = default;
};

/// Maps from the state space into a target Space with the metric
/// d_2(f,g) = (Σ_i μ_i d(f_i,g_i)²)^{1/2}; geodesics are pointwise.
class FieldSpace {
 public:
  using point_type = MapField;

  FieldSpace(Space target, std::vector<double> mu) : target_(std::move(target)), mu_(std::move(mu)) {}

  const Space& target() const noexcept { return target_; }
  const std::vector<double>& mu() const noexcept { return mu_; }

  void check(const MapField& f) const {
    if (f.size() != mu_.size()) {
      throw StructuralError("field has " + std::to_string(f.size()) + " values, expected " +
                            std::to_string(mu_.size()));
    }
    for (const auto& v : f.values) target_.check(v);
  }

  double distance(const MapField& a, const MapField& b) const {
    check_sizes(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == b[i]) continue;
      const double d = target_.distance(a[i], b[i]);
      s += mu_[i] * d * d;
    }
    return std::sqrt(s);
  }

  /// States where a and b agree are copied, so frozen values stay bitwise fixed.
  MapField geodesic(const MapField& a, const MapField& b, double t) const {
    check_sizes(a, b);
    MapField out;
    out.values.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      out.values.push_back(a[i] == b[i] ? a[i] : target_.geodesic(a[i], b[i], t));
    }
    return out;
  }

  std::optional<MapField> extend(const MapField& a, const MapField& b, double s) const {
    check_sizes(a, b);
    MapField out;
    out.values.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == b[i]) {
        out.values.push_back(a[i]);
        continue;
      }
      auto e = target_.extend(a[i], b[i], s);
      if (!e) return std::nullopt;
      out.values.push_back(std::move(*e));
    }
    return out;
  }

 private:
  void check_sizes(const MapField& a, const MapField& b) const {
    if (a.size() != mu_.size() || b.size() != mu_.size()) {
      throw StructuralError("fields do not match the state space");
    }
  }

  Space target_;
  std::vector<double> mu_;
};

inline double d2(const FieldSpace& fs, const MapField& f, const MapField& g) { return fs.distance(f, g); }

/// Pf(i) = Fréchet mean of {f_j} with weights {p_ij}, zero weights dropped.
inline MapField markov_apply(const MarkovKernel& k, const Space& target, const MapField& f) {
  if (f.size() != k.states()) throw StructuralError("field does not match the kernel");
  MapField out;
  out.values.reserve(f.size());
  std::vector<Point> pts;
  std::vector<double> w;
  for (std::size_t i = 0; i < k.states(); ++i) {
    pts.clear();
    w.clear();
    for (std::size_t j = 0; j < k.states(); ++j) {
      if (k.p(i, j) > 0.0) {
        pts.push_back(f[j]);
        w.push_back(k.p(i, j));
      }
    }
    out.values.push_back(target.frechet_mean(pts, w));
  }
  return out;
}

/// The nonlinear Markov operator as a self-map of a FieldSpace.
struct MarkovOperator {
  const MarkovKernel& kernel;
  const Space& target;

  MapField operator()(const MapField& f) const { return markov_apply(kernel, target, f); }
};

/// A Dirichlet problem: kernel, target, interior set D and the anchor field
/// h whose values on the complement of D are the boundary data.
class DirichletSpec {
 public:
  DirichletSpec(MarkovKernel kernel, Space target, std::vector<std::size_t> interior, MapField h)
      : kernel_(std::move(kernel)), target_(std::move(target)), h_(std::move(h)) {
    in_d_.assign(kernel_.states(), false);
    for (std::size_t i : interior) {
      if (i >= kernel_.states()) throw ValidationError("interior state " + std::to_string(i) + " out of range");
      if (in_d_[i]) throw ValidationError("interior state " + std::to_string(i) + " listed twice");
      in_d_[i] = true;
    }
    for (std::size_t i = 0; i < in_d_.size(); ++i) {
      if (in_d_[i]) interior_.push_back(i);
    }
    if (h_.size() != kernel_.states()) throw ValidationError("anchor field does not match the kernel");
    for (const auto& v : h_.values) target_.check(v);
  }

  const MarkovKernel& kernel() const noexcept { return kernel_; }
  const Space& target() const noexcept { return target_; }
  const MapField& anchor() const noexcept { return h_; }
  const std::vector<std::size_t>& interior() const noexcept { return interior_; }
  bool in_interior(std::size_t i) const { return in_d_.at(i); }
  std::size_t states() const noexcept { return kernel_.states(); }

  FieldSpace field_space() const { return FieldSpace(target_, kernel_.mu()); }

  /// Throws DomainError unless f equals h exactly off D.
  void check_boundary(const MapField& f) const {
    if (f.size() != states()) throw DomainError("field does not match the state space");
    for (std::size_t i = 0; i < states(); ++i) {
      target_.check(f[i]);
      if (!in_d_[i] && !(f[i] == h_[i])) {
        throw DomainError("field differs from the boundary data at state " + std::to_string(i));
      }
    }
  }

  /// h with its interior values replaced.
  MapField with_interior(const std::vector<Point>& values) const {
    if (values.size() != interior_.size()) throw StructuralError("wrong number of interior values");
    MapField f = h_;
    for (std::size_t k = 0; k < interior_.size(); ++k) f[interior_[k]] = values[k];
    check_boundary(f);
    return f;
  }

 private:
  MarkovKernel kernel_;
  Space target_;
  MapField h_;
  std::vector<bool> in_d_;
  std::vector<std::size_t> interior_;
};

/// P_D f: Pf on D, f elsewhere.
inline MapField dirichlet_apply(const DirichletSpec& spec, const MapField& f) {
  spec.check_boundary(f);
  const auto& k = spec.kernel();
  MapField out = f;
  std::vector<Point> pts;
  std::vector<double> w;
  for (std::size_t i : spec.interior()) {
    pts.clear();
    w.clear();
    for (std::size_t j = 0; j < k.states(); ++j) {
      if (k.p(i, j) > 0.0) {
        pts.push_back(f[j]);
        w.push_back(k.p(i, j));
      }
    }
    out[i] = spec.target().frechet_mean(pts, w);
  }
  return out;
}

struct DirichletOperator {
  const DirichletSpec& spec;

  MapField operator()(const MapField& f) const { return dirichlet_apply(spec, f); }
};

struct SpectralBound {
  double lambda = 1.0;  // 1 - ||p_D^k||
  double norm = 0.0;
  std::size_t iterations = 0;
};

/// λ_k = 1 - ||p_D^k|| with p_D the linear Dirichlet kernel acting on
/// real functions vanishing off D, normed in L²(μ). The norm comes from
/// power iteration on B*B, B = Q^k, Q the interior block and B* its
/// μ-adjoint, stopped when successive estimates differ by <= tol.
inline SpectralBound spectral_bound(const DirichletSpec& spec, std::size_t k, double tol = 1e-10,
                                    std::size_t max_iter = 1'000'000) {
  if (k < 1) throw DomainError("spectral bound needs k >= 1");
  const auto& idx = spec.interior();
  const auto n = static_cast<Eigen::Index>(idx.size());
  if (n == 0) return {1.0, 0.0, 0};

  Eigen::MatrixXd q(n, n);
  Eigen::VectorXd mu(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    mu(a) = spec.kernel().mu()[idx[a]];
    for (Eigen::Index b = 0; b < n; ++b) q(a, b) = spec.kernel().p(idx[a], idx[b]);
  }
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 0; i < k; ++i) b = q * b;
  // B* = M^{-1} B^T M
  const Eigen::MatrixXd b_adj = mu.cwiseInverse().asDiagonal() * b.transpose() * mu.asDiagonal();
  const Eigen::MatrixXd a = b_adj * b;
  auto mu_norm = [&](const Eigen::VectorXd& v) { return std::sqrt(v.dot(mu.cwiseProduct(v))); };

  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  v /= mu_norm(v);

  double estimate = mu_norm(b * v);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd w = a * v;
    const double wn = mu_norm(w);
    if (wn == 0.0) return {1.0, 0.0, it};
    v = w / wn;
    const double next = mu_norm(b * v);
    if (std::abs(next - estimate) <= tol) return {1.0 - next, next, it};
    estimate = next;
  }
  throw ConvergenceError("spectral bound power iteration stagnated", max_iter, estimate);
}

}  // namespace hadamard
