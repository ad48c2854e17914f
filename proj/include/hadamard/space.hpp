#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hadamard/errors.hpp"

namespace hadamard {

enum class SpaceKind { euclidean, hyperbolic, spider, product };

/// Which Hadamard space a point lives in.
///
/// `dim` is the dimension n for Euclidean R^n and hyperbolic H^n, the number
/// of legs k for a spider, and the number of factors for a product.
struct SpaceDescriptor {
  SpaceKind kind = SpaceKind::euclidean;
  std::size_t dim = 1;
  std::vector<SpaceDescriptor> factors;

  static SpaceDescriptor euclidean(std::size_t n) {
    if (n < 1) throw StructuralError("euclidean space needs dimension >= 1");
    return {SpaceKind::euclidean, n, {}};
  }
  static SpaceDescriptor hyperbolic(std::size_t n) {
    if (n < 1) throw StructuralError("hyperbolic space needs dimension >= 1");
    return {SpaceKind::hyperbolic, n, {}};
  }
  static SpaceDescriptor spider(std::size_t k) {
    if (k < 2) throw StructuralError("spider needs at least 2 legs");
    return {SpaceKind::spider, k, {}};
  }
  static SpaceDescriptor product(std::vector<SpaceDescriptor> factors) {
    if (factors.empty()) throw StructuralError("product space needs at least one factor");
    const std::size_t n = factors.size();
    return {SpaceKind::product, n, std::move(factors)};
  }

  friend bool operator==(const SpaceDescriptor&, const SpaceDescriptor&) = default;
};

/// Spider coordinates: leg in 1..k and distance from the hub. The hub is
/// stored canonically as leg 1, radius 0.
struct SpiderCoord {
  std::size_t leg = 1;
  double radius = 0.0;
};

/// An element of one of the backends. The coordinates are interpreted by
/// the owning Space: a real vector (Euclidean, or hyperboloid coordinates
/// x_0..x_n), a SpiderCoord, or one Point per product factor.
class Point {
 public:
  using Coords = std::vector<double>;
  using Parts = std::vector<Point>;

  Point() = default;
  explicit Point(Coords c) : data_(std::move(c)) {}
  explicit Point(SpiderCoord s) : data_(s) {
    if (data_spider().radius == 0.0) data_spider().leg = 1;
  }
  explicit Point(Parts p) : data_(std::move(p)) {}

  bool holds_coords() const noexcept { return std::holds_alternative<Coords>(data_); }
  bool holds_spider() const noexcept { return std::holds_alternative<SpiderCoord>(data_); }
  bool holds_parts() const noexcept { return std::holds_alternative<Parts>(data_); }

  const Coords& coords() const { return get<Coords>("coordinate vector"); }
  Coords& coords() { return const_cast<Coords&>(std::as_const(*this).coords()); }
  const SpiderCoord& spider() const { return get<SpiderCoord>("spider coordinate"); }
  const Parts& parts() const { return get<Parts>("product tuple"); }
  Parts& parts() { return const_cast<Parts&>(std::as_const(*this).parts()); }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.data_.index() != b.data_.index()) return false;
    if (a.holds_coords()) return a.coords() == b.coords();
    if (a.holds_spider()) {
      return a.spider().leg == b.spider().leg && a.spider().radius == b.spider().radius;
    }
    const auto& pa = a.parts();
    const auto& pb = b.parts();
    return pa.size() == pb.size() && std::equal(pa.begin(), pa.end(), pb.begin());
  }

 private:
  template <class T>
  const T& get(const char* what) const {
    if (const T* v = std::get_if<T>(&data_)) return *v;
    throw StructuralError(std::string("point does not hold a ") + what);
  }
  SpiderCoord& data_spider() { return std::get<SpiderCoord>(data_); }

  std::variant<Coords, SpiderCoord, Parts> data_;
};

inline Point spider_point(std::size_t leg, double radius) { return Point(SpiderCoord{leg, radius}); }

/// Weighted points in one space. Weights are non-negative with positive sum.
struct WeightedPointSet {
  std::vector<Point> points;
  std::vector<double> weights;
};

/// Closed geodesically convex subsets with an exact metric projection.
struct ConvexSet {
  struct Singleton {
    Point point;
  };
  /// base + span(directions); directions orthonormal.
  struct AffineSubspace {
    std::vector<double> base;
    std::vector<std::vector<double>> directions;
  };
  /// Union over legs of the segments {(leg, r) : r <= caps[leg-1]}. A cap of
  /// 0 excludes the leg; the hub always belongs to the set.
  struct SpiderSubtree {
    std::vector<double> caps;
  };
  struct WholeSpace {};
  struct Product {
    std::vector<ConvexSet> factors;
  };

  std::variant<Singleton, AffineSubspace, SpiderSubtree, WholeSpace, Product> shape;

  static ConvexSet singleton(Point p) { return {Singleton{std::move(p)}}; }
  static ConvexSet whole_space() { return {WholeSpace{}}; }
  static ConvexSet spider_subtree(std::vector<double> caps) {
    for (double c : caps) {
      if (!(c >= 0.0)) throw StructuralError("spider subtree caps must be >= 0");
    }
    return {SpiderSubtree{std::move(caps)}};
  }
  static ConvexSet product(std::vector<ConvexSet> factors) {
    if (factors.empty()) throw StructuralError("product convex set needs at least one factor");
    return {Product{std::move(factors)}};
  }
  /// Checks orthonormality of the directions to 1e-10.
  static ConvexSet affine(std::vector<double> base, std::vector<std::vector<double>> directions) {
    for (std::size_t i = 0; i < directions.size(); ++i) {
      if (directions[i].size() != base.size()) {
        throw StructuralError("affine subspace direction has wrong length");
      }
      for (std::size_t j = 0; j <= i; ++j) {
        double dot = 0.0;
        for (std::size_t c = 0; c < base.size(); ++c) dot += directions[i][c] * directions[j][c];
        const double expected = i == j ? 1.0 : 0.0;
        if (std::abs(dot - expected) > 1e-10) {
          throw StructuralError("affine subspace directions must be orthonormal");
        }
      }
    }
    return {AffineSubspace{std::move(base), std::move(directions)}};
  }
};

namespace detail {

inline double minkowski(std::span<const double> a, std::span<const double> b) {
  double s = -a[0] * b[0];
  for (std::size_t i = 1; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Recomputes x_0 from the spatial part so the point sits on the upper sheet.
inline void hyperboloid_normalize(std::vector<double>& x) {
  double s = 1.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * x[i];
  x[0] = std::sqrt(s);
}

inline double hyperbolic_distance(std::span<const double> a, std::span<const double> b) {
  const double c = -minkowski(a, b);
  if (c > 2.0) return std::acosh(c);
  // <a-b,a-b>_M = 4 sinh^2(d/2); accurate for nearby points.
  double q = 0.0;
  q -= (a[0] - b[0]) * (a[0] - b[0]);
  for (std::size_t i = 1; i < a.size(); ++i) q += (a[i] - b[i]) * (a[i] - b[i]);
  return 2.0 * std::asinh(std::sqrt(std::max(q, 0.0)) / 2.0);
}

/// Point at parameter t on the geodesic a->b; any real t, result renormalized.
inline std::vector<double> hyperbolic_along(std::span<const double> a, std::span<const double> b,
                                            double t) {
  const double d = hyperbolic_distance(a, b);
  std::vector<double> out(a.begin(), a.end());
  if (d == 0.0) return out;
  const double sh = std::sinh(d / 2.0);
  const double cosh_m1 = 2.0 * sh * sh;  // cosh d - 1
  const double sht = std::sinh(t * d / 2.0);
  const double cosh_t_m1 = 2.0 * sht * sht;
  const double ratio = std::sinh(t * d) / std::sinh(d);
  for (std::size_t i = 0; i < a.size(); ++i) {
    // u = b - cosh(d) a is tangent at a with Minkowski norm sinh d.
    const double u = (b[i] - a[i]) - cosh_m1 * a[i];
    out[i] = a[i] + cosh_t_m1 * a[i] + ratio * u;
  }
  hyperboloid_normalize(out);
  return out;
}

/// Riemannian log map at z, scaled back to the tangent vector of length d(z,p).
inline std::vector<double> hyperbolic_log(std::span<const double> z, std::span<const double> p,
                                          double d) {
  std::vector<double> v(z.size(), 0.0);
  if (d == 0.0) return v;
  const double sh = std::sinh(d / 2.0);
  const double c_m1 = 2.0 * sh * sh;
  const double scale = d / std::sinh(d);
  for (std::size_t i = 0; i < z.size(); ++i) v[i] = scale * ((p[i] - z[i]) - c_m1 * z[i]);
  return v;
}

inline std::vector<double> hyperbolic_exp(std::span<const double> z, std::span<const double> v) {
  const double theta = std::sqrt(std::max(minkowski(v, v), 0.0));
  std::vector<double> out(z.begin(), z.end());
  if (theta == 0.0) return out;
  const double ch = std::cosh(theta);
  const double sc = std::sinh(theta) / theta;
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = ch * z[i] + sc * v[i];
  hyperboloid_normalize(out);
  return out;
}

inline double spider_distance(const SpiderCoord& a, const SpiderCoord& b) {
  if (a.leg == b.leg || a.radius == 0.0 || b.radius == 0.0) return std::abs(a.radius - b.radius);
  return a.radius + b.radius;
}

/// Walks distance s from a along the leg-hub-leg path toward b.
inline Point spider_walk(const SpiderCoord& a, const SpiderCoord& b, double s) {
  if (a.radius == 0.0 || b.radius == 0.0 || a.leg == b.leg) {
    const std::size_t leg = a.radius == 0.0 ? b.leg : a.leg;
    const double dir = b.radius >= a.radius ? 1.0 : -1.0;
    return spider_point(leg, std::max(0.0, a.radius + dir * s));
  }
  if (s <= a.radius) return spider_point(a.leg, a.radius - s);
  return spider_point(b.leg, s - a.radius);
}

}  // namespace detail

/// A concrete Hadamard space: Euclidean R^n, hyperbolic H^n (hyperboloid
/// model), a spider with k legs, or an l2-product of these.
class Space {
 public:
  using point_type = Point;

  explicit Space(SpaceDescriptor d) : desc_(std::move(d)) {
    switch (desc_.kind) {
      case SpaceKind::euclidean:
      case SpaceKind::hyperbolic:
        if (desc_.dim < 1) throw StructuralError("space dimension must be >= 1");
        break;
      case SpaceKind::spider:
        if (desc_.dim < 2) throw StructuralError("spider needs at least 2 legs");
        break;
      case SpaceKind::product:
        if (desc_.factors.empty()) throw StructuralError("product space needs at least one factor");
        desc_.dim = desc_.factors.size();
        for (const auto& f : desc_.factors) factors_.emplace_back(f);
        break;
    }
  }

  static Space euclidean(std::size_t n) { return Space(SpaceDescriptor::euclidean(n)); }
  static Space hyperbolic(std::size_t n) { return Space(SpaceDescriptor::hyperbolic(n)); }
  static Space spider(std::size_t k) { return Space(SpaceDescriptor::spider(k)); }
  static Space product(std::vector<SpaceDescriptor> f) {
    return Space(SpaceDescriptor::product(std::move(f)));
  }

  const SpaceDescriptor& descriptor() const noexcept { return desc_; }
  SpaceKind kind() const noexcept { return desc_.kind; }
  std::size_t dim() const noexcept { return desc_.dim; }
  const std::vector<Space>& factors() const noexcept { return factors_; }

  friend bool operator==(const Space& a, const Space& b) { return a.desc_ == b.desc_; }

  /// Throws StructuralError unless p is a valid point of this space.
  void check(const Point& p) const {
    switch (kind()) {
      case SpaceKind::euclidean:
        if (!p.holds_coords() || p.coords().size() != dim()) {
          throw StructuralError("point is not in R^" + std::to_string(dim()));
        }
        for (double v : p.coords()) {
          if (!std::isfinite(v)) throw StructuralError("non-finite coordinate");
        }
        return;
      case SpaceKind::hyperbolic: {
        if (!p.holds_coords() || p.coords().size() != dim() + 1) {
          throw StructuralError("point is not in H^" + std::to_string(dim()));
        }
        const auto& x = p.coords();
        for (double v : x) {
          if (!std::isfinite(v)) throw StructuralError("non-finite coordinate");
        }
        const double form = detail::minkowski(x, x);
        if (x[0] <= 0.0 || std::abs(form + 1.0) > 1e-9 * std::max(1.0, x[0] * x[0])) {
          throw StructuralError("point is off the upper hyperboloid sheet");
        }
        return;
      }
      case SpaceKind::spider: {
        if (!p.holds_spider()) throw StructuralError("point is not a spider point");
        const auto& s = p.spider();
        if (s.leg < 1 || s.leg > dim()) throw StructuralError("spider leg out of range");
        if (!(s.radius >= 0.0) || !std::isfinite(s.radius)) {
          throw StructuralError("spider radius must be finite and >= 0");
        }
        return;
      }
      case SpaceKind::product: {
        if (!p.holds_parts() || p.parts().size() != factors_.size()) {
          throw StructuralError("point does not match the product arity");
        }
        for (std::size_t i = 0; i < factors_.size(); ++i) factors_[i].check(p.parts()[i]);
        return;
      }
    }
  }

  bool contains(const Point& p) const noexcept {
    try {
      check(p);
      return true;
    } catch (const Error&) {
      return false;
    }
  }

  double distance(const Point& a, const Point& b) const {
    switch (kind()) {
      case SpaceKind::euclidean: {
        const auto& x = vec(a);
        const auto& y = vec(b);
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        return std::sqrt(s);
      }
      case SpaceKind::hyperbolic:
        return detail::hyperbolic_distance(vec(a), vec(b));
      case SpaceKind::spider:
        return detail::spider_distance(leg(a), leg(b));
      case SpaceKind::product: {
        double s = 0.0;
        const auto& pa = tuple(a);
        const auto& pb = tuple(b);
        for (std::size_t i = 0; i < factors_.size(); ++i) {
          const double d = factors_[i].distance(pa[i], pb[i]);
          s += d * d;
        }
        return std::sqrt(s);
      }
    }
    return 0.0;
  }

  /// The point γ_t on the geodesic from a to b, t in [0,1].
  Point geodesic(const Point& a, const Point& b, double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("geodesic parameter t must lie in [0,1]");
    if (t == 0.0 || t == 1.0) {
      check(a);
      check(b);
      return t == 0.0 ? a : b;
    }
    return along(a, b, t);
  }

  /// Continues the geodesic a->b to parameter s >= 1 where that is unique.
  /// Spider geodesics cannot be continued through the hub.
  std::optional<Point> extend(const Point& a, const Point& b, double s) const {
    if (!(s >= 1.0)) throw DomainError("extension parameter must be >= 1");
    switch (kind()) {
      case SpaceKind::euclidean:
      case SpaceKind::hyperbolic:
        return along(a, b, s);
      case SpaceKind::spider: {
        const auto& x = leg(a);
        const auto& y = leg(b);
        const double d = detail::spider_distance(x, y);
        if (d == 0.0) return a;
        const bool same_ray = x.radius == 0.0 || x.leg == y.leg;
        if (!same_ray || y.radius == 0.0) return std::nullopt;
        const double r = x.radius + s * (y.radius - x.radius);
        if (r < 0.0) return std::nullopt;
        return spider_point(y.leg, r);
      }
      case SpaceKind::product: {
        Point::Parts out;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
          auto p = factors_[i].extend(tuple(a)[i], tuple(b)[i], s);
          if (!p) return std::nullopt;
          out.push_back(std::move(*p));
        }
        return Point(std::move(out));
      }
    }
    return std::nullopt;
  }

  /// Unique minimizer of z -> sum_i w_i d(z, p_i)^2.
  ///
  /// Euclidean: weighted average. Spider: for each leg the clamped stationary
  /// radius, best leg wins, ties to the lowest leg. Product: per factor.
  /// Hyperbolic: Riemannian gradient iteration with step 1/H, H the weighted
  /// mean of d_i coth d_i (an upper bound on the Hessian), until successive
  /// iterates are within 1e-10.
  Point frechet_mean(std::span<const Point> points, std::span<const double> weights) const {
    if (points.empty() || points.size() != weights.size()) {
      throw StructuralError("frechet_mean needs equally many points and weights (non-empty)");
    }
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw StructuralError("weights must be finite and >= 0");
      total += w;
    }
    if (!(total > 0.0)) throw StructuralError("weights must have a positive sum");
    for (const auto& p : points) check(p);

    switch (kind()) {
      case SpaceKind::euclidean: {
        std::vector<double> m(dim(), 0.0);
        for (std::size_t i = 0; i < points.size(); ++i) {
          const auto& x = points[i].coords();
          for (std::size_t c = 0; c < m.size(); ++c) m[c] += weights[i] * x[c];
        }
        for (double& v : m) v /= total;
        return Point(std::move(m));
      }
      case SpaceKind::spider:
        return spider_mean(points, weights, total);
      case SpaceKind::hyperbolic:
        return hyperbolic_mean(points, weights, total);
      case SpaceKind::product: {
        Point::Parts out;
        std::vector<Point> column(points.size());
        for (std::size_t f = 0; f < factors_.size(); ++f) {
          for (std::size_t i = 0; i < points.size(); ++i) column[i] = points[i].parts()[f];
          out.push_back(factors_[f].frechet_mean(column, weights));
        }
        return Point(std::move(out));
      }
    }
    return points.front();
  }

  Point frechet_mean(const WeightedPointSet& s) const { return frechet_mean(s.points, s.weights); }

  /// sum_i w_i d(z, p_i)^2
  double frechet_objective(const Point& z, std::span<const Point> points,
                           std::span<const double> weights) const {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = distance(z, points[i]);
      s += weights[i] * d * d;
    }
    return s;
  }

  /// Nearest point of c to x.
  Point project(const ConvexSet& c, const Point& x) const {
    check(x);
    return std::visit([&](const auto& s) { return project_onto(s, x); }, c.shape);
  }

  /// A random point; coordinates (or radii) drawn from [-scale, scale].
  template <class Rng>
  Point sample(Rng& rng, double scale = 1.0) const {
    std::uniform_real_distribution<double> u(-scale, scale);
    switch (kind()) {
      case SpaceKind::euclidean: {
        std::vector<double> x(dim());
        for (double& v : x) v = u(rng);
        return Point(std::move(x));
      }
      case SpaceKind::hyperbolic: {
        std::vector<double> x(dim() + 1, 0.0);
        for (std::size_t i = 1; i < x.size(); ++i) x[i] = u(rng);
        detail::hyperboloid_normalize(x);
        return Point(std::move(x));
      }
      case SpaceKind::spider: {
        std::uniform_int_distribution<std::size_t> legs(1, dim());
        std::uniform_real_distribution<double> r(0.0, scale);
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        const std::size_t l = legs(rng);
        const double radius = r(rng);
        if (coin(rng) < 0.1) return spider_point(1, 0.0);
        return spider_point(l, radius);
      }
      case SpaceKind::product: {
        Point::Parts out;
        for (const auto& f : factors_) out.push_back(f.sample(rng, scale));
        return Point(std::move(out));
      }
    }
    return {};
  }

  /// The hub / origin / base point of the space.
  Point origin() const {
    switch (kind()) {
      case SpaceKind::euclidean:
        return Point(std::vector<double>(dim(), 0.0));
      case SpaceKind::hyperbolic: {
        std::vector<double> x(dim() + 1, 0.0);
        x[0] = 1.0;
        return Point(std::move(x));
      }
      case SpaceKind::spider:
        return spider_point(1, 0.0);
      case SpaceKind::product: {
        Point::Parts out;
        for (const auto& f : factors_) out.push_back(f.origin());
        return Point(std::move(out));
      }
    }
    return {};
  }

 private:
  const std::vector<double>& vec(const Point& p) const {
    check(p);
    return p.coords();
  }
  const SpiderCoord& leg(const Point& p) const {
    check(p);
    return p.spider();
  }
  const Point::Parts& tuple(const Point& p) const {
    if (!p.holds_parts() || p.parts().size() != factors_.size()) {
      throw StructuralError("point does not match the product arity");
    }
    return p.parts();
  }

  // Geodesic parameter t may exceed 1 here (used by extend).
  Point along(const Point& a, const Point& b, double t) const {
    switch (kind()) {
      case SpaceKind::euclidean: {
        const auto& x = vec(a);
        const auto& y = vec(b);
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + t * (y[i] - x[i]);
        return Point(std::move(out));
      }
      case SpaceKind::hyperbolic:
        return Point(detail::hyperbolic_along(vec(a), vec(b), t));
      case SpaceKind::spider: {
        const auto& x = leg(a);
        const auto& y = leg(b);
        return detail::spider_walk(x, y, t * detail::spider_distance(x, y));
      }
      case SpaceKind::product: {
        Point::Parts out;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
          const auto& fa = tuple(a)[i];
          const auto& fb = tuple(b)[i];
          out.push_back(t <= 1.0 ? factors_[i].geodesic(fa, fb, t) : *factors_[i].extend(fa, fb, t));
        }
        return Point(std::move(out));
      }
    }
    return a;
  }

  Point spider_mean(std::span<const Point> points, std::span<const double> weights,
                    double total) const {
    std::vector<double> per_leg(dim() + 1, 0.0);
    double all = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& s = points[i].spider();
      per_leg[s.leg] += weights[i] * s.radius;
      all += weights[i] * s.radius;
    }
    Point best = spider_point(1, 0.0);
    double best_value = frechet_objective(best, points, weights);
    for (std::size_t l = 1; l <= dim(); ++l) {
      const double r = std::max(0.0, (per_leg[l] - (all - per_leg[l])) / total);
      if (r == 0.0) continue;
      Point candidate = spider_point(l, r);
      const double value = frechet_objective(candidate, points, weights);
      if (value < best_value) {
        best_value = value;
        best = std::move(candidate);
      }
    }
    return best;
  }

  Point hyperbolic_mean(std::span<const Point> points, std::span<const double> weights,
                        double total) const {
    // Start from the normalized weighted average of the spatial parts.
    std::vector<double> z(dim() + 1, 0.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& x = points[i].coords();
      for (std::size_t c = 1; c < z.size(); ++c) z[c] += weights[i] * x[c] / total;
    }
    detail::hyperboloid_normalize(z);

    constexpr std::size_t max_iter = 10000;
    double step = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
      std::vector<double> grad(z.size(), 0.0);
      double hessian_bound = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (weights[i] == 0.0) continue;
        const auto& p = points[i].coords();
        const double d = detail::hyperbolic_distance(z, p);
        const auto v = detail::hyperbolic_log(z, p, d);
        for (std::size_t c = 0; c < z.size(); ++c) grad[c] += weights[i] * v[c] / total;
        hessian_bound += weights[i] * (d < 1e-8 ? 1.0 : d / std::tanh(d)) / total;
      }
      for (double& g : grad) g /= hessian_bound;
      auto next = detail::hyperbolic_exp(z, grad);
      step = detail::hyperbolic_distance(z, next);
      z = std::move(next);
      if (step <= 1e-10) return Point(std::move(z));
    }
    throw ConvergenceFailure<Point>("hyperbolic frechet_mean did not converge", max_iter, step,
                                    Point(std::move(z)));
  }

  Point project_onto(const ConvexSet::Singleton& s, const Point&) const {
    check(s.point);
    return s.point;
  }
  Point project_onto(const ConvexSet::WholeSpace&, const Point& x) const { return x; }
  Point project_onto(const ConvexSet::AffineSubspace& s, const Point& x) const {
    if (kind() != SpaceKind::euclidean || s.base.size() != dim()) {
      throw StructuralError("affine subspace projection needs a matching euclidean space");
    }
    const auto& v = x.coords();
    std::vector<double> out = s.base;
    for (const auto& dir : s.directions) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dim(); ++i) dot += (v[i] - s.base[i]) * dir[i];
      for (std::size_t i = 0; i < dim(); ++i) out[i] += dot * dir[i];
    }
    return Point(std::move(out));
  }
  Point project_onto(const ConvexSet::SpiderSubtree& s, const Point& x) const {
    if (kind() != SpaceKind::spider || s.caps.size() != dim()) {
      throw StructuralError("spider subtree projection needs a spider with matching legs");
    }
    const auto& c = x.spider();
    return spider_point(c.leg, std::min(c.radius, s.caps[c.leg - 1]));
  }
  Point project_onto(const ConvexSet::Product& s, const Point& x) const {
    if (kind() != SpaceKind::product || s.factors.size() != factors_.size()) {
      throw StructuralError("product convex set needs a product space of the same arity");
    }
    Point::Parts out;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      out.push_back(factors_[i].project(s.factors[i], x.parts()[i]));
    }
    return Point(std::move(out));
  }

  SpaceDescriptor desc_;
  std::vector<Space> factors_;
};

}  // namespace hadamard
