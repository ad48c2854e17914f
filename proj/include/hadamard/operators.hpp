#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hadamard/errors.hpp"
#include "hadamard/geometry.hpp"
#include "hadamard/space.hpp"

namespace hadamard {

/// Backend-specific isometries.
struct Isometry {
  /// x -> Q x + shift with Q orthogonal.
  struct Euclidean {
    Eigen::MatrixXd orthogonal;
    Eigen::VectorXd shift;
  };
  /// Hyperboloid coordinates x -> L x with L preserving the Minkowski form
  /// and the upper sheet.
  struct Lorentz {
    Eigen::MatrixXd matrix;
  };
  /// Spider leg relabelling: leg l goes to image[l-1].
  struct LegPermutation {
    std::vector<std::size_t> image;
  };

  std::variant<Euclidean, Lorentz, LegPermutation> kind;
};

/// Hyperbolic boost of rapidity `rapidity` along spatial axis `axis` (1-based).
inline Isometry lorentz_boost(std::size_t n, std::size_t axis, double rapidity) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n + 1, n + 1);
  l(0, 0) = std::cosh(rapidity);
  l(axis, axis) = std::cosh(rapidity);
  l(0, axis) = std::sinh(rapidity);
  l(axis, 0) = std::sinh(rapidity);
  return {Isometry::Lorentz{std::move(l)}};
}

/// Planar rotation of R^2 by `angle`.
inline Eigen::MatrixXd rotation_matrix(double angle) {
  Eigen::MatrixXd a(2, 2);
  a << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return a;
}

struct MapNode;

/// A 1-Lipschitz self-map of a Space, built from exactly nonexpansive pieces
/// (projections, contractions, isometries) and the operations that preserve
/// nonexpansiveness in a Hadamard space (weighted Fréchet averaging of
/// images, composition, products). `custom` wraps an arbitrary function and
/// checks it on random pairs before accepting it.
class NonexpansiveMap {
 public:
  static NonexpansiveMap projection(Space space, ConvexSet set);
  /// R^n -> R^n, x -> A x; needs the largest singular value <= 1 + 1e-12.
  static NonexpansiveMap linear(Space space, Eigen::MatrixXd a);
  static NonexpansiveMap isometry(Space space, Isometry iso);
  /// x -> Fréchet mean of (f_i x) with the given weights.
  static NonexpansiveMap geodesic_average(std::vector<NonexpansiveMap> maps, std::vector<double> weights);
  /// composition({f, g, h})(x) = f(g(h(x))).
  static NonexpansiveMap composition(std::vector<NonexpansiveMap> maps);
  /// (x_1, ..., x_k) -> (f_1 x_1, ..., f_k x_k) on a product space.
  static NonexpansiveMap componentwise(Space space, std::vector<NonexpansiveMap> maps);
  /// Accepts `fn` after checking d(fn x, fn y) <= d(x,y)(1 + 1e-9) on
  /// `samples` random pairs; throws StructuralError otherwise.
  static NonexpansiveMap custom(Space space, std::function<Point(const Point&)> fn,
                                std::uint64_t seed = 1, std::size_t samples = 1000, double scale = 5.0);

  Point operator()(const Point& x) const;

  const Space& space() const noexcept { return space_; }

  /// Known fixed point set, when one was attached or follows from construction.
  const std::optional<ConvexSet>& fixed_set() const noexcept { return fixed_; }
  NonexpansiveMap with_fixed_set(ConvexSet c) const {
    NonexpansiveMap m = *this;
    m.fixed_ = std::move(c);
    return m;
  }

 private:
  NonexpansiveMap(Space space, std::shared_ptr<const MapNode> node)
      : space_(std::move(space)), node_(std::move(node)) {}

  Space space_;
  std::shared_ptr<const MapNode> node_;
  std::optional<ConvexSet> fixed_;
};

struct MapNode {
  struct Projection {
    ConvexSet set;
  };
  struct Linear {
    Eigen::MatrixXd a;
  };
  struct Iso {
    Isometry iso;
  };
  struct Average {
    std::vector<NonexpansiveMap> maps;
    std::vector<double> weights;
  };
  struct Composition {
    std::vector<NonexpansiveMap> maps;
  };
  struct Componentwise {
    std::vector<NonexpansiveMap> maps;
  };
  struct Custom {
    std::function<Point(const Point&)> fn;
  };

  std::variant<Projection, Linear, Iso, Average, Composition, Componentwise, Custom> v;
};

struct LipschitzReport {
  double max_ratio = 0.0;  // max d(Fx,Fy)/d(x,y) over the sampled pairs
  std::size_t pairs = 0;
};

/// Samples random pairs and records the largest distance ratio.
template <class F>
LipschitzReport sample_lipschitz(const Space& space, const F& f, std::mt19937_64& rng,
                                 std::size_t samples, double scale) {
  LipschitzReport rep;
  for (std::size_t i = 0; i < samples; ++i) {
    const Point x = space.sample(rng, scale);
    const Point y = space.sample(rng, scale);
    const double d = space.distance(x, y);
    if (d < 1e-12) continue;
    rep.max_ratio = std::max(rep.max_ratio, space.distance(f(x), f(y)) / d);
    ++rep.pairs;
  }
  return rep;
}

inline NonexpansiveMap NonexpansiveMap::projection(Space space, ConvexSet set) {
  // Surface shape mismatches now rather than at first evaluation.
  space.project(set, space.origin());
  NonexpansiveMap m(space, std::make_shared<const MapNode>(MapNode{MapNode::Projection{set}}));
  m.fixed_ = std::move(set);
  return m;
}

inline NonexpansiveMap NonexpansiveMap::linear(Space space, Eigen::MatrixXd a) {
  if (space.kind() != SpaceKind::euclidean) throw StructuralError("linear maps need a euclidean space");
  if (a.rows() != static_cast<Eigen::Index>(space.dim()) || a.cols() != a.rows()) {
    throw StructuralError("linear map matrix must be n x n for R^n");
  }
  const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
  if (sigma > 1.0 + 1e-12) {
    throw StructuralError("linear map has operator norm " + std::to_string(sigma) + " > 1");
  }
  return {std::move(space), std::make_shared<const MapNode>(MapNode{MapNode::Linear{std::move(a)}})};
}

inline NonexpansiveMap NonexpansiveMap::isometry(Space space, Isometry iso) {
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        const auto n = static_cast<Eigen::Index>(space.dim());
        if constexpr (std::is_same_v<K, Isometry::Euclidean>) {
          if (space.kind() != SpaceKind::euclidean || k.orthogonal.rows() != n ||
              k.orthogonal.cols() != n || k.shift.size() != n) {
            throw StructuralError("euclidean isometry does not match the space");
          }
          if (!(k.orthogonal.transpose() * k.orthogonal).isApprox(Eigen::MatrixXd::Identity(n, n), 1e-10)) {
            throw StructuralError("euclidean isometry matrix is not orthogonal");
          }
        } else if constexpr (std::is_same_v<K, Isometry::Lorentz>) {
          if (space.kind() != SpaceKind::hyperbolic || k.matrix.rows() != n + 1 || k.matrix.cols() != n + 1) {
            throw StructuralError("Lorentz transform does not match the space");
          }
          Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n + 1, n + 1);
          j(0, 0) = -1.0;
          const Eigen::MatrixXd err = k.matrix.transpose() * j * k.matrix - j;
          if (err.cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, k.matrix.cwiseAbs2().maxCoeff()) ||
              k.matrix(0, 0) < 1.0 - 1e-12) {
            throw StructuralError("matrix is not an orthochronous Lorentz transform");
          }
        } else {
          if (space.kind() != SpaceKind::spider || k.image.size() != space.dim()) {
            throw StructuralError("leg permutation does not match the spider");
          }
          std::vector<bool> seen(space.dim() + 1, false);
          for (std::size_t l : k.image) {
            if (l < 1 || l > space.dim() || seen[l]) throw StructuralError("leg map is not a permutation");
            seen[l] = true;
          }
        }
      },
      iso.kind);
  return {std::move(space), std::make_shared<const MapNode>(MapNode{MapNode::Iso{std::move(iso)}})};
}

inline NonexpansiveMap NonexpansiveMap::geodesic_average(std::vector<NonexpansiveMap> maps,
                                                         std::vector<double> weights) {
  if (maps.empty() || maps.size() != weights.size()) {
    throw StructuralError("geodesic average needs equally many maps and weights");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw StructuralError("geodesic average weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw StructuralError("geodesic average weights must have positive sum");
  for (const auto& m : maps) {
    if (!(m.space() == maps.front().space())) throw StructuralError("averaged maps live on different spaces");
  }
  Space s = maps.front().space();
  return {std::move(s),
          std::make_shared<const MapNode>(MapNode{MapNode::Average{std::move(maps), std::move(weights)}})};
}

inline NonexpansiveMap NonexpansiveMap::composition(std::vector<NonexpansiveMap> maps) {
  if (maps.empty()) throw StructuralError("composition needs at least one map");
  for (const auto& m : maps) {
    if (!(m.space() == maps.front().space())) throw StructuralError("composed maps live on different spaces");
  }
  Space s = maps.front().space();
  return {std::move(s), std::make_shared<const MapNode>(MapNode{MapNode::Composition{std::move(maps)}})};
}

inline NonexpansiveMap NonexpansiveMap::componentwise(Space space, std::vector<NonexpansiveMap> maps) {
  if (space.kind() != SpaceKind::product || maps.size() != space.factors().size()) {
    throw StructuralError("componentwise map needs one map per product factor");
  }
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (!(maps[i].space() == space.factors()[i])) {
      throw StructuralError("componentwise map factor " + std::to_string(i) + " has the wrong space");
    }
  }
  return {std::move(space), std::make_shared<const MapNode>(MapNode{MapNode::Componentwise{std::move(maps)}})};
}

inline NonexpansiveMap NonexpansiveMap::custom(Space space, std::function<Point(const Point&)> fn,
                                               std::uint64_t seed, std::size_t samples, double scale) {
  std::mt19937_64 rng(seed);
  const auto rep = sample_lipschitz(space, fn, rng, samples, scale);
  if (rep.max_ratio > 1.0 + 1e-9) {
    throw StructuralError("map is not nonexpansive: sampled Lipschitz ratio " + std::to_string(rep.max_ratio));
  }
  return {std::move(space), std::make_shared<const MapNode>(MapNode{MapNode::Custom{std::move(fn)}})};
}

inline Point NonexpansiveMap::operator()(const Point& x) const {
  space_.check(x);
  return std::visit(
      [&](const auto& n) -> Point {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, MapNode::Projection>) {
          return space_.project(n.set, x);
        } else if constexpr (std::is_same_v<N, MapNode::Linear>) {
          const auto& c = x.coords();
          const Eigen::VectorXd y = n.a * Eigen::Map<const Eigen::VectorXd>(c.data(), c.size());
          return Point(std::vector<double>(y.data(), y.data() + y.size()));
        } else if constexpr (std::is_same_v<N, MapNode::Iso>) {
          return std::visit(
              [&](const auto& k) -> Point {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Isometry::LegPermutation>) {
                  const auto& s = x.spider();
                  return spider_point(k.image[s.leg - 1], s.radius);
                } else {
                  const auto& c = x.coords();
                  const Eigen::Map<const Eigen::VectorXd> v(c.data(), c.size());
                  if constexpr (std::is_same_v<K, Isometry::Euclidean>) {
                    const Eigen::VectorXd y = k.orthogonal * v + k.shift;
                    return Point(std::vector<double>(y.data(), y.data() + y.size()));
                  } else {
                    const Eigen::VectorXd y = k.matrix * v;
                    std::vector<double> out(y.data(), y.data() + y.size());
                    detail::hyperboloid_normalize(out);
                    return Point(std::move(out));
                  }
                }
              },
              n.iso.kind);
        } else if constexpr (std::is_same_v<N, MapNode::Average>) {
          std::vector<Point> images;
          images.reserve(n.maps.size());
          for (const auto& m : n.maps) images.push_back(m(x));
          return space_.frechet_mean(images, n.weights);
        } else if constexpr (std::is_same_v<N, MapNode::Composition>) {
          Point y = x;
          for (auto it = n.maps.rbegin(); it != n.maps.rend(); ++it) y = (*it)(y);
          return y;
        } else if constexpr (std::is_same_v<N, MapNode::Componentwise>) {
          Point::Parts out;
          for (std::size_t i = 0; i < n.maps.size(); ++i) out.push_back(n.maps[i](x.parts()[i]));
          return Point(std::move(out));
        } else {
          Point y = n.fn(x);
          space_.check(y);
          return y;
        }
      },
      node_->v);
}

// ---------------------------------------------------------------------------
// Resolvent R_λ x: the fixed point of G(y) = x ⊕_{λ/(1+λ)} F y.

template <class P>
struct ResolventResult {
  P point;
  std::size_t iterations = 0;
  double residual = 0.0;  // d(z, G z) at the accepted iterate z
  bool roundoff_limited = false;
};

/// Computes R_λ x by iterating the contraction G_{x,λ}, which has Lipschitz
/// constant q = λ/(1+λ). For λ > 1 each step also tries the geodesic
/// midpoint between y and G y and keeps whichever candidate has the smaller
/// residual d(z, G z); plain G y is always a candidate, so the residual still
/// shrinks by at least q per step.
///
/// Stops once max(1,λ)·d(z, G z) <= tol and returns G z, whose distance to
/// R_λ x is at most λ·d(z, G z). R_0 is the identity. If the residual stops
/// decreasing for 16 steps the result is flagged `roundoff_limited`.
template <Geometry G, class F>
  requires SelfMap<F, G>
ResolventResult<typename G::point_type> resolvent(const G& geom, const F& f, double lambda,
                                                  const typename G::point_type& x, double tol,
                                                  const typename G::point_type* warm_start = nullptr,
                                                  std::size_t max_iter = 1'000'000) {
  using P = typename G::point_type;
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("resolvent needs a finite λ >= 0");
  if (!(tol > 0.0)) throw DomainError("resolvent needs tol > 0");
  if (lambda == 0.0) return {x, 0, 0.0, false};

  const double q = lambda / (1.0 + lambda);
  const double scale = std::max(1.0, lambda);
  auto contraction = [&](const P& y) { return geom.geodesic(x, f(y), q); };

  P y = warm_start ? *warm_start : x;
  P gy = contraction(y);
  double r = geom.distance(y, gy);
  std::size_t stall = 0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    if (scale * r <= tol) return {std::move(gy), it, r, false};
    P z = gy;
    P gz = contraction(z);
    double rz = geom.distance(z, gz);
    if (lambda > 1.0) {
      P m = geom.geodesic(y, gy, 0.5);
      P gm = contraction(m);
      const double rm = geom.distance(m, gm);
      if (rm < rz) {
        z = std::move(m);
        gz = std::move(gm);
        rz = rm;
      }
    }
    stall = rz < r ? 0 : stall + 1;
    y = std::move(z);
    gy = std::move(gz);
    r = rz;
    if (stall >= 16) return {std::move(gy), it, r, true};
  }
  throw ConvergenceFailure<P>("resolvent iteration cap exceeded", max_iter, r, std::move(gy));
}

template <class P>
struct CurveSample {
  double lambda = 0.0;
  P point;
  double displacement = 0.0;  // d(x, R_λ x)
  double residual = 0.0;      // d(R_λ x, F R_λ x)
  std::size_t iterations = 0;
};

template <class P>
struct ResolventCurve {
  std::vector<CurveSample<P>> samples;
  /// λ -> d(x, R_λ x) nondecreasing, up to 2·tol.
  bool displacement_monotone = true;
};

/// R_λ x along a strictly increasing λ grid, each solve warm-started from
/// the previous curve point.
template <Geometry G, class F>
  requires SelfMap<F, G>
ResolventCurve<typename G::point_type> resolvent_curve(const G& geom, const F& f,
                                                       const typename G::point_type& x,
                                                       std::span<const double> lambdas, double tol) {
  using P = typename G::point_type;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw DomainError("resolvent curve needs positive λ values");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw DomainError("λ grid must be strictly increasing");
  }
  ResolventCurve<P> curve;
  curve.samples.reserve(lambdas.size());
  const P* warm = nullptr;
  for (double lambda : lambdas) {
    auto res = resolvent(geom, f, lambda, x, tol, warm);
    CurveSample<P> s;
    s.lambda = lambda;
    s.displacement = geom.distance(x, res.point);
    s.residual = geom.distance(res.point, f(res.point));
    s.iterations = res.iterations;
    s.point = std::move(res.point);
    if (!curve.samples.empty() && s.displacement < curve.samples.back().displacement - 2.0 * tol) {
      curve.displacement_monotone = false;
    }
    curve.samples.push_back(std::move(s));
    warm = &curve.samples.back().point;
  }
  return curve;
}

}  // namespace hadamard
