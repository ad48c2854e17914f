#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hadamard/hadamard.hpp"

namespace fixtures {

using hadamard::ConvexSet;
using hadamard::NonexpansiveMap;
using hadamard::Point;
using hadamard::Space;

inline Point vec(std::vector<double> v) { return Point(std::move(v)); }

/// Point of the hyperboloid with the given spatial coordinates.
inline Point hyp(std::vector<double> spatial) {
  double s = 1.0;
  for (double v : spatial) s += v * v;
  spatial.insert(spatial.begin(), std::sqrt(s));
  return Point(std::move(spatial));
}

inline Eigen::VectorXd to_eigen(const Point& p) {
  return Eigen::Map<const Eigen::VectorXd>(p.coords().data(), static_cast<Eigen::Index>(p.coords().size()));
}

inline Point from_eigen(const Eigen::VectorXd& v) { return Point(std::vector<double>(v.data(), v.data() + v.size())); }

inline Eigen::MatrixXd random_orthogonal(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

/// Orthonormal basis (columns) of a random k-dimensional subspace of R^n.
inline Eigen::MatrixXd random_frame(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  return random_orthogonal(n, rng).leftCols(static_cast<Eigen::Index>(k));
}

/// A random matrix of operator norm <= 1: an orthogonal matrix, an
/// orthogonal projection, or a convex combination of those.
inline Eigen::MatrixXd random_nonexpansive_matrix(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<std::size_t> rank(0, n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto projection = [&] {
    const Eigen::MatrixXd u_k = random_frame(n, rank(rng), rng);
    return Eigen::MatrixXd(u_k * u_k.transpose());
  };
  switch (kind(rng)) {
    case 0:
      return random_orthogonal(n, rng);
    case 1:
      return projection();
    default: {
      const double w = u(rng);
      return w * random_orthogonal(n, rng) + (1.0 - w) * projection();
    }
  }
}

/// Random nonexpansive maps built from each backend's primitives.
inline NonexpansiveMap random_map(const Space& space, std::mt19937_64& rng, int depth = 0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, depth < 1 ? 3 : 1);
  const int choice = pick(rng);
  if (choice == 2) {
    const double w = u(rng);
    return NonexpansiveMap::geodesic_average({random_map(space, rng, depth + 1), random_map(space, rng, depth + 1)},
                                             {w, 1.0 - w});
  }
  if (choice == 3) {
    return NonexpansiveMap::composition({random_map(space, rng, depth + 1), random_map(space, rng, depth + 1)});
  }
  switch (space.kind()) {
    case hadamard::SpaceKind::euclidean: {
      const std::size_t n = space.dim();
      if (choice == 0) return NonexpansiveMap::linear(space, random_nonexpansive_matrix(n, rng));
      std::uniform_int_distribution<std::size_t> rank(0, n - 1);
      const Eigen::MatrixXd frame = random_frame(n, rank(rng), rng);
      std::vector<std::vector<double>> dirs;
      for (Eigen::Index j = 0; j < frame.cols(); ++j) {
        dirs.emplace_back(frame.col(j).data(), frame.col(j).data() + n);
      }
      return NonexpansiveMap::projection(space, ConvexSet::affine(space.sample(rng, 3.0).coords(), dirs));
    }
    case hadamard::SpaceKind::hyperbolic: {
      if (choice == 0) {
        std::uniform_int_distribution<std::size_t> axis(1, space.dim());
        return NonexpansiveMap::isometry(space, hadamard::lorentz_boost(space.dim(), axis(rng), 2.0 * u(rng) - 1.0));
      }
      return NonexpansiveMap::projection(space, ConvexSet::singleton(space.sample(rng, 2.0)));
    }
    case hadamard::SpaceKind::spider: {
      const std::size_t k = space.dim();
      if (choice == 0) {
        std::vector<std::size_t> image(k);
        for (std::size_t i = 0; i < k; ++i) image[i] = i + 1;
        std::shuffle(image.begin(), image.end(), rng);
        return NonexpansiveMap::isometry(space, {hadamard::Isometry::LegPermutation{image}});
      }
      std::vector<double> caps(k);
      for (double& c : caps) c = u(rng) < 0.3 ? 0.0 : 3.0 * u(rng);
      return NonexpansiveMap::projection(space, ConvexSet::spider_subtree(caps));
    }
    case hadamard::SpaceKind::product: {
      std::vector<NonexpansiveMap> parts;
      for (const auto& f : space.factors()) parts.push_back(random_map(f, rng, depth + 1));
      return NonexpansiveMap::componentwise(space, std::move(parts));
    }
  }
  return NonexpansiveMap::projection(space, ConvexSet::whole_space());
}

/// One space of each backend.
inline std::vector<Space> backends() {
  return {Space::euclidean(3), Space::hyperbolic(2), Space::spider(3),
          Space::product({hadamard::SpaceDescriptor::euclidean(2), hadamard::SpaceDescriptor::spider(3)})};
}

inline std::string backend_name(const Space& s) { return hadamard::format_descriptor(s.descriptor()); }

/// A map with nonempty fixed point set, a starting point, a certified fixed
/// point, and the projection of x0 onto Fix F when it is known.
struct FixtureMap {
  std::string name;
  Space space;
  NonexpansiveMap map;
  Point x0;
  Point fixed;
  std::optional<Point> projection;
};

inline NonexpansiveMap rot90() {
  return NonexpansiveMap::linear(Space::euclidean(2), hadamard::rotation_matrix(std::numbers::pi / 2));
}

inline NonexpansiveMap line_projection() {
  return NonexpansiveMap::projection(Space::euclidean(2), ConvexSet::affine({0.0, 0.0}, {{1.0, 0.0}}));
}

/// Geodesic average of the projections onto legs 1 and 2; Fix F = {hub}.
inline NonexpansiveMap spider_leg_average() {
  const Space s = Space::spider(3);
  return NonexpansiveMap::geodesic_average(
      {NonexpansiveMap::projection(s, ConvexSet::spider_subtree({1e9, 0.0, 0.0})),
       NonexpansiveMap::projection(s, ConvexSet::spider_subtree({0.0, 1e9, 0.0}))},
      {0.5, 0.5});
}

inline std::vector<FixtureMap> fixture_maps() {
  using hadamard::spider_point;
  std::vector<FixtureMap> out;
  const Space e2 = Space::euclidean(2);
  const Space e3 = Space::euclidean(3);
  const Space h2 = Space::hyperbolic(2);
  const Space s3 = Space::spider(3);
  const Space s4 = Space::spider(4);
  const Space prod = Space::product({hadamard::SpaceDescriptor::euclidean(2), hadamard::SpaceDescriptor::spider(3)});

  out.push_back({"rot90", e2, rot90(), vec({1, 0}), vec({0, 0}), vec({0, 0})});
  out.push_back({"line projection", e2, line_projection(), vec({0, 1}), vec({0, 0}), vec({0, 0})});
  out.push_back({"rot90 and line average", e2,
                 NonexpansiveMap::geodesic_average({rot90(), line_projection()}, {0.5, 0.5}), vec({2, -1}),
                 vec({0, 0}), vec({0, 0})});
  {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
    a.topLeftCorner(2, 2) = hadamard::rotation_matrix(1.0);
    out.push_back({"axis rotation", e3, NonexpansiveMap::linear(e3, a), vec({1, 2, 3}), vec({0, 0, 3}),
                   vec({0, 0, 3})});
  }
  out.push_back({"plane projection", e3,
                 NonexpansiveMap::projection(e3, ConvexSet::affine({0, 0, 1}, {{1, 0, 0}, {0, 1, 0}})),
                 vec({1, -2, 4}), vec({1, -2, 1}), vec({1, -2, 1})});
  out.push_back({"spider leg average", s3, spider_leg_average(), spider_point(1, 2.0), spider_point(1, 0.0),
                 spider_point(1, 0.0)});
  out.push_back({"spider leg swap", s4,
                 NonexpansiveMap::isometry(s4, {hadamard::Isometry::LegPermutation{{2, 1, 3, 4}}}),
                 spider_point(1, 1.5), spider_point(3, 0.7), spider_point(1, 0.0)});
  out.push_back({"spider subtree projection", s3,
                 NonexpansiveMap::projection(s3, ConvexSet::spider_subtree({1.0, 0.0, 2.0})), spider_point(2, 1.5),
                 spider_point(1, 0.0), spider_point(1, 0.0)});
  {
    const Point p = hyp({0.5, -0.25});
    out.push_back({"hyperbolic point projection", h2, NonexpansiveMap::projection(h2, ConvexSet::singleton(p)),
                   hyp({-1, 1.5}), p, p});
  }
  {
    const auto f = NonexpansiveMap::geodesic_average(
        {NonexpansiveMap::isometry(h2, hadamard::lorentz_boost(2, 1, 0.7)),
         NonexpansiveMap::projection(h2, ConvexSet::singleton(h2.origin()))},
        {0.5, 0.5});
    // f is a 1/2-contraction, so Picard iteration certifies its fixed point.
    Point z = h2.origin();
    for (int i = 0; i < 200; ++i) z = f(z);
    out.push_back({"hyperbolic boost average", h2, f, hyp({1, 1}), z,
                   std::nullopt});
  }
  {
    const auto f = NonexpansiveMap::componentwise(prod, {rot90(), spider_leg_average()});
    const Point fixed(Point::Parts{vec({0, 0}), spider_point(1, 0.0)});
    out.push_back({"product", prod, f, Point(Point::Parts{vec({1, 1}), spider_point(2, 1.0)}), fixed, fixed});
  }
  return out;
}

/// Euclidean path 0-1-2-3 with the walk held at the ends, uniform weights,
/// D = {1,2}, h(0) = 0, h(3) = 3.
inline Eigen::MatrixXd path_kernel() {
  Eigen::MatrixXd p(4, 4);
  p << 0.5, 0.5, 0, 0, 0.5, 0, 0.5, 0, 0, 0.5, 0, 0.5, 0, 0, 0.5, 0.5;
  return p;
}

inline hadamard::DirichletSpec path_spec(std::vector<double> interior_start = {0.0, 0.0}) {
  hadamard::MarkovKernel k(path_kernel(), {1, 1, 1, 1});
  hadamard::MapField h{{vec({0}), vec({interior_start[0]}), vec({interior_start[1]}), vec({3})}};
  return hadamard::DirichletSpec(std::move(k), Space::euclidean(1), {1, 2}, std::move(h));
}

/// Star with centre 0 and leaves 1..4; leaves 1..3 pinned to (leg i, 1) on
/// a three-legged spider; centre and leaf 4 free.
inline hadamard::DirichletSpec star_spec() {
  using hadamard::spider_point;
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(5, 5);
  for (int j = 1; j < 5; ++j) {
    p(0, j) = 0.25;
    p(j, 0) = 1.0;
  }
  hadamard::MarkovKernel k(p, {4, 1, 1, 1, 1});
  hadamard::MapField h{{spider_point(1, 0.5), spider_point(1, 1), spider_point(2, 1), spider_point(3, 1),
                        spider_point(2, 0.75)}};
  return hadamard::DirichletSpec(std::move(k), Space::spider(3), {0, 4}, std::move(h));
}

/// A random μ-symmetric kernel on m states built from a random symmetric
/// weight matrix W: μ_i = Σ_j W_ij, p_ij = W_ij / μ_i.
inline hadamard::MarkovKernel random_kernel(std::size_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const double v = u(rng) < 0.4 ? 0.0 : u(rng);
      w(i, j) = w(j, i) = v;
    }
    w(i, (i + 1) % m) = w((i + 1) % m, i) = 0.5 + u(rng);
  }
  return hadamard::MarkovKernel::symmetrize(w, std::vector<double>(m, 1.0));
}

inline hadamard::MapField random_field(const Space& target, std::size_t m, std::mt19937_64& rng, double scale = 3.0) {
  hadamard::MapField f;
  for (std::size_t i = 0; i < m; ++i) f.values.push_back(target.sample(rng, scale));
  return f;
}

}  // namespace fixtures
