#pragma once

#include <concepts>
#include <optional>
#include <type_traits>

#include "hadamard/errors.hpp"

namespace hadamard {

/// A geodesic metric space: a distance and the unique constant-speed geodesic
/// between two points, parametrized on [0,1].
template <class G>
concept Geometry = requires(const G& g, const typename G::point_type& a, double t) {
  typename G::point_type;
  { g.distance(a, a) } -> std::convertible_to<double>;
  { g.geodesic(a, a, t) } -> std::same_as<typename G::point_type>;
};

/// Geometries that can continue a geodesic past its endpoint when the
/// continuation is unique. `extend(a, b, s)` with s >= 1 returns the point at
/// parameter s, or nullopt where no unique continuation exists.
template <class G>
concept ExtendableGeometry =
    Geometry<G> && requires(const G& g, const typename G::point_type& a, double s) {
      { g.extend(a, a, s) } -> std::same_as<std::optional<typename G::point_type>>;
    };

/// A map from a geometry to itself.
template <class F, class G>
concept SelfMap = Geometry<G> && std::regular_invocable<const F&, const typename G::point_type&> &&
                  std::convertible_to<std::invoke_result_t<const F&, const typename G::point_type&>,
                                      typename G::point_type>;

struct Cat0Check {
  bool pass = false;
  double slack = 0.0;  // RHS - LHS of the comparison inequality
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Evaluates d(x,γ_t)² <= (1-t)d(x,γ_0)² + t d(x,γ_1)² - t(1-t)d(γ_0,γ_1)²
/// with γ the geodesic from g0 to g1. Passes when LHS <= RHS + 1e-9.
template <Geometry G>
Cat0Check check_cat0(const G& geom, const typename G::point_type& x, const typename G::point_type& g0,
                     const typename G::point_type& g1, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("check_cat0: t must lie in [0,1]");
  const auto gt = geom.geodesic(g0, g1, t);
  const double d_xt = geom.distance(x, gt);
  const double d_x0 = geom.distance(x, g0);
  const double d_x1 = geom.distance(x, g1);
  const double d_01 = geom.distance(g0, g1);
  Cat0Check out;
  out.lhs = d_xt * d_xt;
  out.rhs = (1.0 - t) * d_x0 * d_x0 + t * d_x1 * d_x1 - t * (1.0 - t) * d_01 * d_01;
  out.slack = out.rhs - out.lhs;
  out.pass = out.lhs <= out.rhs + 1e-9;
  return out;
}

}  // namespace hadamard
