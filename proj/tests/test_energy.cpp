#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hadamard/hadamard.hpp"
#include "oracles.hpp"

using namespace hadamard;
using fixtures::vec;

namespace {

EuclideanQuadratic half_norm(std::size_t n) {
  return EuclideanQuadratic(Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n));
}

/// ½ (y - c)ᵀ Q (y - c) with Min = the line {(s, 1)}.
EuclideanQuadratic line_well() {
  Eigen::MatrixXd q(2, 2);
  q << 0, 0, 0, 3;
  return EuclideanQuadratic(q, Eigen::Vector2d(0, 1));
}

template <class Phi, class P>
double prox_objective(const Phi& phi, double lambda, const P& x, const P& y) {
  const double d = phi.geometry().distance(x, y);
  return phi.value(y) + d * d / (2.0 * lambda);
}

Eigen::VectorXd interior_values(const MapField& f, const std::vector<std::size_t>& interior) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(interior.size()));
  for (std::size_t a = 0; a < interior.size(); ++a) v(static_cast<Eigen::Index>(a)) = f[interior[a]].coords()[0];
  return v;
}

}  // namespace

TEST(Quadratic, Validation) {
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 1, 0, 1;
  EXPECT_THROW(EuclideanQuadratic(asym, Eigen::Vector2d::Zero()), StructuralError);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1, 0, 0, -1;
  EXPECT_THROW(EuclideanQuadratic(indefinite, Eigen::Vector2d::Zero()), StructuralError);
  EXPECT_THROW(EuclideanQuadratic(Eigen::Matrix2d::Identity(), Eigen::Vector3d::Zero()), StructuralError);
}

TEST(Quadratic, ProxExamples) {
  const auto phi = half_norm(2);
  const Point p = phi.prox(1.0, vec({2, 0}));
  EXPECT_NEAR(p.coords()[0], 1.0, 1e-15);
  EXPECT_NEAR(p.coords()[1], 0.0, 1e-15);
  EXPECT_EQ(phi.prox(0.0, vec({2, 0})), vec({2, 0}));
  EXPECT_THROW(phi.prox(-1.0, vec({2, 0})), DomainError);
  EXPECT_EQ(phi.min_projection(vec({2, 5})), vec({0, 0}));
  const Point l = line_well().min_projection(vec({4, -2}));
  EXPECT_NEAR(l.coords()[0], 4.0, 1e-14);
  EXPECT_NEAR(l.coords()[1], 1.0, 1e-14);
}

TEST(Quadratic, ProxCertificate) {
  std::mt19937_64 rng(73);
  const auto phi = line_well();
  const Space& e = phi.geometry();
  for (int trial = 0; trial < 10; ++trial) {
    const Point x = e.sample(rng, 5.0);
    const double lambda = std::pow(10.0, std::uniform_real_distribution<double>(-2, 2)(rng));
    const Point z = phi.prox(lambda, x);
    const double best = prox_objective(phi, lambda, x, z);
    for (int c = 0; c < 200; ++c) {
      EXPECT_LE(best, prox_objective(phi, lambda, x, e.sample(rng, 5.0)) + 1e-12);
    }
  }
}

TEST(DirichletEnergy, ValueMatchesDefinition) {
  const auto spec = fixtures::path_spec({1.0, 2.0});
  const DirichletEnergy energy(spec);
  // Each of the three unit edges is counted twice with weight ½ · ½.
  EXPECT_NEAR(energy.value(spec.anchor()), 1.5, 1e-15);
  EXPECT_NEAR(energy.residual(spec.anchor()), 0.0, 1e-15);
  const auto flat = fixtures::path_spec();
  EXPECT_NEAR(DirichletEnergy(flat).value(flat.anchor()), 0.5 * (9.0 * 0.5 + 9.0 * 0.5), 1e-15);
}

TEST(DirichletEnergy, FiniteDifferenceGradient) {
  std::mt19937_64 rng(79);
  const Space line = Space::euclidean(1);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 4 + static_cast<std::size_t>(trial % 3);
    const auto k = fixtures::random_kernel(m, rng);
    std::vector<std::size_t> all(m);
    for (std::size_t i = 0; i < m; ++i) all[i] = i;
    const MapField f = fixtures::random_field(line, m, rng);
    const DirichletSpec spec(k, line, all, f);
    const DirichletEnergy energy(spec);
    const MapField pf = markov_apply(k, line, f);
    const double h = 1e-6;
    for (std::size_t i = 0; i < m; ++i) {
      MapField up = f, down = f;
      up[i] = vec({f[i].coords()[0] + h});
      down[i] = vec({f[i].coords()[0] - h});
      const double fd = (energy.value(up) - energy.value(down)) / (2 * h);
      const double want = 2.0 * k.mu()[i] * (f[i].coords()[0] - pf[i].coords()[0]);
      EXPECT_NEAR(fd, want, 1e-6 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(DirichletEnergy, ConvexAlongGeodesics) {
  std::mt19937_64 rng(83);
  for (const auto& space : fixtures::backends()) {
    for (int trial = 0; trial < 30; ++trial) {
      const auto k = fixtures::random_kernel(4, rng);
      const MapField a = fixtures::random_field(space, 4, rng);
      MapField b = fixtures::random_field(space, 4, rng);
      const DirichletSpec spec(k, space, {1, 2}, a);
      b[0] = a[0];
      b[3] = a[3];
      const DirichletEnergy energy(spec);
      const MapField mid = spec.field_space().geodesic(a, b, 0.5);
      EXPECT_LE(energy.value(mid), 0.5 * energy.value(a) + 0.5 * energy.value(b) + 1e-9)
          << fixtures::backend_name(space);
    }
  }
}

TEST(DirichletEnergy, LargeLambdaProxIsHarmonic) {
  const auto spec = fixtures::path_spec({-4.0, 9.0});
  const DirichletEnergy energy(spec);
  const MapField z = energy.prox(1e6, spec.anchor(), 1e-10);
  EXPECT_NEAR(z[1].coords()[0], 1.0, 1e-5);
  EXPECT_NEAR(z[2].coords()[0], 2.0, 1e-5);
  EXPECT_EQ(z[0], spec.anchor()[0]);
  EXPECT_EQ(z[3], spec.anchor()[3]);
}

TEST(DirichletEnergy, ProxMatchesLinearSolve) {
  // Interior stationarity: (M + 2λ M (I - Q)) z = M x + 2λ M inflow.
  const auto spec = fixtures::path_spec({0.3, -1.0});
  const DirichletEnergy energy(spec);
  const auto lin = oracle::linear_dirichlet(fixtures::path_kernel(), {1, 2}, Eigen::Vector4d(0, 0, 0, 3));
  for (double lambda : {0.1, 1.0, 10.0}) {
    const MapField z = energy.prox(lambda, spec.anchor(), 1e-12);
    const Eigen::Matrix2d lhs = Eigen::Matrix2d::Identity() + 2 * lambda * (Eigen::Matrix2d::Identity() - lin.q);
    const Eigen::Vector2d want = lhs.fullPivLu().solve(Eigen::Vector2d(0.3, -1.0) + 2 * lambda * lin.inflow);
    EXPECT_LE((interior_values(z, {1, 2}) - want).norm(), 1e-10) << lambda;
  }
}

TEST(DirichletEnergy, ProxCertificateOnSpider) {
  std::mt19937_64 rng(89);
  const auto spec = fixtures::star_spec();
  const DirichletEnergy energy(spec);
  const FieldSpace fs = spec.field_space();
  for (double lambda : {0.5, 5.0}) {
    const MapField z = energy.prox(lambda, spec.anchor(), 1e-10);
    const double best = prox_objective(energy, lambda, spec.anchor(), z);
    for (int c = 0; c < 300; ++c) {
      MapField y = spec.anchor();
      for (std::size_t i : spec.interior()) y[i] = spec.target().sample(rng, 2.0);
      EXPECT_LE(best, prox_objective(energy, lambda, spec.anchor(), y) + 1e-9);
      // Perturbations near the optimum are the sharper test.
      MapField near = fs.geodesic(z, y, 0.01);
      EXPECT_LE(best, prox_objective(energy, lambda, spec.anchor(), near) + 1e-9);
    }
  }
}

TEST(DirichletEnergy, ProxEdgeCases) {
  const auto spec = fixtures::path_spec();
  const DirichletEnergy energy(spec);
  EXPECT_EQ(energy.prox(0.0, spec.anchor(), 1e-9), spec.anchor());
  EXPECT_THROW(energy.prox(-1.0, spec.anchor(), 1e-9), DomainError);
  MapField off = spec.anchor();
  off[0] = vec({1});
  EXPECT_THROW(energy.prox(1.0, off, 1e-9), DomainError);
  const DirichletEnergy capped(spec, ProxOptions{2});
  EXPECT_THROW(capped.prox(10.0, spec.anchor(), 1e-12), ConvergenceFailure<std::vector<double>>);
}

TEST(GradientFlow, QuadraticExamples) {
  const auto phi = half_norm(2);
  const std::vector<double> grid{0.0, 1.0};
  const auto traj = gradient_flow(phi, vec({1, 0}), grid, {1e-9});
  EXPECT_EQ(traj.samples[0].point, vec({1, 0}));
  EXPECT_NEAR(traj.samples[1].point.coords()[0], std::exp(-1.0), 1e-8);
  EXPECT_NEAR(*traj.samples[1].energy, 0.5 * std::exp(-2.0), 1e-8);
}

TEST(GradientFlow, QuadraticMatchesMatrixExponential) {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Random(3, 3);
    const Eigen::MatrixXd q = b * b.transpose();
    const Eigen::Vector3d c(1, -2, 0.5);
    const EuclideanQuadratic phi(q, c);
    const Point x0 = phi.geometry().sample(rng, 3.0);
    const std::vector<double> grid{0.0, 0.5, 2.0};
    const auto traj = gradient_flow(phi, x0, grid, {1e-9});
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Eigen::VectorXd want = c + oracle::expm(-grid[k] * q) * (fixtures::to_eigen(x0) - c);
      EXPECT_LE((fixtures::to_eigen(traj.samples[k].point) - want).norm(), 1e-7);
      if (k > 0) EXPECT_LE(*traj.samples[k].energy, *traj.samples[k - 1].energy + 1e-9);
    }
  }
}

TEST(GradientFlow, DirichletPathMatchesRateTwoFlow) {
  const auto spec = fixtures::path_spec({0.0, 0.0});
  const DirichletEnergy energy(spec);
  const auto lin = oracle::linear_dirichlet(fixtures::path_kernel(), {1, 2}, Eigen::Vector4d(0, 0, 0, 3));
  const std::vector<double> grid{0.0, 0.25, 1.0, 3.0};
  const auto traj = gradient_flow(energy, spec.anchor(), grid, {1e-9});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Eigen::VectorXd want = oracle::affine_flow(lin, 2.0, grid[k], Eigen::Vector2d::Zero());
    EXPECT_LE((interior_values(traj.samples[k].point, {1, 2}) - want).norm(), 1e-7) << grid[k];
    if (k > 0) EXPECT_LE(*traj.samples[k].energy, *traj.samples[k - 1].energy + 1e-9);
  }
}

TEST(GradientFlow, SpiderEnergyDecays) {
  const auto spec = fixtures::star_spec();
  const DirichletEnergy energy(spec);
  const std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 4.0};
  const auto traj = gradient_flow(energy, spec.anchor(), grid, {1e-6});
  for (std::size_t k = 1; k < grid.size(); ++k) {
    EXPECT_LE(*traj.samples[k].energy, *traj.samples[k - 1].energy + 1e-9);
    spec.check_boundary(traj.samples[k].point);
  }
}

TEST(FunctionalPpa, QuadraticReachesMinimum) {
  const auto phi = line_well();
  PpaOptions opt;
  opt.tol = 1e-9;
  const auto traj = ppa_functional(phi, vec({2, 4}), StepSchedule::power(1.0, 1.0), opt);
  EXPECT_TRUE(traj.converged);
  EXPECT_TRUE(traj.warnings.empty());
  EXPECT_LE(*traj.samples.back().energy, 1e-12);
  for (std::size_t n = 1; n < traj.samples.size(); ++n) {
    EXPECT_LE(*traj.samples[n].energy, *traj.samples[n - 1].energy + 1e-15);
  }
  const auto warned = ppa_functional(phi, vec({2, 4}), StepSchedule::power(1.0, 1.5), opt);
  EXPECT_EQ(warned.warnings.size(), 1u);
}

TEST(FunctionalPpa, DirichletReachesHarmonicMap) {
  const auto spec = fixtures::path_spec();
  const DirichletEnergy energy(spec);
  PpaOptions opt;
  opt.tol = 1e-9;
  const auto traj = ppa_functional(energy, spec.anchor(), StepSchedule::constant(10.0), opt);
  ASSERT_TRUE(traj.converged);
  EXPECT_NEAR(traj.final_point()[1].coords()[0], 1.0, 1e-8);
  EXPECT_NEAR(traj.final_point()[2].coords()[0], 2.0, 1e-8);
  EXPECT_NEAR(*traj.samples.back().energy, 1.5, 1e-8);
}

TEST(ResolventProbe, TendsToProjectionOntoMinimizers) {
  const std::vector<double> lambdas{1, 10, 1e3, 1e6};
  const auto norm = half_norm(2);
  const Point zero = vec({0, 0});
  const auto a = resolvent_limit_probe(norm, vec({2, 0}), lambdas, 1e-12, &zero);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    EXPECT_NEAR(a[i].point.coords()[0], 2.0 / (1.0 + lambdas[i]), 1e-14);
    if (i > 0) EXPECT_LT(*a[i].distance_to_target, *a[i - 1].distance_to_target);
  }

  const auto well = line_well();
  const Point x0 = vec({-3, 5});
  const Point target = well.min_projection(x0);
  const auto b = resolvent_limit_probe(well, x0, lambdas, 1e-12, &target);
  EXPECT_LE(*b.back().distance_to_target, 1e-4);

  const auto spec = fixtures::path_spec({5.0, -5.0});
  const DirichletEnergy energy(spec);
  const MapField harmonic = fixtures::path_spec({1.0, 2.0}).anchor();
  const std::vector<double> big{1, 100, 1e6};
  const auto c = resolvent_limit_probe(energy, spec.anchor(), big, 1e-10, &harmonic);
  EXPECT_LE(*c.back().distance_to_target, 1e-4);

  const std::vector<double> bad{1, 1};
  EXPECT_THROW(resolvent_limit_probe(norm, vec({2, 0}), bad, 1e-9), DomainError);
}
