#include "agecodec/varform.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace agecodec;
using doctest::Approx;

TEST_CASE("variational p-norm: worked example") {
  const Pmf p = new_pmf(std::vector<double>{0.5, 0.5});
  const Vector v{{1.0, 2.0}};
  const Vector q = q_star(p, v, 2.0);
  CHECK(q(0) == Approx(0.2));
  CHECK(q(1) == Approx(0.8));
  CHECK(pnorm_variational_value(p, v, q, 2.0) == Approx(std::sqrt(2.5)));
  CHECK(pnorm_variational_value(p, v, q, 2.0) == Approx(1.5811).epsilon(1e-4));
  CHECK(pnorm(p, v, 2.0) == Approx(std::sqrt(2.5)));
  // Q = P gives the mean
  CHECK(pnorm_variational_value(p, v, p.probs(), 2.0) == Approx(1.5));
}

TEST_CASE("q_star of constant values is P") {
  const Pmf p = zipf(1, 10);
  const Vector q = q_star(p, Vector::Constant(10, 3.0), 1.5);
  CHECK((q - p.probs()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("variational formula errors") {
  const Pmf p = fixtures::uniform(3);
  const Vector v = Vector::Ones(3);
  CHECK_THROWS_AS(pnorm_variational_value(p, v, p.probs(), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(pnorm_variational_value(p, v, Vector::Ones(2) / 2, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(pnorm_variational_value(p, v, Vector{{0.5, 0.6, -0.1}}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(q_star(p, Vector::Zero(3), 2.0), std::invalid_argument);
  CHECK_THROWS_AS(q_star(p, v, 0.5), std::invalid_argument);
}

TEST_CASE("variational inequality with equality at q_star") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> val(0.0, 20.0);
  const double orders[] = {1.5, 2.0, 3.0};
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng() % 31;
    const Pmf p(fixtures::random_simplex(rng, n));
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = val(rng);
    const double order = orders[t % 3];
    const double norm = pnorm(p, v, order);
    const Vector q = fixtures::random_simplex(rng, n);
    CHECK(norm - pnorm_variational_value(p, v, q, order) >= -1e-12);
    CHECK(std::abs(norm - pnorm_variational_value(p, v, q_star(p, v, order), order)) <= 1e-10);
  }
}

TEST_CASE("g-weights") {
  const Pmf p = new_pmf(std::vector<double>{0.5, 0.25, 0.25});
  const Vector q{{0.25, 0.25, 0.5}};
  const Vector ga = g_weights(p, 0.5, q, CostMode::age);
  const Vector gd = g_weights(p, 0.5, q, CostMode::delay);
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(ga(i) == Approx((1 - 0.125) * p[i] + 0.5 * std::sqrt(q(i) * p[i])));
    CHECK(gd(i) == Approx((1 + 0.125) * p[i] + 0.5 * std::sqrt(q(i) * p[i])));
  }
  CHECK(g_feasible(ga));
  CHECK(g_feasible(Vector{{0.5, -1e-13}}));
  CHECK_FALSE(g_feasible(Vector{{0.5, -1e-9}}));
  // large z with Q away from a symbol drives its age weight negative
  CHECK_FALSE(g_feasible(g_weights(p, 3.0, Vector{{1.0, 0.0, 0.0}}, CostMode::age)));
  CHECK(g_feasible(g_weights(p, 3.0, Vector{{1.0, 0.0, 0.0}}, CostMode::delay)));
}

TEST_CASE("weighted entropy and tilted lengths") {
  const Vector g{{2.0, 1.0, 1.0}};
  CHECK(weighted_entropy(g) == Approx(2 * 1 + 1 * 2 + 1 * 2));
  const Vector l = tilted_lengths(g);
  CHECK(l(0) == Approx(1.0));
  CHECK(l(2) == Approx(2.0));
  CHECK(weighted_entropy(Vector{{1.0, 0.0}}) == 0.0);
}

TEST_CASE("objectives at z = 0 equal the entropy") {
  std::mt19937_64 rng(59);
  for (int t = 0; t < 100; ++t) {
    const Pmf p = fixtures::random_pmf(rng, 40);
    const Vector q = fixtures::random_simplex(rng, p.size());
    CHECK(age_objective(p, 0.0, q) == Approx(entropy(p)).epsilon(1e-12));
    CHECK(delay_objective(p, 0.0, q, 50.0) == Approx(entropy(p)).epsilon(1e-12));
  }
}

TEST_CASE("uniform pmf: age objective along Q = P") {
  for (int k = 1; k <= 8; ++k) {
    const Pmf p = fixtures::uniform(std::size_t{1} << k);
    // g = (1 + z - z^2/2) P, so the value is (1 + z - z^2/2) k, largest at z = 1
    CHECK(age_objective(p, 1.0, p.probs()) == Approx(1.5 * k));
    CHECK(maxmin_objective(p, 1.0, p.probs(), CostMode::age, 0.0) == Approx(1.5 * k));
    CHECK(age_objective(p, 2.0, p.probs()) == Approx(k));
    CHECK(age_objective(p, 0.9, p.probs()) < age_objective(p, 1.0, p.probs()));
    CHECK(age_objective(p, 1.1, p.probs()) < age_objective(p, 1.0, p.probs()));
  }
}

TEST_CASE("age objective rejects infeasible points") {
  const Pmf p = fixtures::uniform(4);
  CHECK_THROWS_AS(age_objective(p, 3.0, Vector{{1.0, 0.0, 0.0, 0.0}}), std::domain_error);
}

TEST_CASE("delay objective subtracts the z^2 threshold term") {
  const Pmf p = zipf(1, 6);
  const Vector q = p.probs();
  const double z = 0.3, th = 9.0;
  const Vector g = g_weights(p, z, q, CostMode::delay);
  CHECK(delay_objective(p, z, q, th) == Approx(weighted_entropy(g) - 0.5 * z * z * th));
}

TEST_CASE("age objective is continuous at the boundary g = 0") {
  const Pmf p = fixtures::uniform(4);
  const Vector q{{1.0, 0.0, 0.0, 0.0}};
  const double z = std::sqrt(2.0);
  const Vector g = g_weights(p, z, q, CostMode::age);
  CHECK(std::abs(g(1)) < 1e-15);
  const double at = age_objective(p, z, q);
  CHECK(std::isfinite(at));
  double prev_gap = 1.0;
  for (double delta : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double gap = std::abs(age_objective(p, z - delta, q) - at);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-5);
}

TEST_CASE("objectives are concave in Q for fixed z, and the age objective in z for fixed Q") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const Pmf p = fixtures::random_pmf(rng, 24);
    const std::size_t n = p.size();
    const Vector q1 = fixtures::random_simplex(rng, n);
    const Vector q2 = fixtures::random_simplex(rng, n);
    const double a = unit(rng);
    const Vector qm = a * q1 + (1 - a) * q2;

    // a z keeping both endpoints inside the feasible set
    double z = 1.4 * unit(rng);
    while (!g_feasible(g_weights(p, z, q1, CostMode::age)) || !g_feasible(g_weights(p, z, q2, CostMode::age))) z *= 0.8;
    const double lhs = age_objective(p, z, qm);
    CHECK(lhs >= a * age_objective(p, z, q1) + (1 - a) * age_objective(p, z, q2) - 1e-9);

    const double th = entropy(p) + 1 + 5 * unit(rng);
    const double zd = 2 * unit(rng);
    CHECK(delay_objective(p, zd, qm, th) >=
          a * delay_objective(p, zd, q1, th) + (1 - a) * delay_objective(p, zd, q2, th) - 1e-9);

    double z1 = 1.5 * unit(rng), z2 = 1.5 * unit(rng);
    while (!g_feasible(g_weights(p, z1, q1, CostMode::age))) z1 *= 0.8;
    while (!g_feasible(g_weights(p, z2, q1, CostMode::age))) z2 *= 0.8;
    const double zm = a * z1 + (1 - a) * z2;
    CHECK(age_objective(p, zm, q1) >= a * age_objective(p, z1, q1) + (1 - a) * age_objective(p, z2, q1) - 1e-9);
  }
}

TEST_CASE("permuting Q within an equal-probability group leaves the objective unchanged") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    // two or three probability levels, each repeated
    const std::size_t levels = 2 + rng() % 2;
    std::vector<double> w;
    for (std::size_t k = 0; k < levels; ++k) {
      const std::size_t reps = 2 + rng() % 5;
      const double level = 0.1 + unit(rng);
      for (std::size_t r = 0; r < reps; ++r) w.push_back(level);
    }
    const Pmf p = new_pmf(w);
    const Partition part = group_equal_probs(p, 0.0);
    const Vector q = fixtures::random_simplex(rng, p.size());
    Vector permuted = q;
    for (const auto& g : part.groups) {
      std::vector<std::size_t> shuffled = g;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      for (std::size_t i = 0; i < g.size(); ++i) {
        permuted(static_cast<Eigen::Index>(shuffled[i])) = q(static_cast<Eigen::Index>(g[i]));
      }
    }
    double z = 1.2 * unit(rng);
    while (!g_feasible(g_weights(p, z, q, CostMode::age))) z *= 0.8;
    CHECK(std::abs(age_objective(p, z, q) - age_objective(p, z, permuted)) < 1e-12);
    CHECK(std::abs(delay_objective(p, z, q, 10.0) - delay_objective(p, z, permuted, 10.0)) < 1e-12);
  }
}
