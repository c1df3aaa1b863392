#pragma once

#include "agecodec/codec.hpp"
#include "agecodec/pmf.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace fixtures {

using agecodec::Pmf;
using agecodec::Vector;

/// Head symbol of mass 1 - 1/n followed by 2^n equiprobable tail symbols.
inline Pmf spike_example(int n) {
  std::vector<double> w(1 + (std::size_t{1} << n));
  w[0] = 1.0 - 1.0 / n;
  for (std::size_t i = 1; i < w.size(); ++i) w[i] = 1.0 / (n * std::ldexp(1.0, n));
  return Pmf(w);
}

/// Real Shannon lengths of the alternative pmf with head 2^-sqrt(n).
inline agecodec::LengthAssignment spike_prime_lengths(int n) {
  const double root = std::sqrt(static_cast<double>(n));
  Vector l = Vector::Constant(1 + (Eigen::Index{1} << n), n - std::log2(1.0 - std::exp2(-root)));
  l(0) = root;
  return agecodec::LengthAssignment::real(l);
}

/// Three symbols of mass 1/4 and 61 sharing the remaining quarter.
inline Pmf randomized_example() {
  std::vector<double> w(64, 0.25 / 61.0);
  w[0] = w[1] = w[2] = 0.25;
  return Pmf(w);
}

inline Vector randomized_example_theta() {
  Vector t = Vector::Zero(64);
  t.head(3).setOnes();
  return t;
}

inline Pmf uniform(std::size_t n) { return Pmf(Vector::Ones(static_cast<Eigen::Index>(n))); }

/// Random pmf with heavy-tailed weights so that some instances are skewed.
inline Pmf random_pmf(std::mt19937_64& rng, std::size_t max_n) {
  std::uniform_int_distribution<std::size_t> size(2, max_n);
  std::uniform_real_distribution<double> shape(0.0, 4.0);
  std::exponential_distribution<double> expo(1.0);
  const std::size_t n = size(rng);
  const double power = 1.0 + shape(rng);
  Vector w(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = std::pow(expo(rng), power) + 1e-12;
  return Pmf(w);
}

/// Random point in the interior of the simplex.
inline Vector random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> expo(1.0);
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = expo(rng) + 1e-9;
  return v / v.sum();
}

}  // namespace fixtures
