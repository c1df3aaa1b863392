#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace agecodec {

using Vector = Eigen::VectorXd;

/// Finite probability mass function with strictly positive entries.
///
/// Symbols with zero weight are dropped at construction; `original_index()`
/// maps each retained symbol back to its position in the input weights.
class Pmf {
 public:
  /// Normalizes nonnegative weights. Throws std::invalid_argument on negative
  /// or non-finite weights, or when fewer than two weights are positive.
  explicit Pmf(std::span<const double> weights);
  explicit Pmf(const Vector& weights);

  std::size_t size() const { return static_cast<std::size_t>(probs_.size()); }
  double operator[](std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }
  const Vector& probs() const { return probs_; }

  const std::vector<std::size_t>& original_index() const { return original_index_; }
  /// True when some input weight was zero and its symbol was removed.
  bool dropped_symbols() const { return dropped_; }

  double min() const { return probs_.minCoeff(); }
  double max() const { return probs_.maxCoeff(); }

 private:
  Vector probs_;
  std::vector<std::size_t> original_index_;
  bool dropped_ = false;
};

Pmf new_pmf(std::span<const double> weights);

/// Zipf(s, n): P(i) proportional to i^-s, i = 1..n.
Pmf zipf(double s, std::size_t n);

/// One symbol of mass `head`, the remaining n - 1 sharing 1 - head equally.
Pmf head_tail(double head, std::size_t n);

/// Entropy in bits.
double entropy(const Pmf& p);

/// D(P||Q) in bits. Both pmfs must live on the same alphabet.
double kl_divergence(const Pmf& p, const Pmf& q);

struct Partition {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<double> group_mass;
  /// Representative per-symbol probability of each group.
  std::vector<double> symbol_prob;
  /// group_of[x] is the index of the group containing symbol x.
  std::vector<std::size_t> group_of;

  std::size_t count() const { return groups.size(); }
};

inline constexpr double kDefaultGroupTolerance = 1e-12;

/// Groups symbols whose sorted probabilities differ from their neighbour in
/// the chain by at most `tol` relative to the larger of the two.
Partition group_equal_probs(const Pmf& p, double tol = kDefaultGroupTolerance);

// Serialization: JSON array of probabilities, or CSV with header `p`.
std::string pmf_to_json(const Pmf& p);
Pmf pmf_from_json(const std::string& text);
std::string pmf_to_csv(const Pmf& p);
Pmf pmf_from_csv(const std::string& text);

}  // namespace agecodec
