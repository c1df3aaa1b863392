#pragma once

#include "agecodec/pmf.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace agecodec {

inline constexpr double kKraftTolerance = 1e-9;

/// Codeword lengths in bits, one per symbol. Real-valued unless `integral()`.
class LengthAssignment {
 public:
  LengthAssignment() = default;
  /// Throws std::invalid_argument on negative or non-finite entries, or when
  /// `integral` is set and some entry is not a whole number.
  LengthAssignment(Vector lengths, bool integral);

  static LengthAssignment real(Vector lengths) { return {std::move(lengths), false}; }
  static LengthAssignment integer(Vector lengths) { return {std::move(lengths), true}; }

  std::size_t size() const { return static_cast<std::size_t>(lengths_.size()); }
  double operator[](std::size_t i) const { return lengths_(static_cast<Eigen::Index>(i)); }
  const Vector& values() const { return lengths_; }
  bool integral() const { return integral_; }

  double max() const { return lengths_.maxCoeff(); }
  bool kraft_feasible(double tol = kKraftTolerance) const;

 private:
  Vector lengths_;
  bool integral_ = false;
};

/// A binary prefix-free code, codeword i for symbol i.
struct CodeBook {
  std::vector<std::string> codewords;

  std::size_t size() const { return codewords.size(); }
  bool prefix_free() const;
  LengthAssignment lengths() const;
};

template <typename Derived>
double kraft_sum(const Eigen::DenseBase<Derived>& lengths) {
  return (-lengths.derived().array() * std::log(2.0)).exp().sum();
}

inline double kraft_sum(const LengthAssignment& l) { return kraft_sum(l.values()); }

/// -log2 P(x), ceiled when `integer` is set.
LengthAssignment shannon_lengths(const Pmf& p, bool integer);

LengthAssignment round_up(const LengthAssignment& l);

/// Canonical code: symbols ordered by (length, id) receive lexicographically
/// increasing codewords. Requires integral lengths >= 1 satisfying Kraft.
CodeBook canonical_code(const LengthAssignment& l);

/// Returns (E[L], E[L^2]) under `p`.
std::pair<double, double> moments(const Pmf& p, const LengthAssignment& l);

/// Replaces zero lengths by one, so that a codebook can be built.
LengthAssignment bump_zero_lengths(const LengthAssignment& l);

// JSON object mapping symbol id to bit string; CSV `symbol,length`.
std::string codebook_to_json(const CodeBook& book);
CodeBook codebook_from_json(const std::string& text);
std::string lengths_to_csv(const LengthAssignment& l);
LengthAssignment lengths_from_csv(const std::string& text);

}  // namespace agecodec
