#pragma once

#include "agecodec/pmf.hpp"

#include <cmath>

namespace agecodec {

/// Which nonlinear cost the g-weights linearize.
enum class CostMode { age, delay };

inline constexpr double kFeasibilitySlack = 1e-12;

/// Per-symbol weights (1 -+ z^2/2) P(x) + z sqrt(Q(x) P(x)), minus sign in age
/// mode and plus sign in delay mode. `q` is any nonnegative vector with the
/// alphabet's size; it need not be strictly positive.
template <typename DerivedP, typename DerivedQ>
Vector g_weights(const Eigen::MatrixBase<DerivedP>& p, double z, const Eigen::MatrixBase<DerivedQ>& q, CostMode mode) {
  const double sign = mode == CostMode::age ? -1.0 : 1.0;
  return ((1.0 + sign * 0.5 * z * z) * p.array() + z * (q.array() * p.array()).sqrt()).matrix();
}

inline Vector g_weights(const Pmf& p, double z, const Vector& q, CostMode mode) {
  return g_weights(p.probs(), z, q, mode);
}

/// True when every g-weight is >= -kFeasibilitySlack.
bool g_feasible(const Vector& g);

/// sum_x g(x) log2(G / g(x)) with G = sum g; zero-weight terms contribute 0.
/// Requires g >= -kFeasibilitySlack (entries inside the slack count as 0).
double weighted_entropy(const Vector& g);

/// Lengths log2(G / g(x)), the real Shannon lengths of g / G.
Vector tilted_lengths(const Vector& g);

/// ||values||_p under P.
double pnorm(const Pmf& p, const Vector& values, double order);

/// sum_x P(x) (Q(x)/P(x))^(1/p') |values(x)|, p' = p/(p-1). Bounded above by
/// ||values||_p with equality at q_star. Requires order > 1.
double pnorm_variational_value(const Pmf& p, const Vector& values, const Vector& q, double order);

/// Q*(x) proportional to P(x) |values(x)|^p.
Vector q_star(const Pmf& p, const Vector& values, double order);

/// Age maxmin objective c_P(z, Q). Throws std::domain_error if some
/// g-weight is negative beyond the slack.
double age_objective(const Pmf& p, double z, const Vector& q);

/// Delay maxmin objective: weighted entropy of the delay-mode g-weights minus
/// (z^2/2) threshold.
double delay_objective(const Pmf& p, double z, const Vector& q, double threshold);

/// Objective for either mode; `threshold` is ignored in age mode.
double maxmin_objective(const Pmf& p, double z, const Vector& q, CostMode mode, double threshold);

}  // namespace agecodec
