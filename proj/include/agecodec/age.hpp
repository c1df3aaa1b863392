#pragma once

#include "agecodec/codec.hpp"
#include "agecodec/pmf.hpp"

#include <limits>
#include <optional>
#include <string>

// Closed-form cost evaluators. Time is measured in channel bit-slots: the
// channel carries one bit per slot.

namespace agecodec {

inline constexpr double kInfiniteDelay = std::numeric_limits<double>::infinity();

/// E[L] + E[L^2] / (2 E[L]) - 1/2, from the first two moments of L.
inline double age_from_moments(double mean, double second) { return mean + second / (2.0 * mean) - 0.5; }

/// The cost E[L] + E[L^2] / (2 E[L]) minimised by age-optimal codes; it is
/// the average age plus one half.
inline double age_cost_from_moments(double mean, double second) { return mean + second / (2.0 * mean); }

/// Average age of a memoryless update scheme. Throws if E[L] = 0.
double average_age(const Pmf& p, const LengthAssignment& l);

/// Primal age cost E[L] + E[L^2] / (2 E[L]).
double age_cost(const Pmf& p, const LengthAssignment& l);

/// Randomized skipping: symbol x is sent with probability theta(x); otherwise
/// the skip codeword of length `skip_length` is sent instead.
struct RandomizedScheme {
  Vector theta;
  double skip_length = 0.0;

  /// Scheme with skip length defaulting to the shortest codeword in `l`.
  static RandomizedScheme with_default_skip(Vector theta, const LengthAssignment& l);
  static RandomizedScheme always_transmit(std::size_t n, double skip_length = 1.0);
};

/// E[theta(X)].
double transmit_probability(const Pmf& p, const RandomizedScheme& scheme);

/// Moments (E[L(theta)], E[L(theta)^2]) of the effective length: l(x) w.p.
/// P(x) theta(x), skip_length w.p. 1 - E[theta(X)].
std::pair<double, double> randomized_moments(const Pmf& p, const LengthAssignment& l, const RandomizedScheme& scheme);

/// Kraft sum of the code actually used: every symbol with theta > 0, plus the
/// skip codeword whenever E[theta(X)] < 1.
double effective_kraft_sum(const Pmf& p, const LengthAssignment& l, const RandomizedScheme& scheme);

/// E[L(theta)] / E[theta(X)] + E[L(theta)^2] / (2 E[L(theta)]) - 1/2.
double average_age_randomized(const Pmf& p, const LengthAssignment& l, const RandomizedScheme& scheme);

/// Erasure channel with repeat-until-success: a / (1 - eps) + eps / (2 (1 - eps)).
double average_age_erasure(double base_age, double eps);

/// Average age over an erasure channel where each bit is retransmitted until
/// it gets through, computed from the renewal moments of the per-codeword
/// transmission time (a negative binomial number of slots). It exceeds
/// `average_age_erasure` by eps / (2 (1 - eps)).
double average_age_erasure_exact(const Pmf& p, const LengthAssignment& l, const RandomizedScheme& scheme, double eps);

struct AgeBounds {
  double lower;
  double upper;
};

/// (1.5 H(P) - 0.5, 1.5 log2 |X| + 1).
AgeBounds age_bounds(const Pmf& p);

/// log2|X| + 1 - (1 - 1/(2 ln 2)) E[l_S^2] / E[l_S] for integer Shannon
/// lengths l_S; nonnegative for every pmf.
double shannon_age_certificate(const Pmf& p);

/// Mean sojourn time E[L^2] / (2 (1/lambda - E[L])) + E[L] of the M/G/1 queue
/// with service time L; kInfiniteDelay when E[L] >= 1/lambda.
double average_delay(const Pmf& p, const LengthAssignment& l, double lambda);
double delay_from_moments(double mean, double second, double threshold);

struct AgeReport {
  double mean_length = 0.0;
  double second_moment = 0.0;
  double average_age = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
};

AgeReport age_report(const Pmf& p, const LengthAssignment& l);
std::string age_report_to_json(const AgeReport& r);

}  // namespace agecodec
