#pragma once

#include "agecodec/codec.hpp"
#include "agecodec/pmf.hpp"
#include "agecodec/varform.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace agecodec {

struct SolverOptions {
  int z_grid_points = 64;
  int inner_max_iters = 10000;
  double inner_tol = 1e-10;
  int multistarts = 8;
  std::uint64_t seed = 0;
  double z_tol = 1e-8;
  double group_tol = kDefaultGroupTolerance;

  /// Throws std::invalid_argument unless every field is in range.
  void validate() const;
};

/// Output of the age or delay design problem.
struct OptResult {
  CostMode mode = CostMode::age;
  double threshold = 0.0;  ///< 1/lambda in delay mode, unused for age

  double z_star = 0.0;
  Vector q_star;
  Vector p_star;
  LengthAssignment lengths;  ///< real Shannon lengths of p_star

  double cost = 0.0;        ///< primal cost of `lengths`
  double dual_value = 0.0;  ///< maxmin objective at (z_star, q_star)
  double duality_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  /// False when the delay condition H(P) + log2(1 + 1/sqrt 2) < 1/lambda
  /// fails and the result comes from the direct minimizer alone.
  bool delay_condition_met = true;
  std::string path;  ///< "maxmin", "alternation" or "direct"
  std::vector<std::string> diagnostics;

  /// Average age (cost - 1/2) in age mode, mean sojourn time in delay mode.
  double average_age_or_delay() const { return mode == CostMode::age ? cost - 0.5 : cost; }
};

/// Thrown by solve_delay when the arrival rate violates the condition under
/// which the delay maxmin equality is guaranteed.
class DelayInfeasible : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// log2(1 + 1/sqrt 2), the slack in the delay feasibility condition.
double delay_condition_slack();

/// True when H(P) + log2(1 + 1/sqrt 2) < 1/lambda.
bool delay_condition_holds(const Pmf& p, double lambda);

/// (log2|X| / H(P)) sqrt(1 / min P): any maximizing z lies in [0, K].
double z_bound(const Pmf& p);

/// Primal costs over real lengths.
double primal_age_cost(const Pmf& p, const Vector& lengths);
double primal_delay_cost(const Pmf& p, const Vector& lengths, double threshold);

/// Minimizes E[L] + E[L^2]/(2 E[L]) over Kraft-feasible real lengths by
/// solving the maxmin problem over (z, Q), cross-checked by an alternation
/// path from several starts. The best primal cost wins.
OptResult solve_age(const Pmf& p, const SolverOptions& opts = {});

/// Minimizes E[L^2]/(2(1/lambda - E[L])) + E[L]. Throws DelayInfeasible when
/// the feasibility condition fails, unless `allow_direct_fallback` is set and
/// H(P) < 1/lambda, in which case the direct minimizer is used and the result
/// is flagged with delay_condition_met = false.
OptResult solve_delay(const Pmf& p, double lambda, const SolverOptions& opts = {}, bool allow_direct_fallback = false);

/// Primal cost after each accepted step of the alternation path started from
/// the Shannon lengths of P.
std::vector<double> alternation_history(const Pmf& p, CostMode mode, double threshold = 0.0,
                                        const SolverOptions& opts = {});

struct DirectResult {
  LengthAssignment lengths;
  double cost = 0.0;
  int iterations = 0;
};

/// Independent check: minimizes the primal cost directly over lengths
/// -log2 q, q on the simplex, using L-BFGS in softmax coordinates with
/// several starts. `lambda` is required in delay mode.
DirectResult direct_oracle(const Pmf& p, CostMode mode, std::optional<double> lambda = std::nullopt,
                           const SolverOptions& opts = {});

struct SaddleDiagnostics {
  double shannon_gap = 0.0;      ///< max |l*(x) - log2(G/g(x))|
  double z_stationarity = 0.0;   ///< |dF/dz| at (z*, Q*) for fixed l*
  double q_stationarity = 0.0;   ///< max |Q* - Q maximizing F for fixed l*|
  double min_g = 0.0;
  bool shannon_optimal = false;
  bool stationary = false;
  bool nonnegative = false;

  bool passed() const { return shannon_optimal && stationary && nonnegative; }
};

/// Verifies that (l*, (z*, Q*)) looks like a saddle point: l* is the Shannon
/// code for g/G, (z*, Q*) is first-order stationary for fixed l*, g >= 0.
SaddleDiagnostics saddle_check(const Pmf& p, const OptResult& result, double tol = 1e-6);

std::string opt_result_to_json(const OptResult& r, const std::optional<SaddleDiagnostics>& diag = std::nullopt);

}  // namespace agecodec
