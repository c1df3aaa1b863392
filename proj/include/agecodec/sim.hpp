#pragma once

#include "agecodec/age.hpp"
#include "agecodec/codec.hpp"
#include "agecodec/pmf.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace agecodec {

/// Independent, reproducible random streams derived from one seed.
enum class Stream : std::uint64_t { symbols = 1, coins = 2, erasures = 3, arrivals = 4 };

std::mt19937_64 make_stream(std::uint64_t seed, Stream role, std::uint64_t replication = 0);

/// Inverse-CDF sampler over a finite alphabet.
class SymbolSampler {
 public:
  explicit SymbolSampler(const Pmf& p);
  std::size_t operator()(std::mt19937_64& rng) const;

 private:
  std::vector<double> cdf_;
};

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct SimConfig {
  std::uint64_t horizon = 1'000'000;  ///< bit-slots
  std::uint64_t seed = 0;
  double erasure = 0.0;
  std::optional<RandomizedScheme> scheme;
  bool record_trace = false;

  void validate() const;
};

/// Accumulators over a run of consecutive cycles (age mode) or customers
/// (queue mode). Merging is plain addition.
struct Batch {
  double count = 0.0;
  double sum_y = 0.0;
  double sum_y2 = 0.0;
  double sum_z = 0.0;
  double sum_r = 0.0;
};

struct CycleTrace {
  std::uint64_t cycle;
  std::uint64_t y;
  std::uint64_t z;
  double r;
};

struct SimReport {
  enum class Kind { age, queue } kind = Kind::age;

  /// Time-average age (age mode) or mean sojourn time (queue mode).
  double empirical_mean = 0.0;
  double standard_error = 0.0;

  // renewal statistics per cycle (age mode), first cycle discarded
  double mean_y = 0.0, mean_y_sq = 0.0, mean_z = 0.0, mean_r = 0.0;
  double se_y = 0.0, se_y_sq = 0.0, se_z = 0.0, se_r = 0.0;
  double lag1_corr_y = 0.0;   ///< correlation of (Y_k, Y_k+1)
  double lag2_corr_r = 0.0;   ///< correlation of (R_k, R_k+2)
  std::uint64_t cycles = 0;   ///< cycles, or customers in queue mode

  std::vector<Batch> batches;
  std::vector<CycleTrace> trace;
  std::string warning;

  double empirical_average_age() const { return empirical_mean; }
  double empirical_mean_wait() const { return empirical_mean; }
};

/// Simulates the memoryless update scheme: when the channel frees up the
/// encoder takes the current symbol, skipping those that arrived while it was
/// busy. Lengths must be whole numbers; with a randomized scheme only symbols
/// with theta > 0 and the skip codeword are ever sent. Throws if fewer than
/// 10 cycles complete.
SimReport simulate_update(const Pmf& p, const LengthAssignment& lengths, const SimConfig& cfg);
SimReport simulate_update(const Pmf& p, const CodeBook& book, const SimConfig& cfg);

/// Runs `replications` independent copies on up to `jobs` threads and merges.
SimReport replicate_update(const Pmf& p, const LengthAssignment& lengths, const SimConfig& cfg, int replications,
                           int jobs);

/// Pools two age-mode reports; associative and commutative in the pooled
/// means.
SimReport merge(const SimReport& a, const SimReport& b);

struct RenewalResiduals {
  double expected_y = 0.0, expected_y_sq = 0.0, expected_z = 0.0, expected_r = 0.0;
  /// (empirical - expected) / standard error for each cycle statistic
  double y = 0.0, y_sq = 0.0, z = 0.0, r = 0.0;

  double max_abs() const;
};

/// Compares cycle statistics against the closed forms E[Y] = E[T]/E[theta],
/// E[Z], E[Y^2] and E[R] = E[Y^2]/2 + E[Y](E[Z] - 1/2), with T the slot count
/// of one codeword (equal to its length without erasures).
RenewalResiduals renewal_identities(const SimReport& report, const Pmf& p, const LengthAssignment& lengths,
                                    const std::optional<RandomizedScheme>& scheme, double erasure = 0.0);

/// FCFS single-server queue with Poisson(lambda) arrivals in continuous time;
/// service time is the codeword length of each arriving symbol. Unstable
/// configurations still return an estimate, with `warning` set.
SimReport simulate_mg1(const Pmf& p, const LengthAssignment& lengths, double lambda, std::uint64_t n_arrivals,
                       std::uint64_t seed);

std::string sim_report_to_json(const SimReport& r);
std::string trace_to_csv(const SimReport& r);

}  // namespace agecodec
