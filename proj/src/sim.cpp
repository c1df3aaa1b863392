#include "agecodec/sim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace agecodec {

namespace {

constexpr std::size_t kBatches = 50;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Pearson correlation of (x_k, x_{k+lag}).
class LagCorrelation {
 public:
  explicit LagCorrelation(std::size_t lag) : lag_(lag) {}

  void push(double x) {
    if (window_.size() == lag_) {
      const double a = window_.front();
      window_.erase(window_.begin());
      n_ += 1.0;
      sa_ += a;
      sb_ += x;
      saa_ += a * a;
      sbb_ += x * x;
      sab_ += a * x;
    }
    window_.push_back(x);
  }

  double value() const {
    if (n_ < 3.0) return 0.0;
    const double cov = sab_ - sa_ * sb_ / n_;
    const double va = saa_ - sa_ * sa_ / n_;
    const double vb = sbb_ - sb_ * sb_ / n_;
    return va > 0.0 && vb > 0.0 ? cov / std::sqrt(va * vb) : 0.0;
  }

 private:
  std::size_t lag_;
  std::vector<double> window_;
  double n_ = 0.0, sa_ = 0.0, sb_ = 0.0, saa_ = 0.0, sbb_ = 0.0, sab_ = 0.0;
};

// Fills means and batch-means standard errors from the batch accumulators.
void finalize(SimReport& r) {
  Batch total;
  for (const auto& b : r.batches) {
    total.count += b.count;
    total.sum_y += b.sum_y;
    total.sum_y2 += b.sum_y2;
    total.sum_z += b.sum_z;
    total.sum_r += b.sum_r;
  }
  r.cycles = static_cast<std::uint64_t>(total.count);
  if (total.count <= 0.0) return;
  std::vector<double> est, y, y2, z, rr;
  for (const auto& b : r.batches) {
    if (b.count <= 0.0) continue;
    if (r.kind == SimReport::Kind::age) {
      est.push_back(b.sum_r / b.sum_y);
      y.push_back(b.sum_y / b.count);
      y2.push_back(b.sum_y2 / b.count);
      z.push_back(b.sum_z / b.count);
      rr.push_back(b.sum_r / b.count);
    } else {
      est.push_back(b.sum_r / b.count);
    }
  }
  const double root = std::sqrt(static_cast<double>(est.size()));
  r.standard_error = sample_sd(est) / root;
  if (r.kind == SimReport::Kind::age) {
    r.empirical_mean = total.sum_r / total.sum_y;
    r.mean_y = total.sum_y / total.count;
    r.mean_y_sq = total.sum_y2 / total.count;
    r.mean_z = total.sum_z / total.count;
    r.mean_r = total.sum_r / total.count;
    r.se_y = sample_sd(y) / root;
    r.se_y_sq = sample_sd(y2) / root;
    r.se_z = sample_sd(z) / root;
    r.se_r = sample_sd(rr) / root;
  } else {
    r.empirical_mean = total.sum_r / total.count;
  }
}

std::vector<std::uint64_t> integer_lengths(const LengthAssignment& l) {
  std::vector<std::uint64_t> out(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] != std::floor(l[i])) throw std::invalid_argument("simulation: codeword lengths must be whole numbers");
    out[i] = static_cast<std::uint64_t>(l[i]);
  }
  return out;
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, Stream role, std::uint64_t replication) {
  const std::uint64_t key = splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(role) << 32 | replication));
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  return std::mt19937_64(seq);
}

SymbolSampler::SymbolSampler(const Pmf& p) : cdf_(p.size()) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cdf_[i] = acc;
  }
  cdf_.back() = 1.0;
}

std::size_t SymbolSampler::operator()(std::mt19937_64& rng) const {
  const double u = uniform01(rng);
  return static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
}

void SimConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("sim config: horizon must be >= 1");
  if (!(erasure >= 0.0 && erasure < 1.0)) throw std::invalid_argument("sim config: erasure must lie in [0,1)");
}

SimReport simulate_update(const Pmf& p, const LengthAssignment& lengths, const SimConfig& cfg) {
  cfg.validate();
  if (lengths.size() != p.size()) throw std::invalid_argument("simulate_update: alphabet size mismatch");
  const auto len = integer_lengths(lengths);
  const RandomizedScheme scheme = cfg.scheme ? *cfg.scheme : RandomizedScheme::always_transmit(p.size());
  const double tp = transmit_probability(p, scheme);
  if (static_cast<std::size_t>(scheme.theta.size()) != p.size()) throw std::invalid_argument("simulate_update: theta size mismatch");
  if (!(tp > 0.0)) throw std::invalid_argument("simulate_update: E[theta(X)] must be positive");
  const bool randomized = (scheme.theta.array() < 1.0).any();
  if (randomized && (scheme.skip_length < 1.0 || scheme.skip_length != std::floor(scheme.skip_length)))
    throw std::invalid_argument("simulate_update: skip codeword length must be a whole number >= 1");
  const auto skip_len = static_cast<std::uint64_t>(scheme.skip_length);

  std::uint64_t max_len = randomized ? skip_len : 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (scheme.theta(static_cast<Eigen::Index>(i)) > 0.0) {
      if (len[i] == 0) throw std::invalid_argument("simulate_update: transmitted codewords need length >= 1");
      max_len = std::max(max_len, len[i]);
    }
  }
  if (cfg.horizon < 100 * max_len) throw std::invalid_argument("simulate_update: horizon must be at least 100 x max length");

  auto sym_rng = make_stream(cfg.seed, Stream::symbols);
  auto coin_rng = make_stream(cfg.seed, Stream::coins);
  auto erase_rng = make_stream(cfg.seed, Stream::erasures);
  const SymbolSampler sample(p);
  std::geometric_distribution<std::uint64_t> failures(1.0 - cfg.erasure);

  auto slots_for = [&](std::uint64_t bits) {
    if (cfg.erasure == 0.0) return bits;
    std::uint64_t slots = bits;
    for (std::uint64_t b = 0; b < bits; ++b) slots += failures(erase_rng);
    return slots;
  };

  // One pass collects raw cycles; batches are cut afterwards so that every
  // batch holds the same number of consecutive cycles.
  struct Cycle {
    std::uint64_t y, z;
    double r;
  };
  std::vector<Cycle> cycles;
  cycles.reserve(static_cast<std::size_t>(cfg.horizon / std::max<std::uint64_t>(max_len, 1) + 1));
  std::uint64_t now = 0;  // S_{k-1}
  std::uint64_t prev_z = 0;
  while (true) {
    std::uint64_t y = 0;
    std::uint64_t z = 0;
    while (true) {
      const std::size_t x = sample(sym_rng);
      const double th = scheme.theta(static_cast<Eigen::Index>(x));
      const bool send = th >= 1.0 || (th > 0.0 && uniform01(coin_rng) < th);
      const std::uint64_t slots = slots_for(send ? len[x] : skip_len);
      y += slots;
      if (send) {
        z = slots;
        break;
      }
    }
    if (now + y > cfg.horizon) break;
    // reward over (S_{k-1}, S_k]: the age climbs from Z_{k-1} + 1 for Y - 1
    // slots, then drops to Z_k at the reception
    const double yd = static_cast<double>(y);
    const double r = 0.5 * (yd - 1.0) * yd + (yd - 1.0) * static_cast<double>(prev_z) + static_cast<double>(z);
    cycles.push_back({y, z, r});
    now += y;
    prev_z = z;
  }
  if (cycles.size() < 11) throw std::invalid_argument("simulate_update: horizon too short, fewer than 10 cycles completed");

  SimReport rep;
  rep.kind = SimReport::Kind::age;
  const std::size_t used = cycles.size() - 1;  // first cycle is warm-up
  const std::size_t nb = std::min(kBatches, used);
  rep.batches.assign(nb, Batch{});
  LagCorrelation corr_y(1), corr_r(2);
  for (std::size_t k = 1; k < cycles.size(); ++k) {
    const auto& c = cycles[k];
    auto& b = rep.batches[std::min((k - 1) * nb / used, nb - 1)];
    const double yd = static_cast<double>(c.y);
    b.count += 1.0;
    b.sum_y += yd;
    b.sum_y2 += yd * yd;
    b.sum_z += static_cast<double>(c.z);
    b.sum_r += c.r;
    corr_y.push(yd);
    corr_r.push(c.r);
    if (cfg.record_trace) rep.trace.push_back({k + 1, c.y, c.z, c.r});
  }
  rep.lag1_corr_y = corr_y.value();
  rep.lag2_corr_r = corr_r.value();
  finalize(rep);
  return rep;
}

SimReport simulate_update(const Pmf& p, const CodeBook& book, const SimConfig& cfg) {
  if (book.size() != p.size()) throw std::invalid_argument("simulate_update: codebook does not cover the alphabet");
  return simulate_update(p, book.lengths(), cfg);
}

SimReport merge(const SimReport& a, const SimReport& b) {
  if (a.kind != b.kind) throw std::invalid_argument("merge: reports of different kinds");
  SimReport out;
  out.kind = a.kind;
  out.batches = a.batches;
  out.batches.insert(out.batches.end(), b.batches.begin(), b.batches.end());
  const double wa = static_cast<double>(a.cycles);
  const double wb = static_cast<double>(b.cycles);
  if (wa + wb > 0.0) {
    out.lag1_corr_y = (wa * a.lag1_corr_y + wb * b.lag1_corr_y) / (wa + wb);
    out.lag2_corr_r = (wa * a.lag2_corr_r + wb * b.lag2_corr_r) / (wa + wb);
  }
  out.warning = a.warning.empty() ? b.warning : a.warning;
  finalize(out);
  return out;
}

SimReport replicate_update(const Pmf& p, const LengthAssignment& lengths, const SimConfig& cfg, int replications,
                           int jobs) {
  if (replications < 1) throw std::invalid_argument("replicate_update: replications must be positive");
  jobs = std::max(jobs, 1);
  std::vector<SimReport> reports(static_cast<std::size_t>(replications));
  for (int start = 0; start < replications; start += jobs) {
    std::vector<std::future<SimReport>> pending;
    for (int k = start; k < std::min(start + jobs, replications); ++k) {
      SimConfig c = cfg;
      c.seed = splitmix64(cfg.seed + static_cast<std::uint64_t>(k));
      c.record_trace = false;
      pending.push_back(std::async(std::launch::async, [&p, &lengths, c] { return simulate_update(p, lengths, c); }));
    }
    for (std::size_t k = 0; k < pending.size(); ++k) reports[static_cast<std::size_t>(start) + k] = pending[k].get();
  }
  SimReport out = reports.front();
  for (std::size_t k = 1; k < reports.size(); ++k) out = merge(out, reports[k]);
  return out;
}

double RenewalResiduals::max_abs() const {
  return std::max({std::abs(y), std::abs(y_sq), std::abs(z), std::abs(r)});
}

RenewalResiduals renewal_identities(const SimReport& report, const Pmf& p, const LengthAssignment& lengths,
                                    const std::optional<RandomizedScheme>& scheme, double erasure) {
  const RandomizedScheme s = scheme ? *scheme : RandomizedScheme::always_transmit(p.size());
  const double tp = transmit_probability(p, s);
  const double keep = 1.0 - erasure;
  auto mean_slots = [&](double l) { return l / keep; };
  auto second_slots = [&](double l) { return (erasure * l + l * l) / (keep * keep); };

  double sent1 = 0.0, sent2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = p[i] * s.theta(static_cast<Eigen::Index>(i));
    sent1 += w * mean_slots(lengths[i]);
    sent2 += w * second_slots(lengths[i]);
  }
  const double skip1 = (1.0 - tp) * mean_slots(s.skip_length);
  const double t1 = sent1 + skip1;
  const double t2 = sent2 + (1.0 - tp) * second_slots(s.skip_length);

  RenewalResiduals res;
  res.expected_y = t1 / tp;
  res.expected_z = sent1 / tp;
  res.expected_y_sq = t2 / tp + 2.0 * res.expected_y * skip1 / tp;
  res.expected_r = 0.5 * res.expected_y_sq + res.expected_y * (res.expected_z - 0.5);
  auto scaled = [](double emp, double expct, double se) {
    if (se > 0.0) return (emp - expct) / se;
    return std::abs(emp - expct) <= 1e-9 * std::max(1.0, std::abs(expct)) ? 0.0 : std::copysign(1e300, emp - expct);
  };
  res.y = scaled(report.mean_y, res.expected_y, report.se_y);
  res.y_sq = scaled(report.mean_y_sq, res.expected_y_sq, report.se_y_sq);
  res.z = scaled(report.mean_z, res.expected_z, report.se_z);
  res.r = scaled(report.mean_r, res.expected_r, report.se_r);
  return res;
}

SimReport simulate_mg1(const Pmf& p, const LengthAssignment& lengths, double lambda, std::uint64_t n_arrivals,
                       std::uint64_t seed) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("simulate_mg1: lambda must be positive");
  if (n_arrivals < 10'000) throw std::invalid_argument("simulate_mg1: need at least 10^4 arrivals");
  if (lengths.size() != p.size()) throw std::invalid_argument("simulate_mg1: alphabet size mismatch");

  SimReport rep;
  rep.kind = SimReport::Kind::queue;
  const double load = lambda * p.probs().dot(lengths.values());
  if (load >= 1.0) rep.warning = "unstable queue: lambda E[L] = " + std::to_string(load) + " >= 1";

  auto sym_rng = make_stream(seed, Stream::symbols);
  auto arr_rng = make_stream(seed, Stream::arrivals);
  const SymbolSampler sample(p);
  std::exponential_distribution<double> gap(lambda);

  const std::uint64_t warmup = n_arrivals / 100;
  const std::uint64_t used = n_arrivals - warmup;
  const std::size_t nb = kBatches;
  rep.batches.assign(nb, Batch{});
  double wait = 0.0;  // waiting time of the current customer (Lindley)
  double prev_service = 0.0;
  for (std::uint64_t n = 0; n < n_arrivals; ++n) {
    const double inter = gap(arr_rng);
    if (n > 0) wait = std::max(0.0, wait + prev_service - inter);
    const double service = lengths[sample(sym_rng)];
    prev_service = service;
    if (n < warmup) continue;
    auto& b = rep.batches[std::min(static_cast<std::size_t>((n - warmup) * nb / used), nb - 1)];
    b.count += 1.0;
    b.sum_r += wait + service;
  }
  finalize(rep);
  return rep;
}

std::string sim_report_to_json(const SimReport& r) {
  nlohmann::ordered_json j;
  if (r.kind == SimReport::Kind::age) {
    j["empirical_average_age"] = r.empirical_mean;
    j["standard_error"] = r.standard_error;
    j["cycles"] = r.cycles;
    j["renewal"] = {{"mean_Y", r.mean_y},   {"mean_Y_sq", r.mean_y_sq},   {"mean_Z", r.mean_z},
                    {"mean_R", r.mean_r},   {"se_Y", r.se_y},             {"se_Y_sq", r.se_y_sq},
                    {"se_Z", r.se_z},       {"se_R", r.se_r},             {"lag1_corr_Y", r.lag1_corr_y},
                    {"lag2_corr_R", r.lag2_corr_r}};
  } else {
    j["empirical_mean_wait"] = r.empirical_mean;
    j["standard_error"] = r.standard_error;
    j["arrivals"] = r.cycles;
  }
  if (!r.warning.empty()) j["warning"] = r.warning;
  return j.dump(2);
}

std::string trace_to_csv(const SimReport& r) {
  std::ostringstream os;
  os << "cycle,Y,Z,R\n";
  for (const auto& c : r.trace) os << c.cycle << ',' << c.y << ',' << c.z << ',' << c.r << '\n';
  return os.str();
}

}  // namespace agecodec
