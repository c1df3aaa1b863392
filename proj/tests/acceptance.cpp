// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "agecodec/age.hpp"
#include "agecodec/codec.hpp"
#include "agecodec/pmf.hpp"
#include "agecodec/sim.hpp"
#include "agecodec/solver.hpp"
#include "agecodec/varform.hpp"
#include "fixtures.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace agecodec;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome uniform_exact() {
  Outcome o;
  double worst_len = 0, worst_age = 0, worst_time = 0;
  for (int k = 2; k <= 10; ++k) {
    const Pmf p = fixtures::uniform(std::size_t{1} << k);
    const auto t0 = Clock::now();
    const OptResult r = solve_age(p);
    const double t = seconds_since(t0);
    const double len_err = (r.lengths.values().array() - k).abs().maxCoeff();
    const double age_err = std::abs(r.average_age_or_delay() - (1.5 * k - 0.5));
    const double bound_err = std::abs(age_bounds(p).lower - r.average_age_or_delay());
    worst_len = std::max(worst_len, len_err);
    worst_age = std::max({worst_age, age_err, bound_err});
    worst_time = std::max(worst_time, t);
    if (len_err > 1e-8 || age_err > 1e-8 || bound_err > 1e-8 || t >= 1.0) o.pass = false;
  }
  o.detail = fmt("k=2..10, max |l-k|=%.1e, max age error=%.1e, slowest %.3fs", worst_len, worst_age, worst_time);
  return o;
}

// Random Kraft-feasible integer lengths, longest codeword <= 16.
LengthAssignment random_code(std::mt19937_64& rng, std::size_t n) {
  for (;;) {
    const Vector q = fixtures::random_simplex(rng, n);
    const Vector l = (-q.array().log2()).ceil().max(1.0).matrix();
    if (l.maxCoeff() <= 16) return LengthAssignment::integer(l);
  }
}

Outcome formula_vs_simulation() {
  Outcome o;
  std::mt19937_64 rng(2024);
  const auto t0 = Clock::now();
  double worst_rel = 0, worst_sigma = 0;
  for (int i = 0; i < 20; ++i) {
    const Pmf p = fixtures::random_pmf(rng, 64);
    const LengthAssignment l = random_code(rng, p.size());
    SimConfig cfg;
    cfg.horizon = 1'000'000;
    cfg.seed = static_cast<std::uint64_t>(i);
    const SimReport r = simulate_update(p, l, cfg);
    const double expected = average_age(p, l);
    const double err = std::abs(r.empirical_mean - expected);
    worst_rel = std::max(worst_rel, err / expected);
    worst_sigma = std::max(worst_sigma, err / r.standard_error);
    if (err > std::max(0.01 * expected, 3.0 * r.standard_error)) o.pass = false;
  }
  const double t = seconds_since(t0);
  if (t >= 30.0) o.pass = false;
  o.detail = fmt("20 pairs, worst relative error %.2e, worst %.2f SE, %.1fs", worst_rel, worst_sigma, t);
  return o;
}

Outcome spike_separation() {
  Outcome o;
  const Pmf p = fixtures::spike_example(16);
  const double own = average_age(p, shannon_lengths(p, false));
  const LengthAssignment alt = fixtures::spike_prime_lengths(16);
  const double other = average_age(p, alt);
  const OptResult r = solve_age(p);
  const double alt_cost = age_cost(p, alt);
  o.pass = own - other > 2.0 && r.cost <= alt_cost + 1e-6;
  o.detail = fmt("age Shannon(P)=%.4f, Shannon(P')=%.4f, gap=%.4f; solver cost %.6f <= %.6f", own, other, own - other,
                 r.cost, alt_cost);
  return o;
}

Outcome randomized_example() {
  Outcome o;
  const Pmf p = fixtures::randomized_example();
  const LengthAssignment two = LengthAssignment::integer(Vector::Constant(64, 2.0));
  const RandomizedScheme s = RandomizedScheme::with_default_skip(fixtures::randomized_example_theta(), two);
  const double analytic = average_age_randomized(p, two, s);
  SimConfig cfg;
  cfg.horizon = 1'000'000;
  cfg.scheme = s;
  const SimReport r = simulate_update(p, two, cfg);
  const double h = entropy(p);
  const double lower = age_bounds(p).lower;
  o.pass = std::abs(analytic - 3.1667) < 5e-5 && std::abs(r.empirical_mean - analytic) <= 3.0 * r.standard_error &&
           std::abs(h - 3.483) < 5e-4 && std::abs(lower - 4.724) < 5e-4;
  o.detail = fmt("analytic %.4f, simulated %.4f +- %.4f, H=%.4f, lower bound %.4f", analytic, r.empirical_mean,
                 r.standard_error, h, lower);
  return o;
}

Outcome zipf_sweep() {
  Outcome o;
  const auto t0 = Clock::now();
  double min_gain_s2 = 1e9, worst_int_excess = -1e9, worst_order = -1e9;
  for (int i = 0; i <= 10; ++i) {
    const double s = 0.5 * i;
    const Pmf p = zipf(s, 256);
    const OptResult r = solve_age(p);
    const double prop_real = r.average_age_or_delay();
    const double sh_real = average_age(p, shannon_lengths(p, false));
    const double prop_int = average_age(p, bump_zero_lengths(round_up(r.lengths)));
    const double sh_int = average_age(p, bump_zero_lengths(shannon_lengths(p, true)));
    worst_order = std::max(worst_order, prop_real - sh_real);
    worst_int_excess = std::max(worst_int_excess, prop_int - sh_int);
    if (prop_real > sh_real + 1e-12) o.pass = false;
    if (prop_int > sh_int + 2.0) o.pass = false;
    if (s >= 2.0) {
      min_gain_s2 = std::min(min_gain_s2, sh_real - prop_real);
      if (sh_real - prop_real <= 0.05) o.pass = false;
    }
  }
  const double t = seconds_since(t0);
  if (t >= 300.0) o.pass = false;
  o.detail = fmt("s=0..5: max(proposed-Shannon) real %.2e, smallest gain for s>=2 %.3f, max int excess %.3f, %.2fs",
                 worst_order, min_gain_s2, worst_int_excess, t);
  return o;
}

Outcome variational_formula() {
  Outcome o;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> val(0.0, 20.0);
  const double orders[] = {1.5, 2.0, 3.0};
  double min_gap = 1e9, max_gap_at_star = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng() % 31;
    const Pmf p(fixtures::random_simplex(rng, n));
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = val(rng);
    const double order = orders[t % 3];
    const double norm = pnorm(p, v, order);
    min_gap = std::min(min_gap, norm - pnorm_variational_value(p, v, fixtures::random_simplex(rng, n), order));
    max_gap_at_star =
        std::max(max_gap_at_star, std::abs(norm - pnorm_variational_value(p, v, q_star(p, v, order), order)));
  }
  o.pass = min_gap >= -1e-12 && max_gap_at_star <= 1e-10;
  o.detail = fmt("1000 instances, min gap %.2e, max gap at Q* %.2e", min_gap, max_gap_at_star);
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> margin(0.01, 6.0);
  const auto t0 = Clock::now();
  double worst_age = 0, worst_delay = 0;
  int delay_cases = 0;
  for (int i = 0; i < 200; ++i) {
    const Pmf p = fixtures::random_pmf(rng, 64);
    worst_age = std::max(worst_age, std::abs(solve_age(p).cost - direct_oracle(p, CostMode::age).cost));
    const double lambda = 1.0 / (entropy(p) + delay_condition_slack() + margin(rng));
    if (!delay_condition_holds(p, lambda)) continue;
    ++delay_cases;
    worst_delay = std::max(worst_delay,
                           std::abs(solve_delay(p, lambda).cost - direct_oracle(p, CostMode::delay, lambda).cost));
  }
  const double t = seconds_since(t0);
  o.pass = worst_age <= 1e-6 && worst_delay <= 1e-6 && delay_cases == 200 && t < 600.0;
  o.detail = fmt("200 pmfs, max |solver-oracle| age %.2e, delay %.2e (%d cases), %.1fs", worst_age, worst_delay,
                 delay_cases, t);
  return o;
}

Outcome delay_pipeline() {
  Outcome o;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> margin(0.001, 8.0);
  const double slack = delay_condition_slack();
  double worst_kl = -1e9, worst_el = -1e9;
  for (int i = 0; i < 500; ++i) {
    const Pmf p = fixtures::random_pmf(rng, 64);
    const double lambda = 1.0 / (entropy(p) + slack + margin(rng));
    const OptResult r = solve_delay(p, lambda);
    worst_kl = std::max(worst_kl, kl_divergence(p, Pmf(r.p_star)) - slack);
    worst_el = std::max(worst_el, moments(p, r.lengths).first - entropy(p) - slack);
  }
  const bool kl_ok = worst_kl <= 1e-9;
  const bool el_ok = worst_el <= 1e-9;

  // queue simulation of rounded delay-optimal codes, loads up to 0.9
  bool sim_ok = true;
  double worst_rel = 0, worst_rho = 0;
  const Pmf pmfs[] = {zipf(1, 64), head_tail(0.5, 256), zipf(2, 32)};
  const double loads[] = {0.3, 0.6, 0.9};
  std::uint64_t seed = 0;
  for (const Pmf& p : pmfs) {
    const double lambda0 = 1.0 / (entropy(p) + slack + 2.0);
    const OptResult r = solve_delay(p, lambda0);
    const LengthAssignment code = bump_zero_lengths(round_up(r.lengths));
    const double mean = moments(p, code).first;
    for (double rho : loads) {
      const double lambda = rho / mean;
      const double d = average_delay(p, code, lambda);
      const SimReport s = simulate_mg1(p, code, lambda, 1'000'000, seed++);
      const double err = std::abs(s.empirical_mean - d);
      worst_rel = std::max(worst_rel, err / d);
      worst_rho = std::max(worst_rho, rho);
      if (err > std::max(0.02 * d, 3.0 * s.standard_error)) sim_ok = false;
    }
  }
  o.pass = kl_ok && el_ok && sim_ok;
  o.detail = fmt("(a) max KL-bound %.2e (b) max E[L]-bound %.2e over 500; (c) queue worst relative error %.2e, "
                 "rho<=%.1f",
                 worst_kl, worst_el, worst_rel, worst_rho);
  return o;
}

Outcome rounding_bound() {
  Outcome o;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> slack(0.0, 2.0);
  int checked = 0, violations = 0;
  double worst = -1e9;
  while (checked < 500) {
    const Pmf p = fixtures::random_pmf(rng, 64);
    Vector l = -fixtures::random_simplex(rng, p.size()).array().log2();
    if (rng() % 2) {
      for (Eigen::Index i = 0; i < l.size(); ++i) l(i) += slack(rng);
    }
    const LengthAssignment real = LengthAssignment::real(l);
    if (moments(p, real).first < 1.0 || !real.kraft_feasible()) continue;
    ++checked;
    const double excess = age_cost(p, round_up(real)) - age_cost(p, real);
    worst = std::max(worst, excess);
    if (excess > 2.0) ++violations;
  }
  o.pass = violations == 0;
  o.detail = fmt("500 assignments, %d violations, largest increase %.3f", violations, worst);
  return o;
}

Outcome concavity_symmetry() {
  Outcome o;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_concavity = 0, worst_symmetry = 0;
  for (int t = 0; t < 1000; ++t) {
    const Pmf p = fixtures::random_pmf(rng, 24);
    const Vector q1 = fixtures::random_simplex(rng, p.size());
    const Vector q2 = fixtures::random_simplex(rng, p.size());
    const double a = unit(rng);
    double z = 1.4 * unit(rng);
    while (!g_feasible(g_weights(p, z, q1, CostMode::age)) || !g_feasible(g_weights(p, z, q2, CostMode::age))) z *= 0.8;
    const double in_q = a * age_objective(p, z, q1) + (1 - a) * age_objective(p, z, q2) -
                        age_objective(p, z, a * q1 + (1 - a) * q2);
    double z1 = 1.5 * unit(rng), z2 = 1.5 * unit(rng);
    while (!g_feasible(g_weights(p, z1, q1, CostMode::age))) z1 *= 0.8;
    while (!g_feasible(g_weights(p, z2, q1, CostMode::age))) z2 *= 0.8;
    const double in_z = a * age_objective(p, z1, q1) + (1 - a) * age_objective(p, z2, q1) -
                        age_objective(p, a * z1 + (1 - a) * z2, q1);
    worst_concavity = std::max({worst_concavity, in_q, in_z});
  }
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> w;
    const std::size_t levels = 2 + rng() % 3;
    for (std::size_t k = 0; k < levels; ++k) {
      const double level = 0.05 + unit(rng);
      for (std::size_t r = 0, reps = 2 + rng() % 6; r < reps; ++r) w.push_back(level);
    }
    const Pmf p = new_pmf(w);
    const Vector q = fixtures::random_simplex(rng, p.size());
    Vector permuted = q;
    for (const auto& g : group_equal_probs(p, 0.0).groups) {
      std::vector<std::size_t> shuffled = g;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      for (std::size_t i = 0; i < g.size(); ++i) permuted(Eigen::Index(shuffled[i])) = q(Eigen::Index(g[i]));
    }
    double z = 1.2 * unit(rng);
    while (!g_feasible(g_weights(p, z, q, CostMode::age))) z *= 0.8;
    worst_symmetry = std::max(worst_symmetry, std::abs(age_objective(p, z, q) - age_objective(p, z, permuted)));
  }
  o.pass = worst_concavity <= 1e-9 && worst_symmetry <= 1e-9;
  o.detail = fmt("1000 probes each, worst concavity violation %.2e, worst permutation change %.2e", worst_concavity,
                 worst_symmetry);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"uniform pmfs: exact fixed-length optimum", uniform_exact},
      {"average-age formula vs simulation", formula_vs_simulation},
      {"spiked pmf separation", spike_separation},
      {"randomized scheme point check", randomized_example},
      {"Zipf(s,256) sweep ordering", zipf_sweep},
      {"variational p-norm formula", variational_formula},
      {"solver vs direct oracle", oracle_equivalence},
      {"delay pipeline bounds and queue simulation", delay_pipeline},
      {"rounding costs at most 2", rounding_bound},
      {"objective concavity and symmetry", concavity_symmetry},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
