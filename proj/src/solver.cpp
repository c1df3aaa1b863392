#include "agecodec/solver.hpp"

#include "agecodec/age.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include <json.hpp>

namespace agecodec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLn2 = std::log(2.0);

// The problem restricted to vectors that are constant on each group of
// equal-probability symbols. Entry i of every reduced vector is the
// per-symbol value shared by the `count(i)` symbols of group i.
struct Reduced {
  Partition part;
  Vector prob;
  Vector count;

  Reduced(const Pmf& p, double tol) : part(group_equal_probs(p, tol)) {
    const auto m = static_cast<Eigen::Index>(part.count());
    prob.resize(m);
    count.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      prob(i) = part.symbol_prob[static_cast<std::size_t>(i)];
      count(i) = static_cast<double>(part.groups[static_cast<std::size_t>(i)].size());
    }
  }

  Eigen::Index groups() const { return prob.size(); }
  double total(const Vector& v) const { return count.dot(v); }
  double expect(const Vector& v) const { return (count.array() * prob.array() * v.array()).sum(); }

  Vector expand(const Vector& v) const {
    Vector out(static_cast<Eigen::Index>(part.group_of.size()));
    for (std::size_t x = 0; x < part.group_of.size(); ++x) out(static_cast<Eigen::Index>(x)) = v(static_cast<Eigen::Index>(part.group_of[x]));
    return out;
  }
};

struct Problem {
  CostMode mode;
  double threshold;  // delay mode only

  double primal(const Reduced& r, const Vector& len) const {
    const double m1 = r.expect(len);
    const double m2 = std::max(r.expect(len.array().square().matrix()), m1 * m1);
    if (mode == CostMode::age) return m1 > 0.0 ? age_cost_from_moments(m1, m2) : kInf;
    return delay_from_moments(m1, m2, threshold);
  }

  // Maximizer of f(l, z) over z >= 0 for fixed lengths.
  double best_z(const Reduced& r, const Vector& len) const {
    const double m1 = r.expect(len);
    const double norm2 = std::sqrt(r.expect(len.array().square().matrix()));
    return mode == CostMode::age ? norm2 / m1 : norm2 / (threshold - m1);
  }

  Vector weights(const Reduced& r, double z, const Vector& q) const { return g_weights(r.prob, z, q, mode); }

  // Maxmin objective on reduced coordinates; -inf outside the feasible set.
  double objective(const Reduced& r, double z, const Vector& q) const {
    const Vector g = weights(r, z, q);
    if (g.minCoeff() < -kFeasibilitySlack) return -kInf;
    const double total = r.total(g.cwiseMax(0.0));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (g(i) > 0.0) acc += r.count(i) * g(i) * std::log2(total / g(i));
    }
    if (mode == CostMode::delay) acc -= 0.5 * z * z * threshold;
    return acc;
  }
};

Vector normalized(const Reduced& r, Vector v) {
  v /= r.total(v);
  return v;
}

// Best response in Q for fixed lengths: Q proportional to P l^2.
Vector best_q(const Reduced& r, const Vector& len) {
  return normalized(r, (r.prob.array() * len.array().square()).matrix());
}

struct InnerResult {
  Vector q;
  double value = -kInf;
  int iterations = 0;
};

// Concave maximization over Q for fixed z: damped best-response steps
// Q <- Q + t (Q+ - Q), where Q+ is proportional to P l_{z,Q}^2. The direction
// is an ascent direction, and halving t keeps the iterate feasible.
InnerResult maximize_q(const Reduced& r, const Problem& prob, double z, Vector q, const SolverOptions& opts) {
  InnerResult res;
  double value = prob.objective(r, z, q);
  if (!std::isfinite(value)) {
    q = r.prob;
    value = prob.objective(r, z, q);
  }
  if (z == 0.0 || !std::isfinite(value)) return {std::move(q), value, 0};

  int it = 0;
  for (; it < opts.inner_max_iters; ++it) {
    const Vector g = prob.weights(r, z, q);
    if (g.minCoeff() <= 0.0) break;
    const Vector len = (std::log2(r.total(g)) - g.array().log2()).matrix();
    const Vector dir = best_q(r, len) - q;
    if (dir.cwiseAbs().maxCoeff() < 1e-15) break;
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      const Vector trial = q + t * dir;
      const double v = prob.objective(r, z, trial);
      if (v > value) {
        const double gain = v - value;
        q = trial;
        value = v;
        moved = gain > opts.inner_tol * 1e-3 * (1.0 + std::abs(value));
        break;
      }
    }
    if (!moved) break;
  }
  return {std::move(q), value, it};
}

struct MaxminResult {
  double z = 0.0;
  Vector q;
  double value = -kInf;
  int iterations = 0;
};

MaxminResult maxmin_path(const Reduced& r, const Problem& prob, double z_max, const SolverOptions& opts) {
  const int m = std::max(opts.z_grid_points, 3);
  std::vector<double> zs(static_cast<std::size_t>(m));
  std::vector<InnerResult> inner(static_cast<std::size_t>(m));
  int iterations = 0;
  Vector warm = r.prob;
  std::size_t best = 0;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    zs[k] = z_max * static_cast<double>(k) / static_cast<double>(m - 1);
    inner[k] = maximize_q(r, prob, zs[k], warm, opts);
    iterations += inner[k].iterations;
    if (std::isfinite(inner[k].value)) warm = inner[k].q;
    if (inner[k].value > inner[best].value) best = k;
  }

  // golden-section refinement inside the bracket around the best grid point
  double lo = zs[best == 0 ? 0 : best - 1];
  double hi = zs[std::min(best + 1, zs.size() - 1)];
  MaxminResult out{zs[best], inner[best].q, inner[best].value, iterations};
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  Vector warm_q = inner[best].q;
  auto eval = [&](double z) {
    auto res = maximize_q(r, prob, z, warm_q, opts);
    out.iterations += res.iterations;
    if (res.value > out.value || (res.value == out.value && z < out.z)) {
      out.z = z;
      out.q = res.q;
      out.value = res.value;
    }
    return res.value;
  };
  double a = hi - invphi * (hi - lo);
  double b = lo + invphi * (hi - lo);
  double fa = eval(a);
  double fb = eval(b);
  while (hi - lo > opts.z_tol) {
    if (fa >= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - invphi * (hi - lo);
      fa = eval(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + invphi * (hi - lo);
      fb = eval(b);
    }
  }
  // final polish of Q at the chosen z
  auto polished = maximize_q(r, prob, out.z, out.q, opts);
  out.iterations += polished.iterations;
  if (polished.value >= out.value) {
    out.q = polished.q;
    out.value = polished.value;
  }
  return out;
}

}  // namespace

namespace {

struct AlternationResult {
  Vector w;  // tilted per-symbol probabilities, lengths = -log2 w
  double cost = kInf;
  int iterations = 0;
  std::vector<double> history;
};

// Alternation: from the current lengths take the closed-form maximizers
// z(l), Q(l) = P l^2 / E[L^2]; their g-weights are the gradient of the primal
// cost, and the Shannon code of g/G is the next target. A backtracking step
// toward it keeps the primal cost non-increasing.
AlternationResult alternation_path(const Reduced& r, const Problem& prob, Vector w, const SolverOptions& opts) {
  AlternationResult res;
  Vector len = -w.array().log2();
  double cost = prob.primal(r, len);
  res.history.push_back(cost);
  int it = 0;
  for (; it < opts.inner_max_iters; ++it) {
    const double z = prob.best_z(r, len);
    const Vector q = best_q(r, len);
    const Vector g = prob.weights(r, z, q).cwiseMax(0.0);
    const Vector target = normalized(r, g);
    const Vector dir = target - w;
    if ((target.array() / w.array()).log2().abs().maxCoeff() < 1e-10) break;
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      const Vector trial = w + t * dir;
      if (trial.minCoeff() <= 0.0) continue;
      const Vector trial_len = -trial.array().log2();
      const double c = prob.primal(r, trial_len);
      if (c < cost) {
        w = trial;
        len = trial_len;
        cost = c;
        res.history.push_back(cost);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  res.w = std::move(w);
  res.cost = cost;
  res.iterations = it;
  return res;
}

Vector random_start(const Reduced& r, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Vector u(r.groups());
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = expo(rng) + 1e-3;
  return normalized(r, u);
}

double log2_one_plus_inv_sqrt2() { return std::log2(1.0 + 1.0 / std::sqrt(2.0)); }

// Fills the result fields shared by both design paths from a tilted pmf.
OptResult assemble(const Pmf& p, const Reduced& r, const Problem& prob, double z, const Vector& q_reduced,
                   const Vector& w_reduced, const std::string& path) {
  OptResult out;
  out.mode = prob.mode;
  out.threshold = prob.threshold;
  out.z_star = z;
  out.q_star = r.expand(q_reduced);
  out.p_star = r.expand(w_reduced);
  out.lengths = LengthAssignment::real((-out.p_star.array().log2()).matrix().cwiseMax(0.0));
  out.cost = prob.mode == CostMode::age ? primal_age_cost(p, out.lengths.values())
                                        : primal_delay_cost(p, out.lengths.values(), prob.threshold);
  out.dual_value = prob.objective(r, z, q_reduced);
  out.duality_gap = std::abs(out.cost - out.dual_value);
  out.path = path;
  return out;
}

OptResult solve(const Pmf& p, const Problem& prob, double z_max, const SolverOptions& opts) {
  opts.validate();
  const Reduced r(p, opts.group_tol);

  const MaxminResult mm = maxmin_path(r, prob, z_max, opts);
  OptResult best;
  bool have = false;
  int iterations = mm.iterations;
  if (std::isfinite(mm.value)) {
    const Vector g = prob.weights(r, mm.z, mm.q).cwiseMax(0.0);
    best = assemble(p, r, prob, mm.z, mm.q, normalized(r, g), "maxmin");
    have = std::isfinite(best.cost);
  }

  std::mt19937_64 rng(opts.seed);
  for (int s = 0; s < opts.multistarts; ++s) {
    Vector w0 = s == 0 ? r.prob : random_start(r, rng);
    if (prob.mode == CostMode::delay) {
      // pull the start toward P until the queue is stable
      for (int k = 0; k < 60 && !std::isfinite(prob.primal(r, -w0.array().log2())); ++k) w0 = 0.5 * (w0 + r.prob);
    }
    const AlternationResult alt = alternation_path(r, prob, w0, opts);
    iterations += alt.iterations;
    if (!std::isfinite(alt.cost)) continue;
    const Vector len = -alt.w.array().log2();
    const double z = prob.best_z(r, len);
    const Vector q = best_q(r, len);
    // report P* as g/G at the best response; it differs from alt.w only at the alternation tolerance
    Vector w = normalized(r, prob.weights(r, z, q).cwiseMax(0.0));
    if (!(w.minCoeff() > 0.0)) w = alt.w;
    OptResult cand = assemble(p, r, prob, z, q, w, "alternation");
    const bool better = !have || cand.cost < best.cost - 1e-13 ||
                        (std::abs(cand.cost - best.cost) <= 1e-13 && cand.z_star < best.z_star);
    if (better) {
      best = std::move(cand);
      have = true;
    }
  }
  if (!have) throw std::runtime_error("solver: no finite-cost solution found");
  best.iterations = iterations;
  best.converged = best.duality_gap <= 1e-6;
  if (!best.converged) best.diagnostics.push_back("duality gap above 1e-6");
  return best;
}

}  // namespace

void SolverOptions::validate() const {
  if (z_grid_points < 3) throw std::invalid_argument("solver options: z_grid_points must be >= 3");
  if (inner_max_iters < 1) throw std::invalid_argument("solver options: inner_max_iters must be positive");
  if (!(inner_tol > 0.0 && inner_tol <= 1e-3)) throw std::invalid_argument("solver options: inner_tol must lie in (0, 1e-3]");
  if (multistarts < 1) throw std::invalid_argument("solver options: multistarts must be positive");
  if (!(z_tol > 0.0)) throw std::invalid_argument("solver options: z_tol must be positive");
  if (!(group_tol >= 0.0)) throw std::invalid_argument("solver options: group_tol must be >= 0");
}

double delay_condition_slack() { return log2_one_plus_inv_sqrt2(); }

std::vector<double> alternation_history(const Pmf& p, CostMode mode, double threshold, const SolverOptions& opts) {
  opts.validate();
  const Reduced r(p, opts.group_tol);
  return alternation_path(r, Problem{mode, threshold}, r.prob, opts).history;
}

bool delay_condition_holds(const Pmf& p, double lambda) {
  return entropy(p) + delay_condition_slack() < 1.0 / lambda;
}

double z_bound(const Pmf& p) {
  return std::log2(static_cast<double>(p.size())) / entropy(p) * std::sqrt(1.0 / p.min());
}

double primal_age_cost(const Pmf& p, const Vector& lengths) {
  const double m1 = p.probs().dot(lengths);
  const double m2 = std::max(p.probs().dot(lengths.array().square().matrix()), m1 * m1);
  return m1 > 0.0 ? age_cost_from_moments(m1, m2) : kInf;
}

double primal_delay_cost(const Pmf& p, const Vector& lengths, double threshold) {
  const double m1 = p.probs().dot(lengths);
  const double m2 = std::max(p.probs().dot(lengths.array().square().matrix()), m1 * m1);
  return delay_from_moments(m1, m2, threshold);
}

OptResult solve_age(const Pmf& p, const SolverOptions& opts) {
  const double h = entropy(p);
  // at the optimum cost = E[L](1 + z^2/2) >= H(1 + z^2/2), and the cost is at
  // most that of the real Shannon code for P
  const double reference = primal_age_cost(p, shannon_lengths(p, false).values());
  const double z_cost = std::sqrt(2.0 * std::max(reference / h - 1.0, 0.0));
  // g-weights stay nonnegative for some Q only while z <= 1 + sqrt 3
  const double z_max = std::min({z_bound(p), z_cost * (1.0 + 1e-9) + 1e-12, 1.0 + std::sqrt(3.0)});
  return solve(p, Problem{CostMode::age, 0.0}, z_max, opts);
}

OptResult solve_delay(const Pmf& p, double lambda, const SolverOptions& opts, bool allow_direct_fallback) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("solve_delay: lambda must be positive");
  const double threshold = 1.0 / lambda;
  const double h = entropy(p);
  if (!delay_condition_holds(p, lambda)) {
    if (!allow_direct_fallback || !(h < threshold)) {
      throw DelayInfeasible("solve_delay: feasibility condition H(P) + log2(1 + 1/sqrt(2)) < 1/lambda fails (H(P) = " +
                            std::to_string(h) + ", 1/lambda = " + std::to_string(threshold) +
                            "); use the direct oracle for this arrival rate");
    }
    const DirectResult d = direct_oracle(p, CostMode::delay, lambda, opts);
    OptResult out;
    out.mode = CostMode::delay;
    out.threshold = threshold;
    out.lengths = d.lengths;
    out.p_star = (-d.lengths.values().array() * kLn2).exp().matrix();
    out.p_star /= out.p_star.sum();
    out.cost = d.cost;
    const double m1 = p.probs().dot(d.lengths.values());
    const double m2 = p.probs().dot(d.lengths.values().array().square().matrix());
    out.z_star = std::sqrt(m2) / (threshold - m1);
    out.q_star = q_star(p, d.lengths.values(), 2.0);
    out.dual_value = delay_objective(p, out.z_star, out.q_star, threshold);
    out.duality_gap = std::abs(out.cost - out.dual_value);
    out.iterations = d.iterations;
    out.converged = true;
    out.delay_condition_met = false;
    out.path = "direct";
    out.diagnostics.push_back("delay condition not met: feasibility condition fails, direct minimizer used");
    return out;
  }
  const double slack_len = h + delay_condition_slack();
  const double reference = primal_delay_cost(p, shannon_lengths(p, false).values(), threshold);
  const double k_bound = std::sqrt(1.0 / p.min()) * slack_len / (threshold - slack_len);
  const double z_cost = std::sqrt(2.0 * std::max(reference - h, 0.0) / (threshold - slack_len));
  const double z_max = std::min(k_bound, z_cost * (1.0 + 1e-9) + 1e-12);
  return solve(p, Problem{CostMode::delay, threshold}, z_max, opts);
}

// ---------------------------------------------------------------------------
// Direct minimization of the primal cost. Deliberately shares nothing with
// the maxmin machinery above: it works on the full alphabet and evaluates
// the cost and its gradient straight from the moment formulas.

namespace {

struct PrimalFn {
  const Vector& p;
  CostMode mode;
  double threshold;

  // Returns cost at softmax(theta); fills grad with d cost / d theta.
  double operator()(const Vector& theta, Vector& grad) const {
    const double mx = theta.maxCoeff();
    const Vector e = (theta.array() - mx).exp().matrix();
    const double s = e.sum();
    const Vector q = e / s;
    const Vector len = ((std::log(s) + mx - theta.array()) / kLn2).matrix();
    const double m1 = p.dot(len);
    const double m2 = p.dot(len.array().square().matrix());
    Vector dl(p.size());
    double cost = 0.0;
    if (mode == CostMode::age) {
      if (!(m1 > 0.0)) return kInf;
      cost = m1 + m2 / (2.0 * m1);
      dl = (p.array() * (1.0 + len.array() / m1 - m2 / (2.0 * m1 * m1))).matrix();
    } else {
      const double slack = threshold - m1;
      if (!(slack > 0.0)) return kInf;
      cost = m1 + m2 / (2.0 * slack);
      dl = (p.array() * (1.0 + len.array() / slack + m2 / (2.0 * slack * slack))).matrix();
    }
    grad = ((q * dl.sum() - dl) / kLn2).eval();
    return cost;
  }
};

struct LbfgsOut {
  Vector theta;
  double cost;
  int iterations;
};

LbfgsOut lbfgs(const PrimalFn& fn, Vector theta, int max_iters) {
  constexpr int kMemory = 10;
  Vector grad(theta.size());
  double f = fn(theta, grad);
  std::deque<std::pair<Vector, Vector>> history;
  int it = 0;
  int stalled = 0;
  for (; it < max_iters; ++it) {
    if (grad.lpNorm<Eigen::Infinity>() < 1e-14) break;
    // two-loop recursion
    Vector d = -grad;
    std::vector<double> alpha(history.size());
    for (std::size_t k = history.size(); k-- > 0;) {
      const auto& [s, y] = history[k];
      alpha[k] = s.dot(d) / y.dot(s);
      d -= alpha[k] * y;
    }
    if (!history.empty()) {
      const auto& [s, y] = history.back();
      d *= s.dot(y) / y.dot(y);
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
      const auto& [s, y] = history[k];
      const double beta = y.dot(d) / y.dot(s);
      d += (alpha[k] - beta) * s;
    }
    double slope = grad.dot(d);
    if (!(slope < 0.0)) {
      history.clear();
      d = -grad;
      slope = -grad.squaredNorm();
    }
    double step = history.empty() ? std::min(1.0, 1.0 / grad.lpNorm<Eigen::Infinity>()) : 1.0;
    Vector next_grad(theta.size());
    double next_f = kInf;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      const Vector trial = theta + step * d;
      next_f = fn(trial, next_grad);
      if (next_f <= f + 1e-4 * step * slope) {
        accepted = true;
        const Vector s = trial - theta;
        const Vector y = next_grad - grad;
        if (s.dot(y) > 1e-300) {
          history.emplace_back(s, y);
          if (history.size() > kMemory) history.pop_front();
        }
        theta = trial;
        break;
      }
    }
    if (!accepted) break;
    const double decrease = f - next_f;
    f = next_f;
    grad = next_grad;
    stalled = decrease <= 1e-15 * (1.0 + std::abs(f)) ? stalled + 1 : 0;
    if (stalled >= 5 || (stalled > 0 && grad.lpNorm<Eigen::Infinity>() < 1e-9)) break;
  }
  return {std::move(theta), f, it};
}

}  // namespace

DirectResult direct_oracle(const Pmf& p, CostMode mode, std::optional<double> lambda, const SolverOptions& opts) {
  opts.validate();
  double threshold = 0.0;
  if (mode == CostMode::delay) {
    if (!lambda || !(*lambda > 0.0)) throw std::invalid_argument("direct_oracle: delay mode needs a positive lambda");
    threshold = 1.0 / *lambda;
    if (!(entropy(p) < threshold)) throw std::invalid_argument("direct_oracle: no stable code exists, H(P) >= 1/lambda");
  }
  const PrimalFn fn{p.probs(), mode, threshold};
  const Vector log_p = p.probs().array().log().matrix();

  std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  DirectResult best{LengthAssignment{}, kInf, 0};
  for (int s = 0; s < std::max(opts.multistarts, 2); ++s) {
    Vector theta;
    if (s == 0) {
      theta = log_p;
    } else if (s == 1) {
      theta = Vector::Zero(log_p.size());
    } else {
      theta.resize(log_p.size());
      for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = normal(rng);
    }
    Vector scratch(theta.size());
    for (int k = 0; k < 60 && !std::isfinite(fn(theta, scratch)); ++k) theta = 0.5 * (theta + log_p);
    if (!std::isfinite(fn(theta, scratch))) continue;
    auto out = lbfgs(fn, theta, 20 * opts.inner_max_iters / 10);
    best.iterations += out.iterations;
    if (out.cost < best.cost) {
      const double mx = out.theta.maxCoeff();
      const double lse = std::log((out.theta.array() - mx).exp().sum()) + mx;
      best.lengths = LengthAssignment::real(((lse - out.theta.array()) / kLn2).matrix().cwiseMax(0.0));
      best.cost = out.cost;
    }
  }
  if (!std::isfinite(best.cost)) throw std::runtime_error("direct_oracle: no stable length assignment found");
  return best;
}

SaddleDiagnostics saddle_check(const Pmf& p, const OptResult& result, double tol) {
  SaddleDiagnostics d;
  const Vector& len = result.lengths.values();
  const Vector g = g_weights(p, result.z_star, result.q_star, result.mode);
  d.min_g = g.minCoeff();
  d.nonnegative = d.min_g >= -kFeasibilitySlack;

  const Vector shannon = tilted_lengths(g.cwiseMax(0.0));
  d.shannon_gap = (len - shannon).cwiseAbs().maxCoeff();
  d.shannon_optimal = d.shannon_gap <= tol;

  // F(z, Q) = sum g_{z,Q} l - [delay] z^2 threshold / 2 at fixed l
  const double sign = result.mode == CostMode::age ? -1.0 : 1.0;
  const auto& pp = p.probs().array();
  double dz = (len.array() * (sign * result.z_star * pp + (result.q_star.array() * pp).sqrt())).sum();
  if (result.mode == CostMode::delay) dz -= result.z_star * result.threshold;
  d.z_stationarity = std::abs(dz);
  d.q_stationarity = (result.q_star - q_star(p, len, 2.0)).cwiseAbs().maxCoeff();
  d.stationary = d.z_stationarity <= tol && d.q_stationarity <= tol;
  return d;
}

std::string opt_result_to_json(const OptResult& r, const std::optional<SaddleDiagnostics>& diag) {
  nlohmann::ordered_json j;
  j["mode"] = r.mode == CostMode::age ? "age" : "delay";
  if (r.mode == CostMode::delay) j["lambda"] = 1.0 / r.threshold;
  j["z_star"] = r.z_star;
  j["q_star"] = std::vector<double>(r.q_star.data(), r.q_star.data() + r.q_star.size());
  j["p_star"] = std::vector<double>(r.p_star.data(), r.p_star.data() + r.p_star.size());
  const Vector& l = r.lengths.values();
  j["lengths"] = std::vector<double>(l.data(), l.data() + l.size());
  j["cost"] = r.cost;
  j["average_age_or_delay"] = r.average_age_or_delay();
  j["converged"] = r.converged;
  j["duality_gap"] = r.duality_gap;
  nlohmann::ordered_json dj;
  dj["path"] = r.path;
  dj["iterations"] = r.iterations;
  dj["dual_value"] = r.dual_value;
  dj["delay_condition_met"] = r.delay_condition_met;
  dj["notes"] = r.diagnostics;
  if (diag) {
    dj["saddle"] = {{"shannon_gap", diag->shannon_gap},     {"z_stationarity", diag->z_stationarity},
                    {"q_stationarity", diag->q_stationarity}, {"min_g", diag->min_g},
                    {"passed", diag->passed()}};
  }
  j["diagnostics"] = dj;
  return j.dump(2);
}

}  // namespace agecodec
