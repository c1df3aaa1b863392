#include "agecodec/varform.hpp"

#include <limits>
#include <stdexcept>

namespace agecodec {

namespace {

void check_q(const Pmf& p, const Vector& q) {
  if (static_cast<std::size_t>(q.size()) != p.size()) throw std::invalid_argument("Q: alphabet size mismatch");
  if ((q.array() < 0.0).any() || !q.allFinite()) throw std::invalid_argument("Q: entries must be finite and >= 0");
}

}  // namespace

bool g_feasible(const Vector& g) { return g.minCoeff() >= -kFeasibilitySlack; }

double weighted_entropy(const Vector& g) {
  if (!g_feasible(g)) throw std::domain_error("weighted_entropy: negative weight");
  const double total = g.cwiseMax(0.0).sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g(i) > 0.0) acc += g(i) * std::log2(total / g(i));
  }
  return acc;
}

Vector tilted_lengths(const Vector& g) {
  const double total = g.cwiseMax(0.0).sum();
  Vector l(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    l(i) = g(i) > 0.0 ? std::log2(total / g(i)) : std::numeric_limits<double>::infinity();
  }
  return l;
}

double pnorm(const Pmf& p, const Vector& values, double order) {
  return std::pow(p.probs().dot(values.array().abs().pow(order).matrix()), 1.0 / order);
}

double pnorm_variational_value(const Pmf& p, const Vector& values, const Vector& q, double order) {
  if (!(order > 1.0) || !std::isfinite(order)) throw std::invalid_argument("variational p-norm: order must lie in (1, inf)");
  check_q(p, q);
  if (values.size() != q.size()) throw std::invalid_argument("variational p-norm: size mismatch");
  const double alpha = (order - 1.0) / order;  // 1/p'
  const auto& pp = p.probs().array();
  return (pp * (q.array() / pp).pow(alpha) * values.array().abs()).sum();
}

Vector q_star(const Pmf& p, const Vector& values, double order) {
  if (static_cast<std::size_t>(values.size()) != p.size()) throw std::invalid_argument("q_star: size mismatch");
  if (!(order > 1.0)) throw std::invalid_argument("q_star: order must exceed 1");
  Vector w = (p.probs().array() * values.array().abs().pow(order)).matrix();
  const double total = w.sum();
  if (!(total > 0.0)) throw std::invalid_argument("q_star: all values are zero");
  return w / total;
}

double age_objective(const Pmf& p, double z, const Vector& q) {
  check_q(p, q);
  if (!(z >= 0.0)) throw std::invalid_argument("age_objective: z must be >= 0");
  const Vector g = g_weights(p, z, q, CostMode::age);
  if (!g_feasible(g)) throw std::domain_error("age_objective: (z, Q) outside the feasible set");
  return weighted_entropy(g);
}

double delay_objective(const Pmf& p, double z, const Vector& q, double threshold) {
  check_q(p, q);
  if (!(z >= 0.0)) throw std::invalid_argument("delay_objective: z must be >= 0");
  return weighted_entropy(g_weights(p, z, q, CostMode::delay)) - 0.5 * z * z * threshold;
}

double maxmin_objective(const Pmf& p, double z, const Vector& q, CostMode mode, double threshold) {
  return mode == CostMode::age ? age_objective(p, z, q) : delay_objective(p, z, q, threshold);
}

}  // namespace agecodec
