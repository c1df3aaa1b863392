#include "agecodec/age.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace agecodec {

double age_cost(const Pmf& p, const LengthAssignment& l) {
  const auto [m1, m2] = moments(p, l);
  if (!(m1 > 0.0)) throw std::invalid_argument("average_age: E[L] must be positive");
  return age_cost_from_moments(m1, m2);
}

double average_age(const Pmf& p, const LengthAssignment& l) { return age_cost(p, l) - 0.5; }

RandomizedScheme RandomizedScheme::with_default_skip(Vector theta, const LengthAssignment& l) {
  return {std::move(theta), l.values().minCoeff()};
}

RandomizedScheme RandomizedScheme::always_transmit(std::size_t n, double skip_length) {
  return {Vector::Ones(static_cast<Eigen::Index>(n)), skip_length};
}

namespace {

void check_scheme(const Pmf& p, const LengthAssignment& l, const RandomizedScheme& s) {
  if (l.size() != p.size() || static_cast<std::size_t>(s.theta.size()) != p.size())
    throw std::invalid_argument("randomized scheme: alphabet size mismatch");
  if ((s.theta.array() < 0.0).any() || (s.theta.array() > 1.0).any())
    throw std::invalid_argument("randomized scheme: theta must lie in [0,1]");
  if (!std::isfinite(s.skip_length) || s.skip_length < 0.0)
    throw std::invalid_argument("randomized scheme: skip length must be finite and >= 0");
}

}  // namespace

double transmit_probability(const Pmf& p, const RandomizedScheme& scheme) {
  return p.probs().dot(scheme.theta);
}

std::pair<double, double> randomized_moments(const Pmf& p, const LengthAssignment& l, const RandomizedScheme& scheme) {
  check_scheme(p, l, scheme);
  const auto w = (p.probs().array() * scheme.theta.array()).eval();
  const double skip = 1.0 - w.sum();
  const auto& v = l.values().array();
  const double m1 = (w * v).sum() + skip * scheme.skip_length;
  const double m2 = (w * v.square()).sum() + skip * scheme.skip_length * scheme.skip_length;
  return {m1, m2};
}

double effective_kraft_sum(const Pmf& p, const LengthAssignment& l, const RandomizedScheme& scheme) {
  check_scheme(p, l, scheme);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (scheme.theta(static_cast<Eigen::Index>(i)) > 0.0) sum += std::exp2(-l[i]);
  }
  if (transmit_probability(p, scheme) < 1.0) sum += std::exp2(-scheme.skip_length);
  return sum;
}

double average_age_randomized(const Pmf& p, const LengthAssignment& l, const RandomizedScheme& scheme) {
  const auto [m1, m2] = randomized_moments(p, l, scheme);
  const double tp = transmit_probability(p, scheme);
  if (!(tp > 0.0)) throw std::invalid_argument("average_age_randomized: E[theta(X)] must be positive");
  if (!(m1 > 0.0)) throw std::invalid_argument("average_age_randomized: E[L(theta)] must be positive");
  return m1 / tp + m2 / (2.0 * m1) - 0.5;
}

double average_age_erasure(double base_age, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("average_age_erasure: eps must lie in [0,1)");
  return base_age / (1.0 - eps) + eps / (2.0 * (1.0 - eps));
}

double average_age_erasure_exact(const Pmf& p, const LengthAssignment& l, const RandomizedScheme& scheme, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("average_age_erasure_exact: eps must lie in [0,1)");
  const auto [m1, m2] = randomized_moments(p, l, scheme);
  const double tp = transmit_probability(p, scheme);
  if (!(tp > 0.0)) throw std::invalid_argument("average_age_erasure_exact: E[theta(X)] must be positive");
  // a codeword of length l occupies a sum of l Geometric(1 - eps) slot counts
  const double s = 1.0 - eps;
  const double t1 = m1 / s;
  const double t2 = (eps * m1 + m2) / (s * s);
  return t1 / tp + t2 / (2.0 * t1) - 0.5;
}

AgeBounds age_bounds(const Pmf& p) {
  return {1.5 * entropy(p) - 0.5, 1.5 * std::log2(static_cast<double>(p.size())) + 1.0};
}

double shannon_age_certificate(const Pmf& p) {
  const auto [m1, m2] = moments(p, shannon_lengths(p, true));
  return std::log2(static_cast<double>(p.size())) + 1.0 - (1.0 - 1.0 / (2.0 * std::log(2.0))) * m2 / m1;
}

double delay_from_moments(double mean, double second, double threshold) {
  if (mean >= threshold) return kInfiniteDelay;
  return second / (2.0 * (threshold - mean)) + mean;
}

double average_delay(const Pmf& p, const LengthAssignment& l, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("average_delay: lambda must be positive");
  const auto [m1, m2] = moments(p, l);
  return delay_from_moments(m1, m2, 1.0 / lambda);
}

AgeReport age_report(const Pmf& p, const LengthAssignment& l) {
  const auto [m1, m2] = moments(p, l);
  const auto b = age_bounds(p);
  return {m1, m2, age_from_moments(m1, m2), b.lower, b.upper};
}

std::string age_report_to_json(const AgeReport& r) {
  nlohmann::ordered_json j;
  j["mean_length"] = r.mean_length;
  j["second_moment"] = r.second_moment;
  j["average_age"] = r.average_age;
  j["lower_bound"] = r.lower_bound;
  j["upper_bound"] = r.upper_bound;
  return j.dump(2);
}

}  // namespace agecodec
