#include "agecodec/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace agecodec {

Pmf::Pmf(std::span<const double> weights) {
  double total = 0.0;
  std::size_t positive = 0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw std::invalid_argument("pmf: non-finite weight");
    if (w < 0.0) throw std::invalid_argument("pmf: negative weight");
    if (w > 0.0) {
      ++positive;
      total += w;
    }
  }
  if (positive == 0) throw std::invalid_argument("pmf: all weights are zero");
  if (positive < 2) throw std::invalid_argument("pmf: need at least 2 positive weights");

  probs_.resize(static_cast<Eigen::Index>(positive));
  original_index_.reserve(positive);
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      probs_(k++) = weights[i] / total;
      original_index_.push_back(i);
    }
  }
  dropped_ = positive != weights.size();
  // second pass absorbs the rounding of the first division
  probs_ /= probs_.sum();
}

Pmf::Pmf(const Vector& weights) : Pmf(std::span<const double>(weights.data(), static_cast<std::size_t>(weights.size()))) {}

Pmf new_pmf(std::span<const double> weights) { return Pmf(weights); }

Pmf zipf(double s, std::size_t n) {
  if (n < 2) throw std::invalid_argument("zipf: n must be >= 2");
  if (!std::isfinite(s) || s < 0.0) throw std::invalid_argument("zipf: s must be finite and >= 0");
  Vector w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) w(static_cast<Eigen::Index>(i)) = std::pow(static_cast<double>(i + 1), -s);
  return Pmf(w);
}

Pmf head_tail(double head, std::size_t n) {
  if (n < 2) throw std::invalid_argument("head_tail: n must be >= 2");
  if (!(head > 0.0 && head < 1.0)) throw std::invalid_argument("head_tail: head must lie in (0,1)");
  Vector w = Vector::Constant(static_cast<Eigen::Index>(n), (1.0 - head) / static_cast<double>(n - 1));
  w(0) = head;
  return Pmf(w);
}

double entropy(const Pmf& p) {
  const auto& v = p.probs().array();
  return -(v * v.log2()).sum();
}

double kl_divergence(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: alphabet size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += p[i] * std::log2(p[i] / q[i]);
  // exact zero for identical inputs; tiny negatives are rounding
  return std::max(d, 0.0);
}

Partition group_equal_probs(const Pmf& p, double tol) {
  if (!(tol >= 0.0)) throw std::invalid_argument("group_equal_probs: tol must be >= 0");
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });

  Partition part;
  part.group_of.assign(p.size(), 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t x = order[k];
    if (k == 0 || p[order[k - 1]] - p[x] > tol * p[order[k - 1]]) {
      part.groups.emplace_back();
      part.group_mass.push_back(0.0);
    }
    part.groups.back().push_back(x);
    part.group_mass.back() += p[x];
    part.group_of[x] = part.groups.size() - 1;
  }
  for (std::size_t g = 0; g < part.count(); ++g) {
    std::sort(part.groups[g].begin(), part.groups[g].end());
    part.symbol_prob.push_back(part.group_mass[g] / static_cast<double>(part.groups[g].size()));
  }
  return part;
}

std::string pmf_to_json(const Pmf& p) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i = 0; i < p.size(); ++i) j.push_back(p[i]);
  return j.dump();
}

Pmf pmf_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_array()) throw std::invalid_argument("pmf json: expected an array");
  std::vector<double> w;
  for (const auto& e : j) {
    if (!e.is_number()) throw std::invalid_argument("pmf json: non-numeric entry");
    w.push_back(e.get<double>());
  }
  return Pmf(w);
}

std::string pmf_to_csv(const Pmf& p) {
  std::ostringstream os;
  os.precision(17);
  os << "p\n";
  for (std::size_t i = 0; i < p.size(); ++i) os << p[i] << '\n';
  return os.str();
}

Pmf pmf_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("pmf csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "p") throw std::invalid_argument("pmf csv: expected header 'p'");
  std::vector<double> w;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("pmf csv: bad number '" + line + "'");
    }
    if (used != line.size()) throw std::invalid_argument("pmf csv: bad number '" + line + "'");
    w.push_back(v);
  }
  return Pmf(w);
}

}  // namespace agecodec
