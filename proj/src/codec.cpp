#include "agecodec/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace agecodec {

LengthAssignment::LengthAssignment(Vector lengths, bool integral)
    : lengths_(std::move(lengths)), integral_(integral) {
  for (Eigen::Index i = 0; i < lengths_.size(); ++i) {
    const double v = lengths_(i);
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("lengths must be finite and >= 0");
    if (integral_ && v != std::floor(v)) throw std::invalid_argument("integral lengths must be whole numbers");
  }
}

bool LengthAssignment::kraft_feasible(double tol) const { return kraft_sum(lengths_) <= 1.0 + tol; }

bool CodeBook::prefix_free() const {
  std::vector<std::string> sorted = codewords;
  std::sort(sorted.begin(), sorted.end());
  // after sorting, a prefix is always immediately followed by some extension of it
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (sorted[i + 1].compare(0, sorted[i].size(), sorted[i]) == 0) return false;
  }
  return true;
}

LengthAssignment CodeBook::lengths() const {
  Vector l(static_cast<Eigen::Index>(codewords.size()));
  for (std::size_t i = 0; i < codewords.size(); ++i) l(static_cast<Eigen::Index>(i)) = static_cast<double>(codewords[i].size());
  return LengthAssignment::integer(std::move(l));
}

LengthAssignment shannon_lengths(const Pmf& p, bool integer) {
  Vector l = -p.probs().array().log2();
  if (integer) {
    // guard against -log2 of an exact power of two landing a hair above the integer
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      const double r = std::round(l(i));
      l(i) = std::abs(l(i) - r) < 1e-12 ? r : std::ceil(l(i));
    }
  }
  l = l.cwiseMax(0.0);
  return {std::move(l), integer};
}

LengthAssignment round_up(const LengthAssignment& l) {
  if (l.integral()) return l;
  return LengthAssignment::integer(l.values().array().ceil().matrix());
}

CodeBook canonical_code(const LengthAssignment& l) {
  if (!l.integral()) throw std::invalid_argument("canonical_code: lengths must be integral");
  const std::size_t n = l.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (l[i] < 1.0) throw std::invalid_argument("canonical_code: zero length with more than one symbol");
    if (l[i] > 62.0) throw std::invalid_argument("canonical_code: length exceeds 62 bits");
  }
  // exact integer Kraft check: sum of 2^(maxlen - l) against 2^maxlen
  const auto maxlen = static_cast<int>(l.max());
  if (maxlen <= 62) {
    unsigned long long sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += 1ULL << (maxlen - static_cast<int>(l[i]));
    if (sum > (1ULL << maxlen)) throw std::invalid_argument("canonical_code: Kraft sum exceeds 1");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return l[a] < l[b]; });

  CodeBook book;
  book.codewords.resize(n);
  unsigned long long code = 0;
  int prev_len = static_cast<int>(l[order[0]]);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t x = order[k];
    const int len = static_cast<int>(l[x]);
    if (k > 0) code = (code + 1) << (len - prev_len);
    prev_len = len;
    std::string word(static_cast<std::size_t>(len), '0');
    for (int b = 0; b < len; ++b) {
      if ((code >> (len - 1 - b)) & 1ULL) word[static_cast<std::size_t>(b)] = '1';
    }
    book.codewords[x] = std::move(word);
  }
  return book;
}

std::pair<double, double> moments(const Pmf& p, const LengthAssignment& l) {
  if (p.size() != l.size()) throw std::invalid_argument("moments: alphabet size mismatch");
  const auto& w = p.probs().array();
  const auto& v = l.values().array();
  const double m1 = (w * v).sum();
  double m2 = (w * v.square()).sum();
  // E[L^2] >= E[L]^2 holds exactly; clamp rounding for degenerate L
  m2 = std::max(m2, m1 * m1);
  return {m1, m2};
}

LengthAssignment bump_zero_lengths(const LengthAssignment& l) {
  return {l.values().cwiseMax(1.0), l.integral()};
}

std::string codebook_to_json(const CodeBook& book) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < book.size(); ++i) j[std::to_string(i)] = book.codewords[i];
  return j.dump(2);
}

CodeBook codebook_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("codebook json: expected an object");
  CodeBook book;
  book.codewords.resize(j.size());
  for (const auto& [key, value] : j.items()) {
    std::size_t used = 0;
    const auto id = std::stoul(key, &used);
    if (used != key.size() || id >= j.size()) throw std::invalid_argument("codebook json: bad symbol id '" + key + "'");
    const auto word = value.get<std::string>();
    if (word.find_first_not_of("01") != std::string::npos) throw std::invalid_argument("codebook json: non-binary codeword");
    book.codewords[id] = word;
  }
  if (!book.prefix_free()) throw std::invalid_argument("codebook json: code is not prefix-free");
  return book;
}

std::string lengths_to_csv(const LengthAssignment& l) {
  std::ostringstream os;
  os.precision(17);
  os << "symbol,length\n";
  for (std::size_t i = 0; i < l.size(); ++i) os << i << ',' << l[i] << '\n';
  return os.str();
}

LengthAssignment lengths_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "symbol,length") throw std::invalid_argument("lengths csv: expected header 'symbol,length'");
  std::vector<std::pair<std::size_t, double>> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("lengths csv: malformed row '" + line + "'");
    rows.emplace_back(std::stoul(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  Vector l(static_cast<Eigen::Index>(rows.size()));
  std::vector<bool> seen(rows.size(), false);
  bool integral = true;
  for (const auto& [id, v] : rows) {
    if (id >= rows.size() || seen[id]) throw std::invalid_argument("lengths csv: symbol ids must be 0..n-1 without repeats");
    seen[id] = true;
    l(static_cast<Eigen::Index>(id)) = v;
    integral = integral && v == std::floor(v);
  }
  return {std::move(l), integral};
}

}  // namespace agecodec
