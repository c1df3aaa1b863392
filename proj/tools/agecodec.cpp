#include "agecodec/age.hpp"
#include "agecodec/codec.hpp"
#include "agecodec/pmf.hpp"
#include "agecodec/sim.hpp"
#include "agecodec/solver.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

using namespace agecodec;
using json = nlohmann::ordered_json;

namespace {

struct RunSpec {
  std::string dist;
  std::string mode = "age";
  std::optional<double> lambda;
  double epsilon = 0.0;
  std::string theta;
  std::optional<double> skip_length;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
  std::string format;
  std::string code = "design";
  std::string grid;
  std::string param;
  std::uint64_t horizon = 1'000'000;
  int replications = 1;
  std::uint64_t arrivals = 1'000'000;
  std::string trace;
  bool allow_direct = false;
  bool skip_oracle = false;
  SolverOptions solver;

  CostMode cost_mode() const { return mode == "delay" ? CostMode::delay : CostMode::age; }
};

/// Exit status for failed checks, distinct from usage errors.
constexpr int kCheckFailed = 1;
constexpr int kInputError = 2;

std::string fmt_num(double v) { return fmt::format("{:.10g}", v); }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    v.push_back(std::stod(item, &used));
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
  }
  return v;
}

// key=value pairs separated by commas, e.g. "s=1,n=256"
std::vector<std::pair<std::string, std::string>> parse_params(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + item + "'");
    kv.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return kv;
}

struct ZipfSpec {
  double s = 1.0;
  std::size_t n = 256;
};

std::optional<ZipfSpec> zipf_spec(const std::string& dist) {
  if (dist.rfind("zipf:", 0) != 0) return std::nullopt;
  ZipfSpec z;
  for (const auto& [k, v] : parse_params(dist.substr(5))) {
    if (k == "s") {
      z.s = std::stod(v);
    } else if (k == "n") {
      z.n = std::stoul(v);
    } else {
      throw std::invalid_argument("zipf: unknown parameter '" + k + "'");
    }
  }
  return z;
}

Pmf load_pmf(const std::string& dist) {
  if (auto z = zipf_spec(dist)) return zipf(z->s, z->n);
  if (dist.rfind("headtail:", 0) == 0) {
    double head = 0.5;
    std::size_t n = 256;
    for (const auto& [k, v] : parse_params(dist.substr(9))) {
      if (k == "head") {
        head = std::stod(v);
      } else if (k == "n") {
        n = std::stoul(v);
      } else {
        throw std::invalid_argument("headtail: unknown parameter '" + k + "'");
      }
    }
    return head_tail(head, n);
  }
  if (dist.rfind("inline:", 0) == 0) return Pmf(parse_list(dist.substr(7)));
  if (dist.rfind("file:", 0) == 0) {
    const std::string path = dist.substr(5);
    const std::string text = read_file(path);
    if (std::filesystem::path(path).extension() == ".json") return pmf_from_json(text);
    return pmf_from_csv(text);
  }
  throw std::invalid_argument("unknown distribution '" + dist + "' (expected zipf:, inline:, file: or headtail:)");
}

// Picks the entries of a vector indexed by the original alphabet that
// survive zero-weight removal.
Vector restrict_to_support(const Pmf& p, const std::vector<double>& full, const std::string& what) {
  const auto& idx = p.original_index();
  const std::size_t full_size = idx.empty() ? 0 : idx.back() + 1;
  if (full.size() != p.size() && full.size() < full_size) {
    throw std::invalid_argument(what + ": expected " + std::to_string(p.size()) + " entries, got " +
                                std::to_string(full.size()));
  }
  if (full.size() == p.size()) return Eigen::Map<const Vector>(full.data(), static_cast<Eigen::Index>(full.size()));
  Vector v(static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) v(static_cast<Eigen::Index>(i)) = full[idx[i]];
  return v;
}

std::optional<Vector> load_theta(const RunSpec& spec, const Pmf& p) {
  if (spec.theta.empty()) return std::nullopt;
  std::string text;
  if (spec.theta.rfind("file:", 0) == 0) {
    text = read_file(spec.theta.substr(5));
  } else if (spec.theta.rfind("inline:", 0) == 0) {
    text = spec.theta.substr(7);
  } else {
    throw std::invalid_argument("--theta expects file:PATH or inline:v1,v2,...");
  }
  std::vector<double> values;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    values = nlohmann::json::parse(text).get<std::vector<double>>();
  } else {
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line == "theta") continue;
      for (double v : parse_list(line)) values.push_back(v);
    }
  }
  return restrict_to_support(p, values, "theta");
}

SolverOptions solver_options(const RunSpec& spec) {
  SolverOptions o = spec.solver;
  o.seed = spec.seed;
  return o;
}

double threshold_of(const RunSpec& spec) {
  if (!spec.lambda) throw std::invalid_argument("--lambda is required in delay mode");
  return 1.0 / *spec.lambda;
}

OptResult design(const Pmf& p, const RunSpec& spec) {
  spdlog::debug("solving {} mode, n={}, H={:.6g}", spec.mode, p.size(), entropy(p));
  OptResult r = spec.cost_mode() == CostMode::age ? solve_age(p, solver_options(spec))
                                                   : solve_delay(p, *spec.lambda, solver_options(spec), spec.allow_direct);
  spdlog::info("solved: cost={:.10g} z*={:.6g} gap={:.3g} iterations={} converged={}", r.cost, r.z_star, r.duality_gap,
               r.iterations, r.converged);
  return r;
}

double primal(const Pmf& p, const Vector& l, const RunSpec& spec) {
  if (spec.cost_mode() == CostMode::age) return primal_age_cost(p, l);
  return primal_delay_cost(p, l, threshold_of(spec));
}

LengthAssignment integer_code(const LengthAssignment& real) {
  LengthAssignment rounded = round_up(real);
  const LengthAssignment bumped = bump_zero_lengths(rounded);
  if (bumped.values() != rounded.values()) spdlog::info("zero-length codewords bumped to length 1");
  return bumped;
}

// D(P || Q) for a Q that may carry zero entries.
double kl_to(const Pmf& p, const Vector& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double qi = q(static_cast<Eigen::Index>(i));
    if (!(qi > 0.0)) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log2(p[i] / qi);
  }
  return std::max(d, 0.0);
}

void write_output(const RunSpec& spec, const std::string& text) {
  if (spec.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(spec.out);
  if (!f) throw std::invalid_argument("cannot write '" + spec.out + "'");
  f << text;
}

// ---------------------------------------------------------------- design

struct DesignSummary {
  double entropy, real_cost, rounded_cost, shannon_real_cost, shannon_int_cost, lower, upper;
};

DesignSummary summarize(const Pmf& p, const OptResult& r, const LengthAssignment& rounded, const RunSpec& spec) {
  DesignSummary s{};
  s.entropy = entropy(p);
  s.real_cost = r.cost;
  s.rounded_cost = primal(p, rounded.values(), spec);
  s.shannon_real_cost = primal(p, shannon_lengths(p, false).values(), spec);
  s.shannon_int_cost = primal(p, bump_zero_lengths(shannon_lengths(p, true)).values(), spec);
  if (spec.cost_mode() == CostMode::age) {
    const AgeBounds b = age_bounds(p);
    s.lower = b.lower + 0.5;
    s.upper = b.upper + 0.5;
  } else {
    // D grows with both moments, and E[L^2] >= E[L]^2 >= H^2
    s.lower = delay_from_moments(s.entropy, s.entropy * s.entropy, threshold_of(spec));
    s.upper = s.shannon_real_cost;
  }
  return s;
}

std::string summary_csv(const DesignSummary& s, const RunSpec& spec) {
  const bool age = spec.cost_mode() == CostMode::age;
  std::string out = fmt::format("# seed={}\n", spec.seed);
  if (age) {
    out += "mode,H(P),cost_real,cost_rounded,cost_shannon_real,cost_shannon_int,age_real,age_rounded,"
           "age_shannon_real,age_shannon_int,cost_lower_bound,cost_upper_bound\n";
    out += fmt::format("age,{},{},{},{},{},{},{},{},{},{},{}\n", fmt_num(s.entropy), fmt_num(s.real_cost),
                       fmt_num(s.rounded_cost), fmt_num(s.shannon_real_cost), fmt_num(s.shannon_int_cost),
                       fmt_num(s.real_cost - 0.5), fmt_num(s.rounded_cost - 0.5), fmt_num(s.shannon_real_cost - 0.5),
                       fmt_num(s.shannon_int_cost - 0.5), fmt_num(s.lower), fmt_num(s.upper));
  } else {
    out += "mode,lambda,H(P),delay_real,delay_rounded,delay_shannon_real,delay_shannon_int,delay_lower_bound,"
           "delay_upper_bound\n";
    out += fmt::format("delay,{},{},{},{},{},{},{},{}\n", fmt_num(*spec.lambda), fmt_num(s.entropy),
                       fmt_num(s.real_cost), fmt_num(s.rounded_cost), fmt_num(s.shannon_real_cost),
                       fmt_num(s.shannon_int_cost), fmt_num(s.lower), fmt_num(s.upper));
  }
  return out;
}

json summary_json(const DesignSummary& s, const RunSpec& spec) {
  json j;
  j["seed"] = spec.seed;
  j["mode"] = spec.mode;
  if (spec.lambda) j["lambda"] = *spec.lambda;
  j["entropy"] = s.entropy;
  j["cost_real"] = s.real_cost;
  j["cost_rounded"] = s.rounded_cost;
  j["cost_shannon_real"] = s.shannon_real_cost;
  j["cost_shannon_int"] = s.shannon_int_cost;
  if (spec.cost_mode() == CostMode::age) {
    j["age_real"] = s.real_cost - 0.5;
    j["age_rounded"] = s.rounded_cost - 0.5;
  }
  j["cost_lower_bound"] = s.lower;
  j["cost_upper_bound"] = s.upper;
  return j;
}

int cmd_design(const RunSpec& spec) {
  const Pmf p = load_pmf(spec.dist);
  if (p.dropped_symbols()) spdlog::warn("zero-probability symbols dropped; symbol ids refer to the remaining support");
  const OptResult r = design(p, spec);
  const SaddleDiagnostics diag = saddle_check(p, r);
  if (!r.converged) spdlog::warn("solver did not converge (duality gap {:.3g})", r.duality_gap);
  if (!r.delay_condition_met) spdlog::warn("delay condition fails; result comes from the direct minimizer");

  const LengthAssignment rounded = integer_code(r.lengths);
  const CodeBook book = canonical_code(rounded);
  const DesignSummary s = summarize(p, r, rounded, spec);

  json result = json::parse(opt_result_to_json(r, diag));
  result["seed"] = spec.seed;
  result["entropy"] = s.entropy;
  result["rounded_lengths"] = std::vector<double>(rounded.values().begin(), rounded.values().end());
  result["rounded_cost"] = s.rounded_cost;
  if (p.dropped_symbols()) result["original_index"] = p.original_index();

  if (!spec.out.empty()) {
    const std::filesystem::path dir(spec.out);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "result.json") << result.dump(2) << '\n';
    std::ofstream(dir / "codebook.json") << json::parse(codebook_to_json(book)).dump(2) << '\n';
    std::ofstream(dir / "summary.csv") << summary_csv(s, spec);
    spdlog::info("wrote result.json, codebook.json, summary.csv to {}", dir.string());
  } else if (spec.format == "csv") {
    std::cout << summary_csv(s, spec);
  } else {
    json j;
    j["summary"] = summary_json(s, spec);
    j["result"] = result;
    j["codebook"] = json::parse(codebook_to_json(book));
    std::cout << j.dump(2) << '\n';
  }
  return 0;
}

// ----------------------------------------------------------------- sweep

std::vector<double> parse_grid(const std::string& grid) {
  if (grid.find(':') == std::string::npos) return parse_list(grid);
  std::vector<double> parts;
  std::stringstream ss(grid);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw std::invalid_argument("grid must be START:STOP:STEP with STEP > 0 and STOP >= START");
  }
  std::vector<double> v;
  for (long i = 0;; ++i) {
    const double x = parts[0] + static_cast<double>(i) * parts[2];
    if (x > parts[1] + 1e-9 * parts[2]) break;
    v.push_back(x);
  }
  return v;
}

struct SweepRow {
  double param = 0.0;
  std::string status = "ok";
  std::vector<double> values;
};

SweepRow sweep_point(const RunSpec& base, const std::string& param, double x) {
  SweepRow row;
  row.param = x;
  RunSpec spec = base;
  try {
    Pmf p = load_pmf(spec.dist);
    if (param == "s") {
      const ZipfSpec z = *zipf_spec(spec.dist);
      p = zipf(x, z.n);
    } else {
      spec.lambda = x;
    }
    const OptResult r = design(p, spec);
    const LengthAssignment rounded = integer_code(r.lengths);
    const LengthAssignment sh_real = shannon_lengths(p, false);
    const LengthAssignment sh_int = bump_zero_lengths(shannon_lengths(p, true));
    const double shift = spec.cost_mode() == CostMode::age ? 0.5 : 0.0;
    row.values = {entropy(p),
                  r.cost - shift,
                  primal(p, rounded.values(), spec) - shift,
                  primal(p, sh_real.values(), spec) - shift,
                  primal(p, sh_int.values(), spec) - shift,
                  moments(p, r.lengths).first,
                  moments(p, sh_real).first,
                  kl_to(p, r.p_star)};
    if (!r.converged) row.status = "not_converged";
    if (!r.delay_condition_met) row.status = "direct_only";
  } catch (const std::exception& e) {
    row.status = e.what();
    spdlog::warn("sweep point {}={} failed: {}", param, x, e.what());
  }
  return row;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

int cmd_sweep(const RunSpec& spec) {
  const bool age = spec.cost_mode() == CostMode::age;
  std::string param = spec.param.empty() ? (age ? "s" : "lambda") : spec.param;
  if (param != "s" && param != "lambda") throw std::invalid_argument("--param must be s or lambda");
  if (param == "lambda" && age) throw std::invalid_argument("--param lambda needs --mode delay");
  if (param == "s" && !zipf_spec(spec.dist)) throw std::invalid_argument("sweeping s needs a zipf: distribution");
  if (param == "s" && !age) threshold_of(spec);
  if (param == "lambda" && spec.grid.empty()) throw std::invalid_argument("a lambda sweep needs --grid");
  const std::vector<double> grid = parse_grid(spec.grid.empty() ? "0:5:0.5" : spec.grid);
  if (grid.empty()) throw std::invalid_argument("empty grid");

  std::vector<SweepRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) rows[i] = sweep_point(spec, param, grid[i]);
  };
  const int jobs = std::max(1, std::min<int>(spec.jobs, static_cast<int>(grid.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const std::string m = age ? "age" : "delay";
  const std::vector<std::string> columns = {param,
                                            "H(P)",
                                            m + "_proposed_real",
                                            m + "_proposed_int",
                                            m + "_shannon_real",
                                            m + "_shannon_int",
                                            "E[L]_proposed",
                                            "E[L]_shannon",
                                            "KL(P||P*)",
                                            "status"};
  std::string out;
  if (spec.format == "json") {
    json j;
    j["seed"] = spec.seed;
    j["mode"] = m;
    j["dist"] = spec.dist;
    if (spec.lambda && param == "s") j["lambda"] = *spec.lambda;
    j["rows"] = json::array();
    for (const auto& row : rows) {
      json r;
      r[columns[0]] = row.param;
      for (std::size_t k = 0; k < row.values.size(); ++k) r[columns[k + 1]] = row.values[k];
      r["status"] = row.status;
      j["rows"].push_back(r);
    }
    out = j.dump(2) + "\n";
  } else {
    out = fmt::format("# agecodec sweep mode={} dist={} seed={}", m, spec.dist, spec.seed);
    if (spec.lambda && param == "s") out += fmt::format(" lambda={}", fmt_num(*spec.lambda));
    out += "\n";
    for (std::size_t k = 0; k < columns.size(); ++k) out += (k ? "," : "") + columns[k];
    out += "\n";
    for (const auto& row : rows) {
      out += fmt_num(row.param);
      for (std::size_t k = 0; k + 2 < columns.size(); ++k) {
        out += ",";
        if (k < row.values.size()) out += fmt_num(row.values[k]);
      }
      out += "," + csv_field(row.status) + "\n";
    }
  }
  write_output(spec, out);
  return 0;
}

// ----------------------------------------------------- simulate / verify

struct Prepared {
  Pmf p;
  std::optional<OptResult> result;
  LengthAssignment lengths;  // integer, used by the simulators
  std::optional<RandomizedScheme> scheme;
};

Prepared prepare(const RunSpec& spec) {
  Prepared prep{load_pmf(spec.dist), std::nullopt, {}, std::nullopt};
  const Pmf& p = prep.p;
  if (spec.code == "design") {
    prep.result = design(p, spec);
    prep.lengths = integer_code(prep.result->lengths);
  } else if (spec.code == "shannon") {
    prep.lengths = bump_zero_lengths(shannon_lengths(p, true));
  } else if (spec.code.rfind("file:", 0) == 0) {
    const LengthAssignment l = lengths_from_csv(read_file(spec.code.substr(5)));
    std::vector<double> full(l.values().begin(), l.values().end());
    prep.lengths = LengthAssignment(restrict_to_support(p, full, "lengths"), l.integral());
    if (!prep.lengths.integral()) {
      spdlog::info("lengths file is not integral; rounding up");
      prep.lengths = integer_code(prep.lengths);
    }
  } else {
    throw std::invalid_argument("--code must be design, shannon or file:PATH");
  }
  if (auto theta = load_theta(spec, p)) {
    prep.scheme = spec.skip_length ? RandomizedScheme{*theta, *spec.skip_length}
                                   : RandomizedScheme::with_default_skip(*theta, prep.lengths);
    const double k = effective_kraft_sum(p, prep.lengths, *prep.scheme);
    if (k > 1.0 + kKraftTolerance) spdlog::warn("effective code (with skip codeword) violates Kraft: sum {}", k);
  } else if (prep.lengths.kraft_feasible() == false) {
    spdlog::warn("lengths violate Kraft: sum {}", kraft_sum(prep.lengths));
  }
  return prep;
}

double age_formula(const Prepared& prep, double eps) {
  const RandomizedScheme scheme = prep.scheme ? *prep.scheme : RandomizedScheme::always_transmit(prep.p.size());
  if (eps > 0.0) return average_age_erasure_exact(prep.p, prep.lengths, scheme, eps);
  return average_age_randomized(prep.p, prep.lengths, scheme);
}

double paper_erasure_formula(const Prepared& prep, double eps) {
  const RandomizedScheme scheme = prep.scheme ? *prep.scheme : RandomizedScheme::always_transmit(prep.p.size());
  return average_age_erasure(average_age_randomized(prep.p, prep.lengths, scheme), eps);
}

SimReport run_age_sim(const Prepared& prep, const RunSpec& spec, bool trace) {
  SimConfig cfg;
  cfg.horizon = spec.horizon;
  cfg.seed = spec.seed;
  cfg.erasure = spec.epsilon;
  cfg.scheme = prep.scheme;
  cfg.record_trace = trace;
  spdlog::info("simulating {} slots x {} replication(s), seed={}", spec.horizon, spec.replications, spec.seed);
  if (spec.replications > 1) return replicate_update(prep.p, prep.lengths, cfg, spec.replications, spec.jobs);
  return simulate_update(prep.p, prep.lengths, cfg);
}

int cmd_simulate(const RunSpec& spec) {
  const Prepared prep = prepare(spec);
  const SimReport rep = run_age_sim(prep, spec, !spec.trace.empty());
  if (!spec.trace.empty()) std::ofstream(spec.trace) << trace_to_csv(rep);
  const double formula = age_formula(prep, spec.epsilon);

  json j;
  j["seed"] = spec.seed;
  j["horizon"] = spec.horizon;
  j["replications"] = spec.replications;
  j["epsilon"] = spec.epsilon;
  j["average_age_formula"] = formula;
  if (spec.epsilon > 0.0) j["average_age_erasure_closed_form"] = paper_erasure_formula(prep, spec.epsilon);
  j["age"] = json::parse(sim_report_to_json(rep));
  std::optional<SimReport> queue;
  if (spec.cost_mode() == CostMode::delay) {
    queue = simulate_mg1(prep.p, prep.lengths, *spec.lambda, spec.arrivals, spec.seed);
    j["lambda"] = *spec.lambda;
    j["average_delay_formula"] = average_delay(prep.p, prep.lengths, *spec.lambda);
    j["queue"] = json::parse(sim_report_to_json(*queue));
  }

  if (spec.format == "csv") {
    std::string out = fmt::format("# seed={}\n", spec.seed);
    out += "kind,empirical,standard_error,formula,count\n";
    out += fmt::format("age,{},{},{},{}\n", fmt_num(rep.empirical_mean), fmt_num(rep.standard_error),
                       fmt_num(formula), rep.cycles);
    if (queue) {
      out += fmt::format("delay,{},{},{},{}\n", fmt_num(queue->empirical_mean), fmt_num(queue->standard_error),
                         fmt_num(average_delay(prep.p, prep.lengths, *spec.lambda)), queue->cycles);
    }
    write_output(spec, out);
  } else {
    write_output(spec, j.dump(2) + "\n");
  }
  return 0;
}

struct Check {
  std::string name;
  bool pass;
  double residual;
  double tolerance;
  std::string detail;
};

int cmd_verify(const RunSpec& spec) {
  const Prepared prep = prepare(spec);
  const Pmf& p = prep.p;
  std::vector<Check> checks;

  if (prep.result) {
    const OptResult& r = *prep.result;
    checks.push_back({"solver_duality_gap", r.duality_gap <= 1e-6, r.duality_gap, 1e-6, r.path});
    const SaddleDiagnostics d = saddle_check(p, r);
    const double worst = std::max({d.shannon_gap, d.z_stationarity, d.q_stationarity});
    checks.push_back({"saddle_point", d.passed(), worst, 1e-6,
                      fmt::format("shannon_gap={:.3g} z_stationarity={:.3g} q_stationarity={:.3g} min_g={:.3g}",
                                  d.shannon_gap, d.z_stationarity, d.q_stationarity, d.min_g)});
    if (!spec.skip_oracle) {
      std::optional<double> lambda;
      if (spec.cost_mode() == CostMode::delay) lambda = spec.lambda;
      const DirectResult o = direct_oracle(p, spec.cost_mode(), lambda, solver_options(spec));
      const double gap = std::abs(r.cost - o.cost);
      checks.push_back({"oracle_agreement", gap <= 1e-6, gap, 1e-6,
                        fmt::format("solver={:.12g} oracle={:.12g}", r.cost, o.cost)});
    }
  }

  const SimReport rep = run_age_sim(prep, spec, false);
  const double formula = age_formula(prep, spec.epsilon);
  const double err = std::abs(rep.empirical_mean - formula);
  const double tol = std::max(0.01 * formula, 3.0 * rep.standard_error);
  checks.push_back({"simulated_age", err <= tol, err, tol,
                    fmt::format("empirical={:.6g} se={:.3g} formula={:.6g}", rep.empirical_mean, rep.standard_error,
                                formula)});
  if (spec.epsilon > 0.0) {
    const double closed = paper_erasure_formula(prep, spec.epsilon);
    spdlog::info("erasure closed form {:.6g} differs from simulation by {:.3g} ({:.1f} SE)", closed,
                 rep.empirical_mean - closed, (rep.empirical_mean - closed) / rep.standard_error);
  }

  const RenewalResiduals res = renewal_identities(rep, p, prep.lengths, prep.scheme, spec.epsilon);
  checks.push_back({"renewal_identities", res.max_abs() <= 4.0, res.max_abs(), 4.0,
                    fmt::format("Y={:.2f} Y2={:.2f} Z={:.2f} R={:.2f} (in SE units)", res.y, res.y_sq, res.z, res.r)});

  if (spec.cost_mode() == CostMode::delay) {
    const SimReport q = simulate_mg1(p, prep.lengths, *spec.lambda, spec.arrivals, spec.seed);
    const double d = average_delay(p, prep.lengths, *spec.lambda);
    if (!std::isfinite(d)) {
      checks.push_back({"simulated_delay", false, kInfiniteDelay, 0.0, "integer code is unstable at this lambda"});
    } else {
      const double qerr = std::abs(q.empirical_mean - d);
      const double qtol = std::max(0.02 * d, 3.0 * q.standard_error);
      checks.push_back({"simulated_delay", qerr <= qtol, qerr, qtol,
                        fmt::format("empirical={:.6g} se={:.3g} formula={:.6g}", q.empirical_mean, q.standard_error,
                                    d)});
    }
  }

  bool all = true;
  for (const auto& c : checks) all = all && c.pass;
  if (spec.format == "json") {
    json j;
    j["seed"] = spec.seed;
    j["passed"] = all;
    j["checks"] = json::array();
    for (const auto& c : checks) {
      j["checks"].push_back(
          {{"name", c.name}, {"pass", c.pass}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"detail", c.detail}});
    }
    write_output(spec, j.dump(2) + "\n");
  } else {
    std::string out = fmt::format("# seed={}\n", spec.seed);
    for (const auto& c : checks) {
      out += fmt::format("{} {} residual={:.4g} tolerance={:.4g} {}\n", c.pass ? "PASS" : "FAIL", c.name, c.residual,
                         c.tolerance, c.detail);
    }
    out += all ? "all checks passed\n" : "some checks FAILED\n";
    write_output(spec, out);
  }
  return all ? 0 : kCheckFailed;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("agecodec");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("AGECODEC_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("AGECODEC_LOG: unknown level '{}', keeping warn", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  RunSpec spec;
  CLI::App app{"Design and check prefix-free codes for minimum age of information or queuing delay"};
  app.set_config("--config", "", "Flat key = value file; command-line flags take precedence");
  // values such as zipf:s=1,n=256 must not be split into arrays
  app.get_config_formatter_base()->arrayDelimiter(';');
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--dist", spec.dist, "zipf:s=1,n=256 | file:PATH | inline:0.5,0.25,0.25 | headtail:head=0.5,n=256")
      ->required();
  app.add_option("--mode", spec.mode, "Cost to minimise")->check(CLI::IsMember({"age", "delay"}));
  app.add_option("--lambda", spec.lambda, "Arrival rate per bit-slot (delay mode)")->check(CLI::PositiveNumber);
  app.add_option("--epsilon", spec.epsilon, "Bit erasure probability")->check(CLI::Range(0.0, 0.999999));
  app.add_option("--theta", spec.theta, "Per-symbol transmit probabilities: file:PATH or inline:...");
  app.add_option("--skip-length", spec.skip_length, "Length of the skip codeword (default: shortest codeword)");
  app.add_option("--seed", spec.seed, "Random seed");
  app.add_option("--jobs", spec.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", spec.out, "Output path (directory for design)");
  app.add_option("--format", spec.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--code", spec.code, "Code to simulate: design | shannon | file:PATH (symbol,length CSV)");
  app.add_option("--grid", spec.grid, "Sweep grid START:STOP:STEP or v1,v2,... (default 0:5:0.5 for s)");
  app.add_option("--param", spec.param, "Sweep parameter: s (zipf exponent) or lambda");
  app.add_option("--horizon", spec.horizon, "Simulated bit-slots per replication");
  app.add_option("--replications", spec.replications, "Independent simulation replications")
      ->check(CLI::PositiveNumber);
  app.add_option("--arrivals", spec.arrivals, "Arrivals in the queue simulation");
  app.add_option("--trace", spec.trace, "Write the per-cycle trace CSV to this path");
  app.add_flag("--allow-direct", spec.allow_direct, "Delay mode: fall back to direct minimisation when the condition fails");
  app.add_flag("--skip-oracle", spec.skip_oracle, "verify: skip the direct-minimisation cross-check");
  app.add_option("--z-grid", spec.solver.z_grid_points, "Solver: z grid points");
  app.add_option("--multistarts", spec.solver.multistarts, "Solver: random starts");
  app.add_option("--inner-tol", spec.solver.inner_tol, "Solver: inner tolerance");
  app.add_option("--inner-max-iters", spec.solver.inner_max_iters, "Solver: inner iteration cap");
  app.add_option("--group-tol", spec.solver.group_tol, "Relative tolerance for equal-probability groups");

  auto* design_cmd = app.add_subcommand("design", "Solve for the optimal code and write result, codebook, summary");
  auto* sweep_cmd = app.add_subcommand("sweep", "Compare proposed and Shannon codes over a parameter grid");
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate the update scheme (and queue in delay mode)");
  auto* verify_cmd = app.add_subcommand("verify", "Design, simulate and run all consistency checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (spec.cost_mode() == CostMode::delay && !sweep_cmd->parsed()) threshold_of(spec);
    if (spec.format.empty()) spec.format = sweep_cmd->parsed() ? "csv" : (verify_cmd->parsed() ? "csv" : "json");
    spec.solver.validate();
    if (design_cmd->parsed()) return cmd_design(spec);
    if (sweep_cmd->parsed()) return cmd_sweep(spec);
    if (simulate_cmd->parsed()) return cmd_simulate(spec);
    return cmd_verify(spec);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
}
