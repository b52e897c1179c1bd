#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pups/json_io.hpp"
#include "pups/optimizer.hpp"
#include "pups/preference.hpp"
#include "pups/problems.hpp"
#include "pups/ups.hpp"

namespace pups {

// ---------------------------------------------------------------------------
// Scripts

struct RunPhase {
  std::size_t evals = 0;                   ///< budget increment for this phase
  std::optional<PreferenceRanges> ranges;  ///< empty: keep the ranges already in force
};

struct RunScript {
  std::vector<RunPhase> phases;

  void validate(std::size_t objectives) const {
    if (phases.empty()) throw ContractViolation("a run script needs at least one phase");
    for (const auto& p : phases) {
      if (p.evals == 0) throw ContractViolation("phase budget increments must be positive");
      if (p.ranges) p.ranges->validate(objectives);
    }
  }

  std::size_t total_evals() const noexcept {
    std::size_t n = 0;
    for (const auto& p : phases) n += p.evals;
    return n;
  }
};

/// {"phases": [{"evals": 100, "ranges": {"lower": [...], "upper": [...]}}, {"evals": 400}, ...]}
inline RunScript run_script_from_json(const Json& j) {
  RunScript script;
  for (const auto& p : j.at("phases")) {
    RunPhase phase;
    const auto evals = p.at("evals").get<long long>();
    if (evals <= 0) throw ContractViolation("phase budget increments must be positive");
    phase.evals = static_cast<std::size_t>(evals);
    if (p.contains("ranges") && !p["ranges"].is_null()) phase.ranges = ranges_from_json(p["ranges"]);
    script.phases.push_back(std::move(phase));
  }
  return script;
}

/// Parses "lo1:hi1,lo2:hi2,..."; "inf" and "-inf" are accepted as bounds.
inline PreferenceRanges parse_ranges_arg(const std::string& text) {
  PreferenceRanges r;
  std::stringstream in(text);
  std::string item;
  auto number = [](const std::string& s) {
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ContractViolation("cannot parse range bound '" + s + "'");
    }
    return v;
  };
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ContractViolation("range '" + item + "' is not of the form lo:hi");
    r.lower.push_back(number(item.substr(0, colon)));
    r.upper.push_back(number(item.substr(colon + 1)));
  }
  if (r.lower.empty()) throw ContractViolation("empty ranges");
  return r;
}

// ---------------------------------------------------------------------------
// Metrics

using FrontDistance = std::function<double(std::span<const double>)>;

/// Analytic front distance for the builtin ZDT problems in their standard form.
inline std::optional<FrontDistance> front_distance_for(const ProblemSpec& spec) {
  const auto* b = std::get_if<BuiltinEvaluator>(&spec.evaluator);
  if (!b || spec.objectives != 2) return std::nullopt;
  for (auto s : spec.senses) {
    if (s != Sense::minimize) return std::nullopt;
  }
  if (b->tag == "zdt1") return FrontDistance(zdt1_front_distance);
  if (b->tag == "zdt3") return FrontDistance(zdt3_front_distance);
  return std::nullopt;
}

struct SetMetrics {
  std::size_t eval_count = 0;
  std::size_t archive_size = 0;
  std::vector<std::size_t> group_counts;  ///< [pass all, fails 1, ..., fails k]
  double in_box_fraction = 0.0;
  double min_violation = 0.0;
  std::optional<double> mean_front_distance;
  std::optional<double> min_front_distance;
  std::optional<double> in_box_mean_front_distance;
};

inline SetMetrics measure(std::span<const Solution> archive, const PreferenceRanges& ranges,
                          const std::optional<FrontDistance>& distance) {
  SetMetrics m;
  m.archive_size = archive.size();
  const auto view = group_solutions(archive, ranges);
  for (const auto& g : view.groups) m.group_counts.push_back(g.size());
  m.in_box_fraction =
      archive.empty() ? 0.0 : static_cast<double>(view.pass_all().size()) / static_cast<double>(archive.size());
  m.min_violation = kInf;
  for (const auto& s : archive) m.min_violation = std::min(m.min_violation, violation_magnitude(s.objectives, ranges));
  if (distance && !archive.empty()) {
    double sum = 0.0;
    double best = kInf;
    double in_sum = 0.0;
    std::size_t in_count = 0;
    for (const auto& s : archive) {
      const double d = (*distance)(s.objectives);
      sum += d;
      best = std::min(best, d);
      if (violation_magnitude(s.objectives, ranges) == 0.0) {
        in_sum += d;
        ++in_count;
      }
    }
    m.mean_front_distance = sum / static_cast<double>(archive.size());
    m.min_front_distance = best;
    if (in_count > 0) m.in_box_mean_front_distance = in_sum / static_cast<double>(in_count);
  }
  return m;
}

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json metrics_to_json(const SetMetrics& m) {
  return {{"eval_count", m.eval_count},
          {"archive_size", m.archive_size},
          {"group_counts", m.group_counts},
          {"in_box_fraction", m.in_box_fraction},
          {"min_violation", bound_to_json(m.min_violation)},
          {"mean_front_distance", optional_json(m.mean_front_distance)},
          {"min_front_distance", optional_json(m.min_front_distance)},
          {"in_box_mean_front_distance", optional_json(m.in_box_mean_front_distance)}};
}

// ---------------------------------------------------------------------------
// Batch runs

struct PhaseReport {
  PreferenceRanges ranges;
  SetMetrics metrics;
  double wall_seconds = 0.0;
};

struct RunReport {
  std::uint64_t seed = 0;
  std::vector<PhaseReport> phases;
  std::string error;  ///< non-empty when an evaluation failure cut the run short
  bool stalled = false;  ///< the population converged before the budget was spent
  std::vector<Solution> archive;
  std::vector<Solution> history;

  const SetMetrics& final_metrics() const { return phases.back().metrics; }
};

inline Json report_to_json(const RunReport& r) {
  Json phases = Json::array();
  for (const auto& p : r.phases) {
    phases.push_back({{"ranges", ranges_to_json(p.ranges)},
                      {"metrics", metrics_to_json(p.metrics)},
                      {"wall_seconds", p.wall_seconds}});
  }
  return {{"seed", r.seed},
          {"phases", phases},
          {"final", r.phases.empty() ? Json(nullptr) : metrics_to_json(r.final_metrics())},
          {"error", r.error},
          {"stalled", r.stalled}};
}

/// Runs the phases in order: each applies its ranges and then spends its budget increment.
/// Evaluation failures end the run early with the partial results and `error` set.
inline RunReport run_batch(Problem& problem, OptimizerConfig config, const RunScript& script,
                           std::uint64_t seed) {
  script.validate(problem.objectives());
  config.rng_seed = seed;
  Optimizer optimizer(problem, config);
  const auto distance = front_distance_for(problem.spec());
  RunReport report;
  report.seed = seed;
  std::size_t target = 0;
  for (const auto& phase : script.phases) {
    const auto start = std::chrono::steady_clock::now();
    if (phase.ranges) optimizer.apply_ranges(*phase.ranges);
    target += phase.evals;
    try {
      optimizer.run_until(problem, target);
    } catch (const EvaluationError& e) {
      report.error = e.what();
    }
    PhaseReport pr;
    pr.ranges = optimizer.ranges();
    pr.metrics = measure(optimizer.archive(), optimizer.ranges(), distance);
    pr.metrics.eval_count = optimizer.eval_count();
    pr.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.phases.push_back(std::move(pr));
    report.stalled = optimizer.stalled();
    if (!report.error.empty()) break;
  }
  report.archive = optimizer.archive();
  report.history = optimizer.all_points();
  return report;
}

inline RunScript single_phase(std::size_t evals, PreferenceRanges ranges) {
  return {{RunPhase{evals, std::move(ranges)}}};
}

// ---------------------------------------------------------------------------
// Paired UPS-EMO vs PUPS-EMO comparison

struct PairedResult {
  std::uint64_t seed = 0;
  std::size_t ups_in_box = 0;
  std::size_t pups_in_box = 0;
  std::optional<double> ups_in_box_distance;
  std::optional<double> pups_in_box_distance;

  bool pups_more_in_box() const noexcept { return pups_in_box > ups_in_box; }
  /// A side without in-box solutions counts as infinitely far from the front.
  bool pups_closer() const noexcept {
    const double u = ups_in_box_distance.value_or(kInf);
    const double p = pups_in_box_distance.value_or(kInf);
    return p < u;
  }
};

struct CompareReport {
  std::vector<PairedResult> pairs;

  double in_box_win_rate() const {
    std::size_t wins = 0;
    for (const auto& p : pairs) wins += p.pups_more_in_box();
    return pairs.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(pairs.size());
  }
  double distance_win_rate() const {
    std::size_t wins = 0;
    for (const auto& p : pairs) wins += p.pups_closer();
    return pairs.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(pairs.size());
  }
};

inline Json compare_to_json(const CompareReport& c) {
  Json pairs = Json::array();
  for (const auto& p : c.pairs) {
    pairs.push_back({{"seed", p.seed},
                     {"ups_in_box", p.ups_in_box},
                     {"pups_in_box", p.pups_in_box},
                     {"ups_in_box_mean_distance", optional_json(p.ups_in_box_distance)},
                     {"pups_in_box_mean_distance", optional_json(p.pups_in_box_distance)}});
  }
  return {{"pairs", pairs},
          {"in_box_win_rate", c.in_box_win_rate()},
          {"distance_win_rate", c.distance_win_rate()}};
}

/// Archive of a preference-free UPS-EMO run (reference loop) with the given seed.
inline std::vector<Solution> run_ups(Problem& problem, OptimizerConfig config, std::size_t evals,
                                     std::uint64_t seed) {
  config.rng_seed = seed;
  UpsOptimizer ups(problem.bounds(), problem.objectives(), config);
  ups.run_until(problem, evals);
  return ups.archive();
}

inline CompareReport compare(Problem& problem, const OptimizerConfig& config, const PreferenceRanges& ranges,
                             std::size_t evals, std::span<const std::uint64_t> seeds) {
  if (seeds.size() < 2) throw ContractViolation("compare needs at least two seeds");
  ranges.validate(problem.objectives());
  const auto distance = front_distance_for(problem.spec());
  CompareReport out;
  for (const auto seed : seeds) {
    const auto ups = run_ups(problem, config, evals, seed);
    const auto pups = run_batch(problem, config, single_phase(evals, ranges), seed);
    const auto mu = measure(ups, ranges, distance);
    const auto mp = measure(pups.archive, ranges, distance);
    out.pairs.push_back({seed, mu.group_counts.front(), mp.group_counts.front(), mu.in_box_mean_front_distance,
                         mp.in_box_mean_front_distance});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV with header x1..xn,f1..fk,eval_index; doubles printed with 17 significant digits.
inline void write_csv(std::ostream& out, std::span<const Solution> solutions, std::size_t dimension,
                      std::size_t objectives) {
  for (std::size_t j = 0; j < dimension; ++j) out << 'x' << j + 1 << ',';
  for (std::size_t i = 0; i < objectives; ++i) out << 'f' << i + 1 << ',';
  out << "eval_index\n";
  for (const auto& s : solutions) {
    for (double v : s.decision) out << format_double(v) << ',';
    for (double v : s.objectives) out << format_double(v) << ',';
    out << s.eval_index << '\n';
  }
}

inline std::vector<Solution> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ContractViolation("empty CSV");
  std::size_t n = 0;
  std::size_t k = 0;
  {
    std::stringstream header(line);
    std::string col;
    while (std::getline(header, col, ',')) {
      if (!col.empty() && col[0] == 'x') ++n;
      if (!col.empty() && col[0] == 'f') ++k;
    }
  }
  std::vector<Solution> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != n + k + 1) throw ContractViolation("CSV row has the wrong number of columns");
    // strtod rather than stod: stod rejects subnormals.
    auto number = [](const std::string& c) { return std::strtod(c.c_str(), nullptr); };
    Solution s;
    for (std::size_t j = 0; j < n; ++j) s.decision.push_back(number(cells[j]));
    for (std::size_t i = 0; i < k; ++i) s.objectives.push_back(number(cells[n + i]));
    s.eval_index = std::stoull(cells[n + k]);
    out.push_back(std::move(s));
  }
  return out;
}

/// Writes archive.csv, history.csv, solutions.json and report.json into `dir`.
inline void export_run(const std::filesystem::path& dir, const RunReport& report, std::size_t dimension,
                       std::size_t objectives) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("archive.csv");
    write_csv(f, report.archive, dimension, objectives);
  }
  {
    auto f = open("history.csv");
    write_csv(f, report.history, dimension, objectives);
  }
  {
    auto f = open("solutions.json");
    f << Json{{"archive", solutions_to_json(report.archive)}, {"history", solutions_to_json(report.history)}}.dump()
      << '\n';
  }
  {
    auto f = open("report.json");
    f << report_to_json(report).dump(2) << '\n';
  }
}

}  // namespace pups
