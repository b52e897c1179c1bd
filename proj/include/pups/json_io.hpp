#pragma once

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <string>
#include <vector>

#include "pups/external_evaluator.hpp"
#include "pups/preference.hpp"
#include "pups/problems.hpp"
#include "pups/types.hpp"

namespace pups {

using Json = nlohmann::json;

/// Doubles go out as JSON numbers; infinities as the strings "inf" / "-inf".
inline Json bound_to_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

inline double bound_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ContractViolation("range bound must be a number, \"inf\" or \"-inf\"");
}

inline Json ranges_to_json(const PreferenceRanges& r) {
  Json lower = Json::array();
  Json upper = Json::array();
  for (double v : r.lower) lower.push_back(bound_to_json(v));
  for (double v : r.upper) upper.push_back(bound_to_json(v));
  return {{"lower", lower}, {"upper", upper}};
}

inline PreferenceRanges ranges_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("lower") || !j.contains("upper") || !j["lower"].is_array() ||
      !j["upper"].is_array()) {
    throw ContractViolation("ranges must be an object {\"lower\": [...], \"upper\": [...]}");
  }
  PreferenceRanges r;
  for (const auto& v : j["lower"]) r.lower.push_back(bound_from_json(v));
  for (const auto& v : j["upper"]) r.upper.push_back(bound_from_json(v));
  return r;
}

inline Json solution_to_json(const Solution& s) {
  return {{"x", s.decision}, {"f", s.objectives}, {"eval_index", s.eval_index}};
}

inline Solution solution_from_json(const Json& j) {
  return {j.at("x").get<DecisionVector>(), j.at("f").get<ObjectiveVector>(),
          j.at("eval_index").get<EvalIndex>()};
}

inline Json solutions_to_json(std::span<const Solution> solutions) {
  Json out = Json::array();
  for (const auto& s : solutions) out.push_back(solution_to_json(s));
  return out;
}

inline Json grouped_to_json(const GroupedView& view) {
  Json groups = Json::array();
  Json magnitudes = Json::array();
  for (const auto& g : view.groups) {
    Json ids = Json::array();
    Json mags = Json::array();
    for (const auto& e : g) {
      ids.push_back(e.eval_index);
      mags.push_back(e.magnitude);
    }
    groups.push_back(std::move(ids));
    magnitudes.push_back(std::move(mags));
  }
  return {{"groups", groups}, {"magnitudes", magnitudes}};
}

/// Problem configuration document:
///   {name, k, n, bounds: [[lo,hi]...], senses: ["min"|"max"...],
///    evaluator: {"builtin": "zdt1"} | {"command": [...], "timeout_seconds": 60}}
/// For builtin evaluators, n defaults to 30 and bounds to the unit box.
inline ProblemSpec problem_spec_from_json(const Json& j) {
  ProblemSpec spec;
  spec.name = j.value("name", std::string{"problem"});
  spec.objectives = j.value("k", std::size_t{2});
  const auto& ev = j.at("evaluator");
  if (ev.contains("builtin")) {
    spec.evaluator = BuiltinEvaluator{ev.at("builtin").get<std::string>()};
    spec.dimension = j.value("n", std::size_t{30});
  } else if (ev.contains("command")) {
    spec.evaluator = ExternalEvaluator{ev.at("command").get<std::vector<std::string>>(),
                                       ev.value("timeout_seconds", 60.0)};
    spec.dimension = j.at("n").get<std::size_t>();
  } else {
    throw ContractViolation("evaluator must be {\"builtin\": ...} or {\"command\": [...]}");
  }
  if (j.contains("bounds")) {
    for (const auto& pair : j.at("bounds")) {
      if (!pair.is_array() || pair.size() != 2) throw ContractViolation("bounds entries must be [lo, hi]");
      spec.bounds.lower.push_back(pair[0].get<double>());
      spec.bounds.upper.push_back(pair[1].get<double>());
    }
  } else if (std::holds_alternative<BuiltinEvaluator>(spec.evaluator)) {
    spec.bounds = {std::vector<double>(spec.dimension, 0.0), std::vector<double>(spec.dimension, 1.0)};
  } else {
    throw ContractViolation("external problems must state their bounds");
  }
  if (j.contains("senses")) {
    for (const auto& s : j.at("senses")) {
      const auto v = s.get<std::string>();
      if (v == "min") {
        spec.senses.push_back(Sense::minimize);
      } else if (v == "max") {
        spec.senses.push_back(Sense::maximize);
      } else {
        throw ContractViolation("sense must be \"min\" or \"max\"");
      }
    }
  } else {
    spec.senses.assign(spec.objectives, Sense::minimize);
  }
  spec.validate();
  return spec;
}

inline ProblemSpec load_problem_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open problem file '" + path + "'");
  try {
    return problem_spec_from_json(Json::parse(in));
  } catch (const Json::exception& e) {
    throw ContractViolation("invalid problem file '" + path + "': " + e.what());
  }
}

inline std::unique_ptr<Evaluator> make_evaluator(const ProblemSpec& spec) {
  if (const auto* b = std::get_if<BuiltinEvaluator>(&spec.evaluator)) {
    return make_builtin_evaluator(b->tag);
  }
  const auto& ext = std::get<ExternalEvaluator>(spec.evaluator);
  return std::make_unique<SubprocessEvaluator>(ext.command, spec.objectives, ext.timeout_seconds);
}

inline Problem make_problem(ProblemSpec spec) {
  auto evaluator = make_evaluator(spec);
  return Problem(std::move(spec), std::move(evaluator));
}

}  // namespace pups
