#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pups/types.hpp"

namespace pups {

// ---------------------------------------------------------------------------
// ZDT benchmarks (Zitzler, Deb & Thiele 2000), n >= 2, x in [0,1]^n.

namespace detail {

inline double zdt_g(std::span<const double> x) {
  if (x.size() < 2) throw ContractViolation("ZDT problems need at least two decision variables");
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw ContractViolation("ZDT decision variable outside [0,1]");
  }
  double tail = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) tail += x[i];
  return 1.0 + 9.0 * tail / static_cast<double>(x.size() - 1);
}

}  // namespace detail

inline ObjectiveVector eval_zdt1(std::span<const double> x) {
  const double g = detail::zdt_g(x);
  const double f1 = x[0];
  return {f1, g * (1.0 - std::sqrt(f1 / g))};
}

inline ObjectiveVector eval_zdt3(std::span<const double> x) {
  const double g = detail::zdt_g(x);
  const double f1 = x[0];
  const double h = 1.0 - std::sqrt(f1 / g) - (f1 / g) * std::sin(10.0 * std::numbers::pi * f1);
  return {f1, g * h};
}

// ---------------------------------------------------------------------------
// Distance to an analytic bi-objective front {(t, curve(t)) : t in segments}.

class AnalyticFront {
public:
  AnalyticFront(std::function<double(double)> curve, std::vector<std::pair<double, double>> segments)
      : curve_(std::move(curve)), segments_(std::move(segments)) {
    double total = 0.0;
    for (auto [a, b] : segments_) total += b - a;
    for (auto [a, b] : segments_) {
      const auto count = std::max<std::size_t>(
          2, static_cast<std::size_t>(std::lround(kSamples * (b - a) / total)));
      auto& ts = samples_.emplace_back();
      ts.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        ts.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
      }
    }
  }

  const std::vector<std::pair<double, double>>& segments() const noexcept { return segments_; }

  double operator()(double t) const { return curve_(t); }

  /// Euclidean distance from z to the front: dense sampling, then golden-section
  /// refinement around the best sample of each segment.
  double distance(std::span<const double> z) const {
    if (z.size() != 2) throw ContractViolation("front distance is defined for two objectives");
    double best = kInf;
    for (const auto& ts : samples_) {
      std::size_t arg = 0;
      double arg_d = kInf;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const double d = sq_dist(z, ts[i]);
        if (d < arg_d) {
          arg_d = d;
          arg = i;
        }
      }
      double lo = ts[arg == 0 ? 0 : arg - 1];
      double hi = ts[arg + 1 == ts.size() ? arg : arg + 1];
      constexpr double inv_phi = 0.6180339887498949;
      double c = hi - inv_phi * (hi - lo);
      double d = lo + inv_phi * (hi - lo);
      double fc = sq_dist(z, c);
      double fd = sq_dist(z, d);
      for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
        if (fc < fd) {
          hi = d;
          d = c;
          fd = fc;
          c = hi - inv_phi * (hi - lo);
          fc = sq_dist(z, c);
        } else {
          lo = c;
          c = d;
          fc = fd;
          d = lo + inv_phi * (hi - lo);
          fd = sq_dist(z, d);
        }
      }
      best = std::min({best, arg_d, fc, fd});
    }
    return std::sqrt(best);
  }

private:
  static constexpr double kSamples = 10000.0;

  double sq_dist(std::span<const double> z, double t) const {
    const double dx = z[0] - t;
    const double dy = z[1] - curve_(t);
    return dx * dx + dy * dy;
  }

  std::function<double(double)> curve_;
  std::vector<std::pair<double, double>> segments_;
  std::vector<std::vector<double>> samples_;
};

inline const AnalyticFront& zdt1_front() {
  static const AnalyticFront front([](double t) { return 1.0 - std::sqrt(t); }, {{0.0, 1.0}});
  return front;
}

inline double zdt3_curve(double t) {
  return 1.0 - std::sqrt(t) - t * std::sin(10.0 * std::numbers::pi * t);
}

/// The ZDT3 front is the non-dominated part of the g = 1 curve: a handful of disjoint
/// f1 intervals, located here by a fine sweep.
inline const AnalyticFront& zdt3_front() {
  static const AnalyticFront front = [] {
    constexpr std::size_t n = 200001;
    std::vector<bool> on_front(n, false);
    double best_f2 = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(n - 1);
      const double f2 = zdt3_curve(t);
      if (f2 < best_f2) {
        on_front[i] = true;
        best_f2 = f2;
      }
    }
    std::vector<std::pair<double, double>> segments;
    for (std::size_t i = 0; i < n;) {
      if (!on_front[i]) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < n && on_front[j + 1]) ++j;
      if (j > i) {
        segments.emplace_back(static_cast<double>(i) / static_cast<double>(n - 1),
                              static_cast<double>(j) / static_cast<double>(n - 1));
      }
      i = j + 1;
    }
    return AnalyticFront(zdt3_curve, std::move(segments));
  }();
  return front;
}

inline double zdt1_front_distance(std::span<const double> z) { return zdt1_front().distance(z); }
inline double zdt3_front_distance(std::span<const double> z) { return zdt3_front().distance(z); }

// ---------------------------------------------------------------------------
// Problem description and evaluator binding.

enum class Sense { minimize, maximize };

struct BuiltinEvaluator {
  std::string tag;
  friend bool operator==(const BuiltinEvaluator&, const BuiltinEvaluator&) = default;
};

struct ExternalEvaluator {
  std::vector<std::string> command;
  double timeout_seconds = 60.0;
  friend bool operator==(const ExternalEvaluator&, const ExternalEvaluator&) = default;
};

struct ProblemSpec {
  std::string name;
  std::size_t objectives = 2;
  std::size_t dimension = 30;
  Box bounds;
  std::vector<Sense> senses;
  std::variant<BuiltinEvaluator, ExternalEvaluator> evaluator;

  /// Throws ContractViolation when the description is inconsistent.
  void validate() const {
    if (objectives < 2) throw ContractViolation("a problem needs at least two objectives");
    if (dimension < 1) throw ContractViolation("a problem needs at least one decision variable");
    if (bounds.lower.size() != dimension || bounds.upper.size() != dimension) {
      throw ContractViolation("bounds must list one [lower, upper] pair per decision variable");
    }
    for (std::size_t j = 0; j < dimension; ++j) {
      if (!std::isfinite(bounds.lower[j]) || !std::isfinite(bounds.upper[j]) ||
          bounds.lower[j] > bounds.upper[j]) {
        throw ContractViolation("invalid bounds for decision variable " + std::to_string(j + 1));
      }
    }
    if (senses.size() != objectives) {
      throw ContractViolation("senses must list one entry per objective");
    }
    if (const auto* ext = std::get_if<ExternalEvaluator>(&evaluator); ext && ext->command.empty()) {
      throw ContractViolation("external evaluator command is empty");
    }
  }
};

/// Standard ZDT1/ZDT3 description with the unit box.
inline ProblemSpec zdt_spec(const std::string& tag, std::size_t dimension = 30) {
  if (tag != "zdt1" && tag != "zdt3") throw ContractViolation("unknown builtin problem '" + tag + "'");
  ProblemSpec spec;
  spec.name = tag;
  spec.objectives = 2;
  spec.dimension = dimension;
  spec.bounds = {std::vector<double>(dimension, 0.0), std::vector<double>(dimension, 1.0)};
  spec.senses = {Sense::minimize, Sense::minimize};
  spec.evaluator = BuiltinEvaluator{tag};
  return spec;
}

/// Raw objective function, in the problem's own senses.
class Evaluator {
public:
  virtual ~Evaluator() = default;
  virtual ObjectiveVector evaluate(const DecisionVector& x) = 0;
};

class FunctionEvaluator final : public Evaluator {
public:
  explicit FunctionEvaluator(std::function<ObjectiveVector(const DecisionVector&)> fn)
      : fn_(std::move(fn)) {}
  ObjectiveVector evaluate(const DecisionVector& x) override { return fn_(x); }

private:
  std::function<ObjectiveVector(const DecisionVector&)> fn_;
};

inline std::unique_ptr<Evaluator> make_builtin_evaluator(const std::string& tag) {
  if (tag == "zdt1") {
    return std::make_unique<FunctionEvaluator>([](const DecisionVector& x) { return eval_zdt1(x); });
  }
  if (tag == "zdt3") {
    return std::make_unique<FunctionEvaluator>([](const DecisionVector& x) { return eval_zdt3(x); });
  }
  throw ContractViolation("unknown builtin evaluator '" + tag + "'");
}

/// A problem bound to its evaluator. `evaluate` returns canonical (all-minimize)
/// objectives: maximized objectives are negated here and nowhere else.
class Problem {
public:
  Problem(ProblemSpec spec, std::unique_ptr<Evaluator> evaluator)
      : spec_(std::move(spec)), evaluator_(std::move(evaluator)) {
    spec_.validate();
  }

  const ProblemSpec& spec() const noexcept { return spec_; }
  std::size_t objectives() const noexcept { return spec_.objectives; }
  std::size_t dimension() const noexcept { return spec_.dimension; }
  const Box& bounds() const noexcept { return spec_.bounds; }

  ObjectiveVector evaluate(const DecisionVector& x) {
    if (!spec_.bounds.contains(x)) throw ContractViolation("decision vector outside problem bounds");
    ObjectiveVector z;
    try {
      z = evaluator_->evaluate(x);
    } catch (const EvaluationError&) {
      throw;
    } catch (const std::exception& e) {
      throw EvaluationError(std::string("evaluator failed: ") + e.what());
    }
    if (z.size() != spec_.objectives) {
      throw EvaluationError("evaluator returned " + std::to_string(z.size()) + " objectives, expected " +
                            std::to_string(spec_.objectives));
    }
    if (!all_finite(z)) throw EvaluationError("evaluator returned a non-finite objective value");
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (spec_.senses[i] == Sense::maximize) z[i] = -z[i];
    }
    return z;
  }

private:
  ProblemSpec spec_;
  std::unique_ptr<Evaluator> evaluator_;
};

}  // namespace pups
