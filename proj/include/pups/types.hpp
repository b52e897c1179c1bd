#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pups {

/// Objective values, always in minimization sense.
using ObjectiveVector = std::vector<double>;
using DecisionVector = std::vector<double>;
using EvalIndex = std::uint64_t;

/// Raised when a caller breaks a precondition (length mismatch, out-of-box input, ...).
class ContractViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an objective evaluation cannot produce a usable objective vector.
class EvaluationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Solution {
  DecisionVector decision;
  ObjectiveVector objectives;
  EvalIndex eval_index = 0;

  friend bool operator==(const Solution&, const Solution&) = default;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Per-objective acceptable [lower, upper] bounds. Infinite bounds mean "no preference".
struct PreferenceRanges {
  std::vector<double> lower;
  std::vector<double> upper;

  static PreferenceRanges unbounded(std::size_t objectives) {
    return {std::vector<double>(objectives, -kInf), std::vector<double>(objectives, kInf)};
  }

  std::size_t size() const noexcept { return lower.size(); }

  bool is_unbounded() const noexcept {
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (lower[i] != -kInf || upper[i] != kInf) return false;
    }
    return true;
  }

  /// Throws ContractViolation unless the ranges are well formed for `objectives` objectives.
  void validate(std::size_t objectives) const {
    if (lower.size() != objectives || upper.size() != objectives) {
      throw ContractViolation("preference ranges need exactly " + std::to_string(objectives) +
                              " lower and upper bounds");
    }
    for (std::size_t i = 0; i < objectives; ++i) {
      if (std::isnan(lower[i]) || std::isnan(upper[i])) {
        throw ContractViolation("preference range bound is NaN for objective " +
                                std::to_string(i + 1));
      }
      if (lower[i] > upper[i]) {
        throw ContractViolation("lower bound exceeds upper bound for objective " +
                                std::to_string(i + 1));
      }
    }
  }

  friend bool operator==(const PreferenceRanges&, const PreferenceRanges&) = default;
};

/// Box bounds of the decision space.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dimension() const noexcept { return lower.size(); }

  bool contains(const DecisionVector& x) const noexcept {
    if (x.size() != lower.size()) return false;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (!(x[j] >= lower[j] && x[j] <= upper[j])) return false;
    }
    return true;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

inline bool all_finite(const std::vector<double>& values) noexcept {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace pups
