#pragma once

#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "fbflow/core.hpp"

namespace fbflow {

/// Recorded history of a discrete solver run or an integrated flow. All
/// populated per-sample containers share the same length; scalar series may
/// contain NaN entries where a quantity is undefined (e.g. the squared step
/// at the first sample).
struct Trace {
  std::vector<double> index;   // iteration count or time
  std::vector<Vector> states;  // x
  std::vector<Vector> duals;   // v with v in dPhi(x); empty if unavailable
  std::vector<Vector> ys;      // governing y sequence; empty if unused

  // false when duals[j] certifies a point other than states[j] (for the
  // semigroup discretization the multiplier belongs to the next iterate);
  // dual-based diagnostics are skipped in that case
  bool duals_at_states = true;

  bool converged = false;
  std::vector<std::string> warnings;

  // deque: references returned by add_series stay valid as series are added
  std::deque<std::pair<std::string, std::vector<double>>> series;

  std::vector<double>& add_series(const std::string& name) {
    for (auto& [n, s] : series) {
      if (n == name) return s;
    }
    series.emplace_back(name, std::vector<double>());
    return series.back().second;
  }

  [[nodiscard]] const std::vector<double>* find_series(
      const std::string& name) const {
    for (const auto& [n, s] : series) {
      if (n == name) return &s;
    }
    return nullptr;
  }

  [[nodiscard]] size_t size() const { return index.size(); }

  [[nodiscard]] const Vector& final_state() const {
    if (states.empty()) throw InputError("Trace: no states recorded");
    return states.back();
  }

  [[nodiscard]] double final_series_value(const std::string& name) const {
    const auto* s = find_series(name);
    if (s == nullptr || s->empty()) {
      throw InputError("Trace: series '" + name + "' not recorded");
    }
    return s->back();
  }
};

namespace detail {

/// Appends ||x_j - x_{j-1}||^2 for the just-recorded state (NaN at the
/// first sample).
inline void push_step_norm(std::vector<double>& s,
                           const std::vector<Vector>& states) {
  const size_t j = states.size() - 1;
  s.push_back(j == 0 ? kNaN : (states[j] - states[j - 1]).squaredNorm());
}

}  // namespace detail

}  // namespace fbflow
