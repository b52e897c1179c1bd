#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "pups/dominance.hpp"
#include "pups/types.hpp"

namespace pups {

/// Unrestricted-size non-dominated archive, kept in ascending eval_index order.
///
/// Inserting every evaluated point in evaluation order keeps the archive equal to the
/// non-dominated subset of everything inserted so far: a rejected point is dominated by
/// a member, and an evicted member by the newcomer.
class Archive {
public:
  const std::vector<Solution>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }

  /// Returns true when `s` entered the archive. Points equal in objective space to a
  /// member are kept alongside it.
  bool insert(const Solution& s) {
    for (const auto& m : members_) {
      if (dominates(m.objectives, s.objectives)) return false;
    }
    std::erase_if(members_, [&](const Solution& m) { return dominates(s.objectives, m.objectives); });
    const auto pos = std::upper_bound(
        members_.begin(), members_.end(), s.eval_index,
        [](EvalIndex idx, const Solution& m) { return idx < m.eval_index; });
    members_.insert(pos, s);
    return true;
  }

  void clear() noexcept { members_.clear(); }

private:
  std::vector<Solution> members_;
};

}  // namespace pups
