#include "gradescore/permutation.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "gradescore/errors.hpp"

namespace gradescore {

PermutationPlan cyclic_permutations(const std::vector<std::string>& option_ids) {
  if (option_ids.empty()) throw Error("empty option set");
  std::unordered_set<std::string> seen;
  for (const auto& id : option_ids) {
    if (!seen.insert(id).second) throw Error("duplicate option id: " + id);
  }

  PermutationPlan plan;
  plan.option_ids = option_ids;
  plan.rotations.reserve(option_ids.size());

  std::vector<std::string> current = option_ids;
  for (std::size_t i = 0; i < option_ids.size(); ++i) {
    std::rotate(current.rbegin(), current.rbegin() + 1, current.rend());
    plan.rotations.push_back(current);
  }
  return plan;
}

bool verify_latin_square(const PermutationPlan& plan) {
  const std::size_t n = plan.option_ids.size();
  if (n == 0 || plan.rotations.size() != n) return false;

  std::unordered_map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < n; ++i) {
    if (!index_of.emplace(plan.option_ids[i], i).second) return false;
  }

  // occurrences[p * n + o]: times option o sits at position p.
  std::vector<unsigned> occurrences(n * n, 0);
  std::vector<bool> seen_in_rotation(n);
  for (const auto& rotation : plan.rotations) {
    if (rotation.size() != n) return false;
    seen_in_rotation.assign(n, false);
    for (std::size_t p = 0; p < n; ++p) {
      auto it = index_of.find(rotation[p]);
      if (it == index_of.end()) return false;
      if (seen_in_rotation[it->second]) return false;  // not a permutation
      seen_in_rotation[it->second] = true;
      ++occurrences[p * n + it->second];
    }
  }
  return std::all_of(occurrences.begin(), occurrences.end(),
                     [](unsigned c) { return c == 1; });
}

}  // namespace gradescore
