#pragma once

#include <string>
#include <vector>

namespace gradescore {

/// The n cyclic rotations of a base option order. Across the rotations every
/// option occupies every position exactly once (a Latin square on the option
/// set), so position effects cancel out of downstream tallies.
struct PermutationPlan {
  std::vector<std::string> option_ids;              // base order
  std::vector<std::vector<std::string>> rotations;  // n rotations, base order last
};

/// Builds the rotation plan for a set of distinct option ids. Rotation i is
/// the base order right-rotated i+1 times: the first rotation moves the last
/// option to the front, the n-th restores the base order.
///
/// Throws Error("empty option set") / Error("duplicate option id").
PermutationPlan cyclic_permutations(const std::vector<std::string>& option_ids);

/// True iff every (position, option) pair occurs exactly once across the
/// plan's rotations. Pure check, never throws.
bool verify_latin_square(const PermutationPlan& plan);

}  // namespace gradescore
