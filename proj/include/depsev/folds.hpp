#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace depsev {

// Fold id per instance. Each class is shuffled with `seed` and dealt
// round-robin, continuing across classes, so fold sizes differ by at most one
// and every fold sees both classes in proportion.
std::vector<int> stratified_folds(std::span<const int> classes, int folds, std::uint64_t seed);

}  // namespace depsev
