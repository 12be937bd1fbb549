#pragma once

#include <vector>

#include "rankprox/image.hpp"

namespace rankprox {

// A family of images derived from one source whose true regression targets
// are ordered by construction. phi encodes that order: phi[i] <= phi[j]
// guarantees target(i) <= target(j). Members of different groups are never
// comparable.
struct RankedGroup {
    int source_id = 0;
    std::vector<Image> members;
    std::vector<double> phi;
};

// Unordered pairs (i, j) within the group whose phi values differ.
long long comparable_pair_count(const RankedGroup& g);

}  // namespace rankprox
