#pragma once

#include <cstdint>
#include <vector>

namespace tba {

// min <s, mu> over binary mu subject to at most one active member per
// conflict set. Constraints are kept as explicit sets, not pairwise cliques.
struct packing_problem {
    std::vector<double> scores;
    std::vector<std::vector<std::uint32_t>> conflicts;  // member indices into scores
};

struct packing_result {
    std::vector<std::uint8_t> active;
    double value = 0.0;
};

// Exact solver. Nonnegative scores are fixed to zero, the remaining conflict
// graph is split into connected components and each component is solved by
// branch and bound (branching on the most negative unfixed score, bound =
// current value + sum of remaining negative scores). Ties between optima are
// broken towards the lexicographically smallest mu.
packing_result solve_packing(const packing_problem& p);

}  // namespace tba
