#pragma once

#include <cstdint>

#include "tba/instance.hpp"

namespace tba {

struct oracle_result {
    double optimum = 0.0;
    assignment argmin;
    std::uint64_t explored = 0;  // feasible assignments visited
};

// Exhaustive minimization of the standard model for tiny instances. Variables
// are enumerated detections-first in instance order with constraint pruning;
// ties resolve to the lexicographically smallest assignment. Throws
// std::invalid_argument when the instance is invalid or has more than
// `budget` binary variables.
oracle_result brute_force_solve(const instance& inst, int budget = 24);

}  // namespace tba
