#pragma once

#include <cstdint>

#include "tba/cost_model.hpp"
#include "tba/instance.hpp"

namespace tba {

// splitmix64; fixed here so that generated instances are reproducible across
// platforms and bindings
struct splitmix64 {
    std::uint64_t state = 0;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double uniform01() { return double(next() >> 11) * 0x1.0p-53; }  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    bool bernoulli(double p) { return uniform01() < p; }
    double gaussian();  // Box-Muller, two draws per sample
};

// independent stream per (seed, tag); frame streams use tag = frame * 4 + channel
splitmix64 substream(std::uint64_t seed, std::uint64_t tag);

struct gen_params {
    std::int32_t frames = 10;
    std::int32_t initial_objects = 10;
    double division_prob = 0.0;          // per object per frame
    double motion_sigma = 3.0;           // pixels
    std::int32_t hypotheses_per_object = 2;
    double candidate_radius = 25.0;      // link gating distance, pixels
    std::uint64_t seed = 1;

    bool valid() const {
        return frames >= 1 && initial_objects >= 0 && division_prob >= 0.0 && division_prob <= 1.0 &&
               motion_sigma >= 0.0 && hypotheses_per_object >= 1 && candidate_radius >= 0.0;
    }
};

struct generated {
    instance inst;
    assignment ground_truth;
};

// Simulates point objects on a Gaussian random walk with Bernoulli divisions
// inside a fixed arena (leaving objects disappear), emits
// hypotheses_per_object mutually conflicting jittered hypotheses per object
// and radius-gated candidate links, and prices everything with the cost
// model. The true hypothesis chain is always linkable and returned as a
// feasible ground-truth assignment.
generated generate(const gen_params& p, const cost_params& costs = cost_params::defaults());

}  // namespace tba
