#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "tba/decomposition.hpp"

namespace tba {

// Sparse dual update: increments on a few lambda coordinates, zero elsewhere.
struct dual_update {
    std::vector<std::pair<std::uint32_t, double>> deltas;

    void clear() { deltas.clear(); }
    void add(std::uint32_t coord, double delta) { deltas.emplace_back(coord, delta); }
};

void apply(reparametrization& lam, const dual_update& update);

// The four monotone updates. Each is computed on the current reparametrized
// costs and returns the increment to apply to lambda.
//
// conflict_update_detection: pushes the minimal active cost of a detection
// evenly onto its conflict edges; afterwards the minimal active cost is 0.
void conflict_update_detection(const decomposed_graph& g, const reparametrization& lam, std::size_t u, dual_update& out);

// conflict_update_conflict: levels all conflict costs at the mean of the best
// and second-best state; only the most promising member keeps a negative
// activation cost on its detection side.
void conflict_update_conflict(const decomposed_graph& g, const reparametrization& lam, std::size_t c, dual_update& out);

// transition updates: push cost across outgoing (forward) or incoming
// (backward) edges so that every conditioned-on-edge active minimum equals
// the min-marginal bound m.
void transition_update_forward(const decomposed_graph& g, const reparametrization& lam, std::size_t u, dual_update& out);
void transition_update_backward(const decomposed_graph& g, const reparametrization& lam, std::size_t u, dual_update& out);

dual_update conflict_update_detection(const decomposed_graph& g, const reparametrization& lam, std::size_t u);
dual_update conflict_update_conflict(const decomposed_graph& g, const reparametrization& lam, std::size_t c);
dual_update transition_update_forward(const decomposed_graph& g, const reparametrization& lam, std::size_t u);
dual_update transition_update_backward(const decomposed_graph& g, const reparametrization& lam, std::size_t u);

enum class sweep_direction : std::uint8_t { forward, backward };

const char* to_string(sweep_direction d);

// invoked once per time step after the conflict updates, before the
// transition updates
using primal_hook = std::function<void(std::int32_t frame, sweep_direction direction)>;

struct sweep_result {
    double dual = 0.0;
    std::uint64_t cost_ops = 0;  // elementary cost reads/writes
};

// One pass of the update schedule over all time steps. Updates are applied
// immediately, Gauss-Seidel style. When check_monotone is set the dual value
// is re-evaluated after every single update and a drop beyond
// 1e-9*(1+|D|) raises std::logic_error.
sweep_result sweep(const decomposed_graph& g, reparametrization& lam, sweep_direction direction,
                   const primal_hook& hook = {}, bool check_monotone = false);

enum class primal_direction : std::uint8_t { both, forward, backward };

struct solver_config {
    std::uint32_t max_sweeps = 1000;
    double gap_tolerance = 1e-4;    // relative primal/dual gap
    double stall_tolerance = 1e-9;  // per-sweep dual improvement below
                                    // stall_tolerance*(1+|D|) counts as a stall
    std::uint32_t primal_period = 25;
    primal_direction primal_dir = primal_direction::both;
    bool check_monotone = false;

    bool valid() const { return max_sweeps >= 1 && gap_tolerance >= 0.0 && stall_tolerance >= 0.0 && primal_period >= 1; }
};

struct convergence_record {
    std::uint32_t sweep = 0;
    sweep_direction direction = sweep_direction::forward;
    double dual_bound = 0.0;
    std::optional<double> primal_energy;
    double wall_time_s = 0.0;
};

struct solve_result {
    assignment best_assignment;
    double primal_energy = 0.0;
    double dual_bound = 0.0;
    double gap = 0.0;
    std::uint32_t sweeps = 0;
    std::vector<convergence_record> log;
};

// (primal - dual) / |dual|; 0 when the difference vanishes, infinity when the
// bound is 0 but the difference is not.
double relative_gap(double primal, double dual);

// Alternating forward/backward sweeps with periodic primal extraction until
// the gap or stall criterion triggers or max_sweeps is reached.
solve_result run(const decomposed_graph& g, const solver_config& config);

}  // namespace tba
