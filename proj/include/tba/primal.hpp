#pragma once

#include <cstdint>
#include <vector>

#include "tba/decomposition.hpp"
#include "tba/dual_bca.hpp"

namespace tba {

// s(v): cheapest reparametrized cost of an active state of v. Returned
// parallel to detections_in_frame(frame).
std::vector<double> score_detections(const decomposed_graph& g, const reparametrization& lam, std::int32_t frame);

// Solves the weighted set packing over the frame's scores and conflict sets;
// 1 = keep (OnUnassigned), 0 = off. Parallel to detections_in_frame(frame).
std::vector<std::uint8_t> resolve_conflicts(const decomposed_graph& g, const reparametrization& lam, std::int32_t frame);

struct partial_assignment {
    enum class det_status : std::uint8_t { off, on_unassigned, on_assigned };

    std::vector<det_status> status;     // per detection ordinal
    std::vector<std::int32_t> in_choice;   // active incoming transition ordinal, -1 = none
    std::vector<std::int32_t> out_choice;  // active outgoing transition ordinal, -1 = none
    std::vector<std::uint8_t> in_fixed;
    std::vector<std::uint8_t> out_fixed;

    static partial_assignment make(const decomposed_graph& g);
};

// Marks the frame's detections off / on according to resolve_conflicts.
void apply_conflict_resolution(const decomposed_graph& g, const reparametrization& lam, std::int32_t frame,
                               partial_assignment& p);

// Processes the frame's active detections in ascending score order. Forward
// direction assigns incoming choices (restricted to edges whose source still
// has a free outgoing slot and, for divisions, whose sibling is on with a
// free incoming slot); the chosen edge is propagated to the source and the
// sibling immediately. Backward direction mirrors this with outgoing choices.
void assign_frame(const decomposed_graph& g, const reparametrization& lam, std::int32_t frame,
                  sweep_direction direction, partial_assignment& p);

// Finalizes a partial assignment into a standard-model assignment; leftover
// OnUnassigned detections keep the isolated state.
assignment to_assignment(const decomposed_graph& g, const partial_assignment& p);

struct primal_result {
    assignment x;
    double energy = 0.0;
};

// Runs the frame loop in the requested temporal direction(s) and returns the
// feasible assignment with the lower energy under the original costs.
// Throws std::logic_error if a produced assignment is infeasible.
primal_result extract_primal(const decomposed_graph& g, const reparametrization& lam,
                             primal_direction dir = primal_direction::both);

}  // namespace tba
