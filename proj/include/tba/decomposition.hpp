#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tba/instance.hpp"

namespace tba {

// One node of the decomposed graph per detection. It owns the detection
// activation variable plus one copy of every incident transition variable.
// Transition costs are split evenly across their copies (1/2 per move copy,
// 1/3 per division copy); appearance and disappearance costs are folded into
// det_cost and the in/out copies so that the decomposed energy of any coupled
// state equals the standard-model energy.
struct detection_factor {
    struct edge {
        std::uint32_t transition = 0;  // ordinal in instance.transitions
        double cost = 0.0;             // split (and folded) cost of this copy
        std::uint32_t lam = 0;         // dual coordinate; for division out-edges
                                       // the first of two consecutive coordinates
        bool division = false;
    };

    detection_id id;
    double det_cost = 0.0;
    std::vector<edge> in_edges;
    std::vector<edge> out_edges;
    std::vector<std::uint32_t> conflict_lams;  // dual coordinates of the conflict edges at this detection
};

// One node per conflict set. Costs are the theta part only (zero after
// decompose); the lambda part lives in the dual vector.
struct conflict_factor {
    std::int32_t frame = 0;
    std::vector<std::uint32_t> members;  // detection ordinals
    std::vector<double> costs;
    std::uint32_t lam_base = 0;  // member k couples through coordinate lam_base + k
};

// State of a detection factor: active bit plus at most one incoming and one
// outgoing edge choice (indices into in_edges/out_edges).
struct detection_factor_state {
    bool det = false;
    std::optional<std::uint32_t> in_choice;
    std::optional<std::uint32_t> out_choice;
};

struct conflict_factor_state {
    std::optional<std::uint32_t> active_member;
};

// Dual vector with one coordinate per move edge, two per division edge and
// one per conflict edge.
class reparametrization {
public:
    reparametrization() = default;
    explicit reparametrization(std::size_t size) : values_(size, 0.0) {}

    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

private:
    std::vector<double> values_;
};

class decomposed_graph {
public:
    const instance& problem() const { return inst_; }
    const instance_index& index() const { return idx_; }

    std::size_t detection_count() const { return detections_.size(); }
    std::size_t conflict_count() const { return conflicts_.size(); }
    const detection_factor& detection(std::size_t u) const { return detections_[u]; }
    const conflict_factor& conflict(std::size_t c) const { return conflicts_[c]; }

    std::int32_t frame_count() const { return inst_.frame_count; }
    const std::vector<std::uint32_t>& detections_in_frame(std::int32_t frame) const { return idx_.detections_in_frame(frame); }
    const std::vector<std::uint32_t>& conflicts_in_frame(std::int32_t frame) const { return idx_.conflicts_in_frame(frame); }

    std::size_t move_count() const { return n_moves_; }
    std::size_t division_count() const { return n_divisions_; }
    std::size_t conflict_edge_count() const { return n_conflict_edges_; }
    std::size_t lambda_size() const { return n_moves_ + 2 * n_divisions_ + n_conflict_edges_; }

    reparametrization make_lambda() const { return reparametrization(lambda_size()); }

    // dual coordinate(s) of a transition: offset of the move coordinate, or
    // of the first division coordinate (the second is offset + 1)
    std::uint32_t transition_lambda(std::uint32_t t) const { return transition_lam_[t]; }

    friend decomposed_graph decompose(const instance& inst);

private:
    instance inst_;
    instance_index idx_{instance{}};
    std::vector<detection_factor> detections_;
    std::vector<conflict_factor> conflicts_;
    std::vector<std::uint32_t> transition_lam_;
    std::size_t n_moves_ = 0;
    std::size_t n_divisions_ = 0;
    std::size_t n_conflict_edges_ = 0;
};

// Builds the decomposed graph; throws std::invalid_argument on invalid input.
decomposed_graph decompose(const instance& inst);

// Reparametrized costs of a single factor.
double repa_det_cost(const decomposed_graph& g, const reparametrization& lam, std::size_t u);
double repa_in_cost(const decomposed_graph& g, const reparametrization& lam, std::size_t u, std::size_t k);
double repa_out_cost(const decomposed_graph& g, const reparametrization& lam, std::size_t u, std::size_t k);
double repa_conflict_cost(const decomposed_graph& g, const reparametrization& lam, std::size_t c, std::size_t k);

struct detection_cost_vector {
    double det = 0.0;
    std::vector<double> in;
    std::vector<double> out;
};

detection_cost_vector reparametrized_costs(const decomposed_graph& g, const reparametrization& lam, std::size_t u);
std::vector<double> reparametrized_conflict_costs(const decomposed_graph& g, const reparametrization& lam, std::size_t c);

struct detection_factor_min {
    double value = 0.0;
    detection_factor_state state;
};

// Minimizer over the factor's state space in O(|in| + |out|). Ties prefer
// the off/none state, then the lowest edge index.
detection_factor_min min_detection_factor(const detection_cost_vector& costs);

struct conflict_factor_min {
    double best = 0.0;
    conflict_factor_state best_state;
    double second = 0.0;
    conflict_factor_state second_state;
};

// Two lowest of the |c|+1 conflict states (off costs 0). Ties prefer the off
// state, then the lowest member index.
conflict_factor_min min_conflict_factor(std::span<const double> costs);

double dual_value(const decomposed_graph& g, const reparametrization& lam);

// Full decomposed state; used to evaluate the decomposed energy and to check
// the coupling constraints.
struct decomposed_state {
    std::vector<detection_factor_state> det;
    std::vector<conflict_factor_state> conf;
};

// Energy of a decomposed state under the reparametrized costs (pass nullptr
// for the raw costs).
double decomposed_energy(const decomposed_graph& g, const reparametrization* lam, const decomposed_state& s);

bool coupling_holds(const decomposed_graph& g, const decomposed_state& s);

// Lifts a feasible standard-model assignment to the (unique) coupled
// decomposed state.
decomposed_state lift_assignment(const decomposed_graph& g, const assignment& x);

}  // namespace tba
