#pragma once

#include <cstdint>
#include <compare>
#include <string>
#include <unordered_map>
#include <vector>

namespace tba {

// A detection is addressed by its time step (1-based) and an index within
// that time step. The pair is unique per instance.
struct detection_id {
    std::int32_t frame = 0;
    std::int32_t index = 0;

    auto operator<=>(const detection_id&) const = default;
};

struct detection {
    detection_id id;
    double cost = 0.0;
    double appearance_cost = 0.0;
    double disappearance_cost = 0.0;
};

struct transition {
    enum class kind_t : std::uint8_t { move, division };

    kind_t kind = kind_t::move;
    detection_id from;
    detection_id to1;
    detection_id to2;  // only meaningful for divisions
    double cost = 0.0;

    static transition make_move(detection_id from, detection_id to, double cost);
    static transition make_division(detection_id from, detection_id to1, detection_id to2, double cost);
};

// At most one member of a conflict set may be active.
struct conflict_set {
    std::int32_t frame = 0;
    std::vector<detection_id> members;
};

struct instance {
    std::int32_t frame_count = 1;
    std::vector<detection> detections;
    std::vector<transition> transitions;
    std::vector<conflict_set> conflicts;
};

// 0/1 valuation of every detection and transition variable, stored parallel
// to instance.detections / instance.transitions.
struct assignment {
    std::vector<std::uint8_t> detection_on;
    std::vector<std::uint8_t> transition_on;

    static assignment all_off(const instance& inst);
};

struct validation_report {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

validation_report validate(const instance& inst);

struct feasibility_report {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

struct energy_result {
    double value = 0.0;
    bool feasible = true;
};

// Lookup structure for a (valid) instance: id resolution, per-detection
// incident transitions and conflict sets, per-frame listings.
class instance_index {
public:
    explicit instance_index(const instance& inst);

    std::size_t detection_count() const { return in_transitions_.size(); }
    bool has_detection(detection_id id) const;
    std::size_t detection_ordinal(detection_id id) const;  // throws std::out_of_range

    const std::vector<std::uint32_t>& in_transitions(std::size_t det) const { return in_transitions_[det]; }
    const std::vector<std::uint32_t>& out_transitions(std::size_t det) const { return out_transitions_[det]; }
    const std::vector<std::uint32_t>& conflicts_of(std::size_t det) const { return conflicts_of_[det]; }

    // frame is 1-based
    const std::vector<std::uint32_t>& detections_in_frame(std::int32_t frame) const;
    const std::vector<std::uint32_t>& conflicts_in_frame(std::int32_t frame) const;

private:
    struct id_hash {
        std::size_t operator()(const detection_id& id) const {
            return std::hash<std::uint64_t>{}((std::uint64_t(std::uint32_t(id.frame)) << 32) | std::uint32_t(id.index));
        }
    };

    std::unordered_map<detection_id, std::size_t, id_hash> ordinal_;
    std::vector<std::vector<std::uint32_t>> in_transitions_;
    std::vector<std::vector<std::uint32_t>> out_transitions_;
    std::vector<std::vector<std::uint32_t>> conflicts_of_;
    std::vector<std::vector<std::uint32_t>> frame_detections_;  // [frame-1]
    std::vector<std::vector<std::uint32_t>> frame_conflicts_;
};

// Checks the transition coupling, uniqueness and conflict constraints of the
// standard model for a total assignment.
feasibility_report check_feasible(const instance& inst, const assignment& x);
feasibility_report check_feasible(const instance& inst, const instance_index& idx, const assignment& x);

// Cost of an assignment: sum of active detection and transition costs, plus
// the appearance cost of every active detection without an active incoming
// transition (frames > 1) and the disappearance cost of every active
// detection without an active outgoing transition (frames < T).
energy_result energy(const instance& inst, const assignment& x);
energy_result energy(const instance& inst, const instance_index& idx, const assignment& x);

std::string to_string(detection_id id);
std::string to_string(const transition& t);

}  // namespace tba
