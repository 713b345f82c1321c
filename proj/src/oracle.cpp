#include "tba/oracle.hpp"

#include <limits>
#include <stdexcept>

namespace tba {

namespace {

struct enumerator {
    const instance& inst;
    const instance_index idx;
    const std::int32_t T;

    assignment current;
    std::vector<int> conflict_active;
    std::vector<int> in_used;
    std::vector<int> out_used;

    double best = std::numeric_limits<double>::infinity();
    assignment best_x;
    std::uint64_t explored = 0;

    explicit enumerator(const instance& i)
        : inst(i), idx(i), T(i.frame_count), current(assignment::all_off(i)) {
        conflict_active.assign(inst.conflicts.size(), 0);
        in_used.assign(inst.detections.size(), 0);
        out_used.assign(inst.detections.size(), 0);
    }

    // Appearance/disappearance are charged up front when a detection turns on
    // and refunded by the transition that explains the respective side, which
    // by the uniqueness constraints happens at most once per side.
    double detection_delta(std::size_t d) const {
        const detection& det = inst.detections[d];
        double delta = det.cost;
        if (det.id.frame > 1)
            delta += det.appearance_cost;
        if (det.id.frame < T)
            delta += det.disappearance_cost;
        return delta;
    }

    double transition_delta(std::size_t t) const {
        const transition& tr = inst.transitions[t];
        double delta = tr.cost;
        delta -= inst.detections[idx.detection_ordinal(tr.to1)].appearance_cost;
        if (tr.kind == transition::kind_t::division)
            delta -= inst.detections[idx.detection_ordinal(tr.to2)].appearance_cost;
        delta -= inst.detections[idx.detection_ordinal(tr.from)].disappearance_cost;
        return delta;
    }

    void leaf(double value) {
        ++explored;
        if (value < best) {
            best = value;
            best_x = current;
        }
    }

    void enumerate_transitions(std::size_t t, double value) {
        if (t == inst.transitions.size()) {
            leaf(value);
            return;
        }

        enumerate_transitions(t + 1, value);  // off first keeps lexicographic order

        const transition& tr = inst.transitions[t];
        const std::size_t from = idx.detection_ordinal(tr.from);
        const std::size_t to1 = idx.detection_ordinal(tr.to1);
        const std::size_t to2 =
            tr.kind == transition::kind_t::division ? idx.detection_ordinal(tr.to2) : std::size_t(0);

        if (!current.detection_on[from] || !current.detection_on[to1])
            return;
        if (tr.kind == transition::kind_t::division && !current.detection_on[to2])
            return;
        if (out_used[from] || in_used[to1])
            return;
        if (tr.kind == transition::kind_t::division && in_used[to2])
            return;

        ++out_used[from];
        ++in_used[to1];
        if (tr.kind == transition::kind_t::division)
            ++in_used[to2];
        current.transition_on[t] = 1;

        enumerate_transitions(t + 1, value + transition_delta(t));

        current.transition_on[t] = 0;
        --out_used[from];
        --in_used[to1];
        if (tr.kind == transition::kind_t::division)
            --in_used[to2];
    }

    void enumerate_detections(std::size_t d, double value) {
        if (d == inst.detections.size()) {
            enumerate_transitions(0, value);
            return;
        }

        enumerate_detections(d + 1, value);

        for (std::uint32_t c : idx.conflicts_of(d))
            if (conflict_active[c])
                return;

        for (std::uint32_t c : idx.conflicts_of(d)) ++conflict_active[c];
        current.detection_on[d] = 1;

        enumerate_detections(d + 1, value + detection_delta(d));

        current.detection_on[d] = 0;
        for (std::uint32_t c : idx.conflicts_of(d)) --conflict_active[c];
    }
};

}  // namespace

oracle_result brute_force_solve(const instance& inst, int budget) {
    {
        const validation_report report = validate(inst);
        if (!report.ok())
            throw std::invalid_argument("invalid instance: " + report.violations.front());
    }
    const std::size_t variables = inst.detections.size() + inst.transitions.size();
    if (variables > std::size_t(budget))
        throw std::invalid_argument("instance has " + std::to_string(variables) +
                                    " binary variables, over the oracle budget of " + std::to_string(budget));

    enumerator e(inst);
    e.best_x = assignment::all_off(inst);
    e.enumerate_detections(0, 0.0);

    return {e.best, std::move(e.best_x), e.explored};
}

}  // namespace tba
