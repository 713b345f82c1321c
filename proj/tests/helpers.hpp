#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "tba/decomposition.hpp"
#include "tba/instance.hpp"

namespace tba::testing {

// mt19937_64 is fully specified by the standard; the distributions are not,
// so scaling is done by hand to keep expected values reproducible
struct rand_gen {
    std::mt19937_64 rng;

    explicit rand_gen(std::uint64_t seed) : rng(seed) {}

    int irange(int lo, int hi) {  // inclusive
        return lo + int(rng() % std::uint64_t(hi - lo + 1));
    }
    double real(double lo, double hi) { return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53); }
    bool chance(double p) { return real(0.0, 1.0) < p; }
};

struct instance_shape {
    int max_frames = 4;
    int max_detections_per_frame = 3;
    double move_prob = 0.4;
    double division_prob = 0.15;
    double conflict_prob = 0.5;
    bool boundary_costs = true;
};

inline instance random_instance(rand_gen& g, const instance_shape& shape = {}) {
    instance inst;
    inst.frame_count = g.irange(1, shape.max_frames);

    std::vector<std::vector<detection_id>> frames(std::size_t(inst.frame_count));
    for (std::int32_t t = 1; t <= inst.frame_count; ++t) {
        const int n = g.irange(0, shape.max_detections_per_frame);
        for (int i = 0; i < n; ++i) {
            detection d;
            d.id = {t, i};
            d.cost = g.real(-3.0, 3.0);
            if (shape.boundary_costs) {
                d.appearance_cost = g.real(0.0, 1.5);
                d.disappearance_cost = g.real(0.0, 1.5);
            }
            inst.detections.push_back(d);
            frames[std::size_t(t - 1)].push_back(d.id);
        }
    }

    for (std::int32_t t = 1; t < inst.frame_count; ++t) {
        const auto& here = frames[std::size_t(t - 1)];
        const auto& next = frames[std::size_t(t)];
        for (detection_id u : here)
            for (detection_id v : next)
                if (g.chance(shape.move_prob))
                    inst.transitions.push_back(transition::make_move(u, v, g.real(-1.0, 1.0)));
        for (detection_id u : here)
            for (std::size_t a = 0; a < next.size(); ++a)
                for (std::size_t b = a + 1; b < next.size(); ++b)
                    if (g.chance(shape.division_prob))
                        inst.transitions.push_back(
                            transition::make_division(u, next[a], next[b], g.real(-1.0, 1.5)));
    }

    for (std::int32_t t = 1; t <= inst.frame_count; ++t) {
        const auto& here = frames[std::size_t(t - 1)];
        if (here.size() < 2 || !g.chance(shape.conflict_prob))
            continue;
        std::vector<detection_id> pool = here;
        for (std::size_t i = pool.size(); i-- > 1;)
            std::swap(pool[i], pool[std::size_t(g.irange(0, int(i)))]);
        conflict_set c;
        c.frame = t;
        const int k = g.irange(2, int(pool.size()));
        c.members.assign(pool.begin(), pool.begin() + k);
        inst.conflicts.push_back(std::move(c));
    }

    return inst;
}

inline std::size_t variable_count(const instance& inst) {
    return inst.detections.size() + inst.transitions.size();
}

// random instance with at most `budget` binary variables (for oracle tests)
inline instance random_small_instance(rand_gen& g, std::size_t budget = 20, const instance_shape& shape = {}) {
    for (;;) {
        instance inst = random_instance(g, shape);
        if (variable_count(inst) <= budget)
            return inst;
    }
}

// feasible by construction: activate detections respecting conflicts, then
// transitions respecting activation and uniqueness
inline assignment random_feasible_assignment(rand_gen& g, const instance& inst, const instance_index& idx) {
    assignment x = assignment::all_off(inst);

    std::vector<int> conflict_active(inst.conflicts.size(), 0);
    std::vector<std::uint32_t> det_order(inst.detections.size());
    for (std::size_t i = 0; i < det_order.size(); ++i) det_order[i] = std::uint32_t(i);
    for (std::size_t i = det_order.size(); i-- > 1;)
        std::swap(det_order[i], det_order[std::size_t(g.irange(0, int(i)))]);

    for (std::uint32_t d : det_order) {
        if (!g.chance(0.6))
            continue;
        bool blocked = false;
        for (std::uint32_t c : idx.conflicts_of(d)) blocked = blocked || conflict_active[c] > 0;
        if (blocked)
            continue;
        x.detection_on[d] = 1;
        for (std::uint32_t c : idx.conflicts_of(d)) ++conflict_active[c];
    }

    std::vector<int> in_used(inst.detections.size(), 0), out_used(inst.detections.size(), 0);
    std::vector<std::uint32_t> tr_order(inst.transitions.size());
    for (std::size_t i = 0; i < tr_order.size(); ++i) tr_order[i] = std::uint32_t(i);
    for (std::size_t i = tr_order.size(); i-- > 1;)
        std::swap(tr_order[i], tr_order[std::size_t(g.irange(0, int(i)))]);

    for (std::uint32_t t : tr_order) {
        if (!g.chance(0.6))
            continue;
        const transition& tr = inst.transitions[t];
        const std::size_t from = idx.detection_ordinal(tr.from);
        const std::size_t to1 = idx.detection_ordinal(tr.to1);
        if (!x.detection_on[from] || !x.detection_on[to1] || out_used[from] || in_used[to1])
            continue;
        if (tr.kind == transition::kind_t::division) {
            const std::size_t to2 = idx.detection_ordinal(tr.to2);
            if (!x.detection_on[to2] || in_used[to2])
                continue;
            ++in_used[to2];
        }
        x.transition_on[t] = 1;
        ++out_used[from];
        ++in_used[to1];
    }

    return x;
}

// direct evaluation of the standard-model constraints, independent of
// instance_index and check_feasible
inline bool feasible_direct(const instance& inst, const assignment& x) {
    std::map<detection_id, std::size_t> pos;
    for (std::size_t d = 0; d < inst.detections.size(); ++d) pos[inst.detections[d].id] = d;
    auto on = [&](detection_id id) { return x.detection_on[pos.at(id)] != 0; };

    for (std::size_t t = 0; t < inst.transitions.size(); ++t) {
        if (!x.transition_on[t])
            continue;
        const transition& tr = inst.transitions[t];
        if (!on(tr.from) || !on(tr.to1))
            return false;
        if (tr.kind == transition::kind_t::division && !on(tr.to2))
            return false;
    }
    for (const detection& d : inst.detections) {
        int in = 0, out = 0;
        for (std::size_t t = 0; t < inst.transitions.size(); ++t) {
            if (!x.transition_on[t])
                continue;
            const transition& tr = inst.transitions[t];
            if (tr.from == d.id)
                ++out;
            if (tr.to1 == d.id || (tr.kind == transition::kind_t::division && tr.to2 == d.id))
                ++in;
        }
        if (in > 1 || out > 1)
            return false;
    }
    for (const conflict_set& c : inst.conflicts) {
        int active = 0;
        for (detection_id id : c.members) active += on(id) ? 1 : 0;
        if (active > 1)
            return false;
    }
    return true;
}

// exhaustive minimum over all detection factor states
inline double enumerate_detection_min(const detection_cost_vector& c) {
    double best = 0.0;  // off state
    for (std::size_t in = 0; in <= c.in.size(); ++in) {
        for (std::size_t out = 0; out <= c.out.size(); ++out) {
            double v = c.det;
            if (in < c.in.size())
                v += c.in[in];
            if (out < c.out.size())
                v += c.out[out];
            best = std::min(best, v);
        }
    }
    return best;
}

inline double enumerate_active_min(const detection_cost_vector& c) {
    double best = c.det;
    for (std::size_t in = 0; in <= c.in.size(); ++in) {
        for (std::size_t out = 0; out <= c.out.size(); ++out) {
            double v = c.det;
            if (in < c.in.size())
                v += c.in[in];
            if (out < c.out.size())
                v += c.out[out];
            best = std::min(best, v);
        }
    }
    return best;
}

inline reparametrization random_lambda(rand_gen& g, const decomposed_graph& graph, double span = 2.0) {
    reparametrization lam = graph.make_lambda();
    for (std::size_t i = 0; i < lam.size(); ++i) lam[i] = g.real(-span, span);
    return lam;
}

}  // namespace tba::testing
