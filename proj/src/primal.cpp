#include "tba/primal.hpp"

#include <algorithm>
#include <stdexcept>

#include "tba/set_packing.hpp"

namespace tba {

std::vector<double> score_detections(const decomposed_graph& g, const reparametrization& lam, std::int32_t frame) {
    const auto& dets = g.detections_in_frame(frame);
    std::vector<double> scores;
    scores.reserve(dets.size());
    for (std::uint32_t u : dets) {
        const detection_factor& f = g.detection(u);
        double in_part = 0.0;
        for (std::size_t k = 0; k < f.in_edges.size(); ++k)
            in_part = std::min(in_part, repa_in_cost(g, lam, u, k));
        double out_part = 0.0;
        for (std::size_t k = 0; k < f.out_edges.size(); ++k)
            out_part = std::min(out_part, repa_out_cost(g, lam, u, k));
        scores.push_back(repa_det_cost(g, lam, u) + in_part + out_part);
    }
    return scores;
}

std::vector<std::uint8_t> resolve_conflicts(const decomposed_graph& g, const reparametrization& lam, std::int32_t frame) {
    const auto& dets = g.detections_in_frame(frame);

    packing_problem problem;
    problem.scores = score_detections(g, lam, frame);
    for (std::uint32_t c : g.conflicts_in_frame(frame)) {
        std::vector<std::uint32_t> members;
        for (std::uint32_t u : g.conflict(c).members) {
            const auto it = std::lower_bound(dets.begin(), dets.end(), u);
            members.push_back(std::uint32_t(it - dets.begin()));
        }
        problem.conflicts.push_back(std::move(members));
    }

    return solve_packing(problem).active;
}

partial_assignment partial_assignment::make(const decomposed_graph& g) {
    partial_assignment p;
    const std::size_t n = g.detection_count();
    p.status.assign(n, det_status::off);
    p.in_choice.assign(n, -1);
    p.out_choice.assign(n, -1);
    p.in_fixed.assign(n, 0);
    p.out_fixed.assign(n, 0);
    return p;
}

void apply_conflict_resolution(const decomposed_graph& g, const reparametrization& lam, std::int32_t frame,
                               partial_assignment& p) {
    const auto& dets = g.detections_in_frame(frame);
    const std::vector<std::uint8_t> keep = resolve_conflicts(g, lam, frame);
    for (std::size_t i = 0; i < dets.size(); ++i)
        p.status[dets[i]] = keep[i] ? partial_assignment::det_status::on_unassigned
                                    : partial_assignment::det_status::off;
}

namespace {

using det_status = partial_assignment::det_status;

bool is_on(const partial_assignment& p, std::size_t u) { return p.status[u] != det_status::off; }

// other child of a division relative to child u
std::size_t sibling_of(const decomposed_graph& g, const transition& tr, std::size_t u) {
    const instance_index& idx = g.index();
    const std::size_t to1 = idx.detection_ordinal(tr.to1);
    return to1 == u ? idx.detection_ordinal(tr.to2) : to1;
}

void assign_frame_forward(const decomposed_graph& g, const reparametrization& lam, partial_assignment& p,
                          const std::vector<std::uint32_t>& order) {
    const instance& inst = g.problem();
    const instance_index& idx = g.index();

    for (std::uint32_t u : order) {
        if (p.in_fixed[u])
            continue;  // already decided through a division sibling

        const detection_factor& f = g.detection(u);
        double best_cost = 0.0;  // the no-incoming option is always available
        std::int32_t best_edge = -1;
        for (std::size_t k = 0; k < f.in_edges.size(); ++k) {
            const detection_factor::edge& e = f.in_edges[k];
            const transition& tr = inst.transitions[e.transition];
            const std::size_t src = idx.detection_ordinal(tr.from);
            if (!is_on(p, src) || p.out_fixed[src])
                continue;
            if (e.division) {
                const std::size_t sib = sibling_of(g, tr, u);
                if (!is_on(p, sib) || p.in_fixed[sib])
                    continue;
            }
            const double cost = repa_in_cost(g, lam, u, k);
            if (cost < best_cost) {
                best_cost = cost;
                best_edge = std::int32_t(k);
            }
        }

        p.in_fixed[u] = 1;
        p.status[u] = det_status::on_assigned;
        if (best_edge >= 0) {
            const detection_factor::edge& e = f.in_edges[std::size_t(best_edge)];
            const transition& tr = inst.transitions[e.transition];
            const std::size_t src = idx.detection_ordinal(tr.from);
            p.in_choice[u] = std::int32_t(e.transition);
            p.out_choice[src] = std::int32_t(e.transition);
            p.out_fixed[src] = 1;
            if (e.division) {
                const std::size_t sib = sibling_of(g, tr, u);
                p.in_choice[sib] = std::int32_t(e.transition);
                p.in_fixed[sib] = 1;
                p.status[sib] = det_status::on_assigned;
            }
        }
    }
}

void assign_frame_backward(const decomposed_graph& g, const reparametrization& lam, partial_assignment& p,
                           const std::vector<std::uint32_t>& order) {
    const instance& inst = g.problem();
    const instance_index& idx = g.index();

    for (std::uint32_t u : order) {
        if (p.out_fixed[u])
            continue;

        const detection_factor& f = g.detection(u);
        double best_cost = 0.0;
        std::int32_t best_edge = -1;
        for (std::size_t k = 0; k < f.out_edges.size(); ++k) {
            const detection_factor::edge& e = f.out_edges[k];
            const transition& tr = inst.transitions[e.transition];
            const std::size_t to1 = idx.detection_ordinal(tr.to1);
            if (!is_on(p, to1) || p.in_fixed[to1])
                continue;
            if (e.division) {
                const std::size_t to2 = idx.detection_ordinal(tr.to2);
                if (!is_on(p, to2) || p.in_fixed[to2])
                    continue;
            }
            const double cost = repa_out_cost(g, lam, u, k);
            if (cost < best_cost) {
                best_cost = cost;
                best_edge = std::int32_t(k);
            }
        }

        p.out_fixed[u] = 1;
        p.status[u] = det_status::on_assigned;
        if (best_edge >= 0) {
            const detection_factor::edge& e = f.out_edges[std::size_t(best_edge)];
            const transition& tr = inst.transitions[e.transition];
            p.out_choice[u] = std::int32_t(e.transition);
            auto claim = [&](detection_id target) {
                const std::size_t t = idx.detection_ordinal(target);
                p.in_choice[t] = std::int32_t(e.transition);
                p.in_fixed[t] = 1;
                p.status[t] = det_status::on_assigned;
            };
            claim(tr.to1);
            if (e.division)
                claim(tr.to2);
        }
    }
}

}  // namespace

void assign_frame(const decomposed_graph& g, const reparametrization& lam, std::int32_t frame,
                  sweep_direction direction, partial_assignment& p) {
    const auto& dets = g.detections_in_frame(frame);
    const std::vector<double> scores = score_detections(g, lam, frame);

    std::vector<std::uint32_t> order;
    order.reserve(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i)
        if (is_on(p, dets[i]))
            order.push_back(std::uint32_t(i));
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b])
            return scores[a] < scores[b];
        return g.detection(dets[a]).id.index < g.detection(dets[b]).id.index;
    });
    for (auto& i : order) i = dets[i];

    if (direction == sweep_direction::forward)
        assign_frame_forward(g, lam, p, order);
    else
        assign_frame_backward(g, lam, p, order);
}

assignment to_assignment(const decomposed_graph& g, const partial_assignment& p) {
    assignment x = assignment::all_off(g.problem());
    for (std::size_t u = 0; u < g.detection_count(); ++u) {
        if (p.status[u] == det_status::off)
            continue;
        x.detection_on[u] = 1;
        if (p.in_choice[u] >= 0)
            x.transition_on[std::size_t(p.in_choice[u])] = 1;
        if (p.out_choice[u] >= 0)
            x.transition_on[std::size_t(p.out_choice[u])] = 1;
    }
    return x;
}

namespace {

primal_result extract_one(const decomposed_graph& g, const reparametrization& lam, sweep_direction direction) {
    partial_assignment p = partial_assignment::make(g);
    const std::int32_t T = g.frame_count();
    for (std::int32_t step = 0; step < T; ++step) {
        const std::int32_t frame = direction == sweep_direction::forward ? step + 1 : T - step;
        apply_conflict_resolution(g, lam, frame, p);
        assign_frame(g, lam, frame, direction, p);
    }

    primal_result result;
    result.x = to_assignment(g, p);
    const feasibility_report report = check_feasible(g.problem(), g.index(), result.x);
    if (!report.ok())
        throw std::logic_error("primal heuristic produced an infeasible assignment: " + report.violations.front());
    result.energy = energy(g.problem(), g.index(), result.x).value;
    return result;
}

}  // namespace

primal_result extract_primal(const decomposed_graph& g, const reparametrization& lam, primal_direction dir) {
    if (dir == primal_direction::forward)
        return extract_one(g, lam, sweep_direction::forward);
    if (dir == primal_direction::backward)
        return extract_one(g, lam, sweep_direction::backward);

    primal_result fwd = extract_one(g, lam, sweep_direction::forward);
    primal_result bwd = extract_one(g, lam, sweep_direction::backward);
    return fwd.energy <= bwd.energy ? fwd : bwd;
}

}  // namespace tba
