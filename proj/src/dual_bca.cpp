#include "tba/dual_bca.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tba/primal.hpp"

namespace tba {

void apply(reparametrization& lam, const dual_update& update) {
    for (const auto& [coord, delta] : update.deltas)
        lam[coord] += delta;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct edge_minima {
    double min1 = kInf;       // cheapest edge cost
    double min2 = kInf;       // second cheapest edge cost
    double part = 0.0;        // min(0, min1): contribution of the choice incl. none
    bool none_chosen = true;  // x* picks the none option (ties prefer none)
};

template <typename CostFn>
edge_minima scan_edges(std::size_t count, CostFn&& cost) {
    edge_minima m;
    for (std::size_t k = 0; k < count; ++k) {
        const double v = cost(k);
        if (v < m.min1) {
            m.min2 = m.min1;
            m.min1 = v;
        } else if (v < m.min2) {
            m.min2 = v;
        }
    }
    if (m.min1 < 0.0) {
        m.part = m.min1;
        m.none_chosen = false;
    }
    return m;
}

// edge-choice cost of the differing second-best state. The none option is a
// valid differing choice whenever x* picked an edge; dropping it breaks the
// monotonicity guarantee (the paired cost must never exceed the cost of the
// active state without an edge).
double differing_choice_cost(const edge_minima& m) {
    if (m.none_chosen)
        return m.min1;  // infinity when there are no edges at all
    return std::min(0.0, m.min2);
}

}  // namespace

void conflict_update_detection(const decomposed_graph& g, const reparametrization& lam, std::size_t u, dual_update& out) {
    out.clear();
    const detection_factor& f = g.detection(u);
    if (f.conflict_lams.empty())
        return;

    const edge_minima in = scan_edges(f.in_edges.size(), [&](std::size_t k) { return repa_in_cost(g, lam, u, k); });
    const edge_minima ou = scan_edges(f.out_edges.size(), [&](std::size_t k) { return repa_out_cost(g, lam, u, k); });
    const double active_min = repa_det_cost(g, lam, u) + in.part + ou.part;

    const double delta = active_min / double(f.conflict_lams.size());
    for (std::uint32_t coord : f.conflict_lams)
        out.add(coord, delta);
}

void conflict_update_conflict(const decomposed_graph& g, const reparametrization& lam, std::size_t c, dual_update& out) {
    out.clear();
    const conflict_factor& f = g.conflict(c);

    double min1 = 0.0, min2 = kInf;  // off state costs 0
    for (std::size_t k = 0; k < f.members.size(); ++k) {
        const double v = repa_conflict_cost(g, lam, c, k);
        if (v < min1) {
            min2 = min1;
            min1 = v;
        } else if (v < min2) {
            min2 = v;
        }
    }
    const double level = 0.5 * (min1 + min2);

    for (std::size_t k = 0; k < f.members.size(); ++k)
        out.add(f.lam_base + std::uint32_t(k), level - repa_conflict_cost(g, lam, c, k));
}

namespace {

enum class trans_side { incoming, outgoing };

// Shared core of the two transition updates. Pushes cost across the edges of
// the given side so that all conditioned-on-edge active minima become equal
// to the min-marginal bound m = min{0, (cost(x*) + cost(differing state))/2}.
void transition_update(const decomposed_graph& g, const reparametrization& lam, std::size_t u, trans_side side,
                       dual_update& out) {
    out.clear();
    const detection_factor& f = g.detection(u);
    const auto& edges = side == trans_side::outgoing ? f.out_edges : f.in_edges;
    if (edges.empty())
        return;

    const edge_minima in = scan_edges(f.in_edges.size(), [&](std::size_t k) { return repa_in_cost(g, lam, u, k); });
    const edge_minima ou = scan_edges(f.out_edges.size(), [&](std::size_t k) { return repa_out_cost(g, lam, u, k); });
    const double det = repa_det_cost(g, lam, u);
    const edge_minima& target = side == trans_side::outgoing ? ou : in;
    const double other_part = side == trans_side::outgoing ? in.part : ou.part;

    const double best_active = det + in.part + ou.part;
    const double paired = det + other_part + differing_choice_cost(target);
    const double m = std::min(0.0, 0.5 * (best_active + paired));

    for (std::size_t k = 0; k < edges.size(); ++k) {
        const detection_factor::edge& e = edges[k];
        const double edge_cost =
            side == trans_side::outgoing ? repa_out_cost(g, lam, u, k) : repa_in_cost(g, lam, u, k);
        const double conditioned = det + other_part + edge_cost;
        if (side == trans_side::outgoing) {
            const double q = conditioned - m;
            if (e.division) {
                out.add(e.lam, 0.5 * q);
                out.add(e.lam + 1, 0.5 * q);
            } else {
                out.add(e.lam, q);
            }
        } else {
            // incoming copies carry +lambda, so the sign flips; division
            // in-edges touch only the child's own coordinate
            out.add(e.lam, m - conditioned);
        }
    }
}

}  // namespace

void transition_update_forward(const decomposed_graph& g, const reparametrization& lam, std::size_t u, dual_update& out) {
    transition_update(g, lam, u, trans_side::outgoing, out);
}

void transition_update_backward(const decomposed_graph& g, const reparametrization& lam, std::size_t u, dual_update& out) {
    transition_update(g, lam, u, trans_side::incoming, out);
}

dual_update conflict_update_detection(const decomposed_graph& g, const reparametrization& lam, std::size_t u) {
    dual_update out;
    conflict_update_detection(g, lam, u, out);
    return out;
}

dual_update conflict_update_conflict(const decomposed_graph& g, const reparametrization& lam, std::size_t c) {
    dual_update out;
    conflict_update_conflict(g, lam, c, out);
    return out;
}

dual_update transition_update_forward(const decomposed_graph& g, const reparametrization& lam, std::size_t u) {
    dual_update out;
    transition_update_forward(g, lam, u, out);
    return out;
}

dual_update transition_update_backward(const decomposed_graph& g, const reparametrization& lam, std::size_t u) {
    dual_update out;
    transition_update_backward(g, lam, u, out);
    return out;
}

const char* to_string(sweep_direction d) {
    return d == sweep_direction::forward ? "forward" : "backward";
}

sweep_result sweep(const decomposed_graph& g, reparametrization& lam, sweep_direction direction,
                   const primal_hook& hook, bool check_monotone) {
    sweep_result result;
    dual_update update;

    double guard = check_monotone ? dual_value(g, lam) : 0.0;
    auto apply_checked = [&](const dual_update& upd) {
        apply(lam, upd);
        if (check_monotone) {
            const double after = dual_value(g, lam);
            if (after < guard - 1e-9 * (1.0 + std::abs(guard)))
                throw std::logic_error("dual update decreased the bound");
            guard = after;
        }
    };

    const std::int32_t T = g.frame_count();
    for (std::int32_t step = 0; step < T; ++step) {
        const std::int32_t frame = direction == sweep_direction::forward ? step + 1 : T - step;

        for (std::uint32_t u : g.detections_in_frame(frame)) {
            const detection_factor& f = g.detection(u);
            if (f.conflict_lams.empty())
                continue;
            conflict_update_detection(g, lam, u, update);
            apply_checked(update);
            result.cost_ops += f.in_edges.size() + f.out_edges.size() + 2 * f.conflict_lams.size();
        }

        for (std::uint32_t c : g.conflicts_in_frame(frame)) {
            conflict_update_conflict(g, lam, c, update);
            apply_checked(update);
            result.cost_ops += 2 * g.conflict(c).members.size();
        }

        if (hook)
            hook(frame, direction);

        for (std::uint32_t u : g.detections_in_frame(frame)) {
            const detection_factor& f = g.detection(u);
            const bool has_edges =
                direction == sweep_direction::forward ? !f.out_edges.empty() : !f.in_edges.empty();
            if (!has_edges)
                continue;
            if (direction == sweep_direction::forward)
                transition_update_forward(g, lam, u, update);
            else
                transition_update_backward(g, lam, u, update);
            apply_checked(update);
            result.cost_ops += f.in_edges.size() + f.out_edges.size() + f.conflict_lams.size();
        }
    }

    result.dual = dual_value(g, lam);
    return result;
}

double relative_gap(double primal, double dual) {
    const double diff = primal - dual;
    if (std::abs(diff) <= 1e-12 * (1.0 + std::abs(dual)))
        return 0.0;
    if (dual == 0.0)
        return kInf;
    return diff / std::abs(dual);
}

solve_result run(const decomposed_graph& g, const solver_config& config) {
    if (!config.valid())
        throw std::invalid_argument("invalid solver configuration");

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    reparametrization lam = g.make_lambda();

    solve_result result;
    result.best_assignment = assignment::all_off(g.problem());
    bool have_primal = false;
    double previous_dual = -kInf;
    int stalled = 0;
    bool harvest = false;  // stall seen on a sweep without extraction

    for (std::uint32_t s = 1; s <= config.max_sweeps; ++s) {
        const sweep_direction dir = (s % 2 == 1) ? sweep_direction::forward : sweep_direction::backward;
        const bool eligible = config.primal_dir == primal_direction::both ||
                              (config.primal_dir == primal_direction::forward) == (dir == sweep_direction::forward);
        const bool primal_due =
            eligible && (!have_primal || s % config.primal_period == 0 || s == config.max_sweeps || harvest);

        // primal estimates run frame-synchronized inside the sweep, right
        // after each time step's conflict updates, where the conflict factors
        // have just handed the discriminating cost back to the detections
        double dual;
        if (primal_due) {
            partial_assignment part = partial_assignment::make(g);
            const primal_hook hook = [&](std::int32_t frame, sweep_direction d) {
                apply_conflict_resolution(g, lam, frame, part);
                assign_frame(g, lam, frame, d, part);
            };
            dual = sweep(g, lam, dir, hook, config.check_monotone).dual;

            const assignment x = to_assignment(g, part);
            const energy_result e = energy(g.problem(), g.index(), x);
            if (!e.feasible)
                throw std::logic_error("in-sweep primal estimate is infeasible");
            if (!have_primal || e.value < result.primal_energy) {
                result.best_assignment = x;
                result.primal_energy = e.value;
                have_primal = true;
            }
        } else {
            dual = sweep(g, lam, dir, {}, config.check_monotone).dual;
        }

        result.log.push_back({s, dir, dual,
                              primal_due ? std::optional<double>(result.primal_energy) : std::nullopt,
                              elapsed()});
        result.sweeps = s;
        result.dual_bound = dual;

        bool stop = s == config.max_sweeps || (harvest && primal_due);
        if (primal_due && relative_gap(result.primal_energy, dual) <= config.gap_tolerance)
            stop = true;
        if (previous_dual > -kInf) {
            const double improvement = dual - previous_dual;
            stalled = improvement < config.stall_tolerance * (1.0 + std::abs(dual)) ? stalled + 1 : 0;
            if (stalled >= 3) {
                if (primal_due)
                    stop = true;
                else
                    harvest = true;  // one more sweep to refresh the primal, then stop
            }
        }
        previous_dual = dual;

        if (stop)
            break;
    }

    result.gap = relative_gap(result.primal_energy, result.dual_bound);
    return result;
}

}  // namespace tba
