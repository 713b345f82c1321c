#include "tba/decomposition.hpp"

#include <cassert>
#include <limits>
#include <stdexcept>

namespace tba {

decomposed_graph decompose(const instance& inst) {
    {
        validation_report report = validate(inst);
        if (!report.ok())
            throw std::invalid_argument("invalid instance: " + report.violations.front());
    }

    decomposed_graph g;
    g.inst_ = inst;
    g.idx_ = instance_index(g.inst_);
    const instance& in = g.inst_;

    for (const transition& t : in.transitions) {
        if (t.kind == transition::kind_t::move)
            ++g.n_moves_;
        else
            ++g.n_divisions_;
    }
    for (const conflict_set& c : in.conflicts)
        g.n_conflict_edges_ += c.members.size();

    const std::uint32_t div_base = std::uint32_t(g.n_moves_);
    const std::uint32_t conf_base = std::uint32_t(g.n_moves_ + 2 * g.n_divisions_);

    g.detections_.resize(in.detections.size());
    for (std::size_t u = 0; u < in.detections.size(); ++u) {
        g.detections_[u].id = in.detections[u].id;
        g.detections_[u].det_cost = in.detections[u].cost;
    }

    // dual coordinates per transition: moves first, then division pairs
    g.transition_lam_.resize(in.transitions.size());
    {
        std::uint32_t next_move = 0, next_div = 0;
        for (std::size_t t = 0; t < in.transitions.size(); ++t) {
            if (in.transitions[t].kind == transition::kind_t::move)
                g.transition_lam_[t] = next_move++;
            else
                g.transition_lam_[t] = div_base + 2 * (next_div++);
        }
    }

    for (std::size_t t = 0; t < in.transitions.size(); ++t) {
        const transition& tr = in.transitions[t];
        const std::uint32_t lam = g.transition_lam_[t];
        const std::size_t src = g.idx_.detection_ordinal(tr.from);
        const std::size_t to1 = g.idx_.detection_ordinal(tr.to1);
        if (tr.kind == transition::kind_t::move) {
            const double half = 0.5 * tr.cost;
            g.detections_[src].out_edges.push_back({std::uint32_t(t), half, lam, false});
            g.detections_[to1].in_edges.push_back({std::uint32_t(t), half, lam, false});
        } else {
            const std::size_t to2 = g.idx_.detection_ordinal(tr.to2);
            const double third = tr.cost / 3.0;
            g.detections_[src].out_edges.push_back({std::uint32_t(t), third, lam, true});
            g.detections_[to1].in_edges.push_back({std::uint32_t(t), third, lam, true});
            g.detections_[to2].in_edges.push_back({std::uint32_t(t), third, lam + 1, true});
        }
    }

    // fold appearance/disappearance costs: charged on the activation bit,
    // refunded on every transition copy; boundary frames are exempt
    for (std::size_t u = 0; u < in.detections.size(); ++u) {
        const detection& d = in.detections[u];
        detection_factor& f = g.detections_[u];
        if (d.id.frame > 1 && d.appearance_cost != 0.0) {
            f.det_cost += d.appearance_cost;
            for (auto& e : f.in_edges) e.cost -= d.appearance_cost;
        }
        if (d.id.frame < in.frame_count && d.disappearance_cost != 0.0) {
            f.det_cost += d.disappearance_cost;
            for (auto& e : f.out_edges) e.cost -= d.disappearance_cost;
        }
    }

    g.conflicts_.resize(in.conflicts.size());
    {
        std::uint32_t next = conf_base;
        for (std::size_t c = 0; c < in.conflicts.size(); ++c) {
            conflict_factor& f = g.conflicts_[c];
            f.frame = in.conflicts[c].frame;
            f.lam_base = next;
            for (detection_id id : in.conflicts[c].members) {
                const std::size_t u = g.idx_.detection_ordinal(id);
                f.members.push_back(std::uint32_t(u));
                f.costs.push_back(0.0);
                g.detections_[u].conflict_lams.push_back(next++);
            }
        }
    }

    return g;
}

double repa_det_cost(const decomposed_graph& g, const reparametrization& lam, std::size_t u) {
    const detection_factor& f = g.detection(u);
    double value = f.det_cost;
    for (std::uint32_t e : f.conflict_lams) value -= lam[e];
    return value;
}

double repa_in_cost(const decomposed_graph& g, const reparametrization& lam, std::size_t u, std::size_t k) {
    const detection_factor::edge& e = g.detection(u).in_edges[k];
    return e.cost + lam[e.lam];
}

double repa_out_cost(const decomposed_graph& g, const reparametrization& lam, std::size_t u, std::size_t k) {
    const detection_factor::edge& e = g.detection(u).out_edges[k];
    if (e.division)
        return e.cost - lam[e.lam] - lam[e.lam + 1];
    return e.cost - lam[e.lam];
}

double repa_conflict_cost(const decomposed_graph& g, const reparametrization& lam, std::size_t c, std::size_t k) {
    const conflict_factor& f = g.conflict(c);
    return f.costs[k] + lam[f.lam_base + std::uint32_t(k)];
}

detection_cost_vector reparametrized_costs(const decomposed_graph& g, const reparametrization& lam, std::size_t u) {
    const detection_factor& f = g.detection(u);
    detection_cost_vector costs;
    costs.det = repa_det_cost(g, lam, u);
    costs.in.reserve(f.in_edges.size());
    costs.out.reserve(f.out_edges.size());
    for (std::size_t k = 0; k < f.in_edges.size(); ++k) costs.in.push_back(repa_in_cost(g, lam, u, k));
    for (std::size_t k = 0; k < f.out_edges.size(); ++k) costs.out.push_back(repa_out_cost(g, lam, u, k));
    return costs;
}

std::vector<double> reparametrized_conflict_costs(const decomposed_graph& g, const reparametrization& lam, std::size_t c) {
    const conflict_factor& f = g.conflict(c);
    std::vector<double> costs(f.costs.size());
    for (std::size_t k = 0; k < costs.size(); ++k) costs[k] = repa_conflict_cost(g, lam, c, k);
    return costs;
}

namespace {

// cheapest option of a one-of-n-or-none choice; value <= 0, ties prefer none
struct choice_min {
    double value = 0.0;
    std::optional<std::uint32_t> choice;
};

choice_min best_choice(std::span<const double> costs) {
    choice_min m;
    for (std::size_t k = 0; k < costs.size(); ++k) {
        if (costs[k] < m.value) {
            m.value = costs[k];
            m.choice = std::uint32_t(k);
        }
    }
    return m;
}

}  // namespace

detection_factor_min min_detection_factor(const detection_cost_vector& costs) {
    const choice_min in = best_choice(costs.in);
    const choice_min out = best_choice(costs.out);
    const double active = costs.det + in.value + out.value;

    detection_factor_min result;
    if (active < 0.0) {
        result.value = active;
        result.state.det = true;
        result.state.in_choice = in.choice;
        result.state.out_choice = out.choice;
    }
    return result;  // off state wins ties at 0
}

conflict_factor_min min_conflict_factor(std::span<const double> costs) {
    // candidates in tie-break preference order: off first, then members
    conflict_factor_min m;
    m.best = 0.0;
    m.second = std::numeric_limits<double>::infinity();
    bool have_second = false;
    for (std::size_t k = 0; k < costs.size(); ++k) {
        const double v = costs[k];
        if (v < m.best) {
            m.second = m.best;
            m.second_state = m.best_state;
            have_second = true;
            m.best = v;
            m.best_state.active_member = std::uint32_t(k);
        } else if (!have_second || v < m.second) {
            m.second = v;
            m.second_state.active_member = std::uint32_t(k);
            have_second = true;
        }
    }
    if (!have_second)
        throw std::invalid_argument("conflict factor needs at least 2 members");
    return m;
}

double dual_value(const decomposed_graph& g, const reparametrization& lam) {
    double value = 0.0;
    for (std::size_t u = 0; u < g.detection_count(); ++u)
        value += min_detection_factor(reparametrized_costs(g, lam, u)).value;
    for (std::size_t c = 0; c < g.conflict_count(); ++c)
        value += min_conflict_factor(reparametrized_conflict_costs(g, lam, c)).best;
    return value;
}

double decomposed_energy(const decomposed_graph& g, const reparametrization* lam, const decomposed_state& s) {
    if (s.det.size() != g.detection_count() || s.conf.size() != g.conflict_count())
        throw std::invalid_argument("state does not match graph");

    double value = 0.0;
    for (std::size_t u = 0; u < g.detection_count(); ++u) {
        const detection_factor_state& st = s.det[u];
        if (!st.det) {
            if (st.in_choice || st.out_choice)
                throw std::invalid_argument("edge choice on inactive detection");
            continue;
        }
        const detection_factor& f = g.detection(u);
        value += lam ? repa_det_cost(g, *lam, u) : f.det_cost;
        if (st.in_choice)
            value += lam ? repa_in_cost(g, *lam, u, *st.in_choice) : f.in_edges.at(*st.in_choice).cost;
        if (st.out_choice)
            value += lam ? repa_out_cost(g, *lam, u, *st.out_choice) : f.out_edges.at(*st.out_choice).cost;
    }
    for (std::size_t c = 0; c < g.conflict_count(); ++c) {
        if (s.conf[c].active_member) {
            const std::size_t k = *s.conf[c].active_member;
            value += lam ? repa_conflict_cost(g, *lam, c, k) : g.conflict(c).costs.at(k);
        }
    }
    return value;
}

namespace {

bool edge_value(const detection_factor& f, const detection_factor_state& st, bool out, std::uint32_t t) {
    const auto& edges = out ? f.out_edges : f.in_edges;
    const auto& choice = out ? st.out_choice : st.in_choice;
    if (!choice)
        return false;
    return edges[*choice].transition == t;
}

}  // namespace

bool coupling_holds(const decomposed_graph& g, const decomposed_state& s) {
    const instance& inst = g.problem();
    const instance_index& idx = g.index();
    for (std::size_t t = 0; t < inst.transitions.size(); ++t) {
        const transition& tr = inst.transitions[t];
        const std::size_t src = idx.detection_ordinal(tr.from);
        const std::size_t to1 = idx.detection_ordinal(tr.to1);
        const bool out_on = edge_value(g.detection(src), s.det[src], true, std::uint32_t(t));
        const bool in1_on = edge_value(g.detection(to1), s.det[to1], false, std::uint32_t(t));
        if (out_on != in1_on)
            return false;
        if (tr.kind == transition::kind_t::division) {
            const std::size_t to2 = idx.detection_ordinal(tr.to2);
            // the division has two copies at to2's side only when to2 != to1
            const bool in2_on = edge_value(g.detection(to2), s.det[to2], false, std::uint32_t(t));
            if (out_on != in2_on)
                return false;
        }
    }
    for (std::size_t c = 0; c < g.conflict_count(); ++c) {
        const conflict_factor& f = g.conflict(c);
        for (std::size_t k = 0; k < f.members.size(); ++k) {
            const bool conf_on = s.conf[c].active_member && *s.conf[c].active_member == k;
            if (conf_on != s.det[f.members[k]].det)
                return false;
        }
    }
    return true;
}

decomposed_state lift_assignment(const decomposed_graph& g, const assignment& x) {
    const instance& inst = g.problem();
    if (x.detection_on.size() != inst.detections.size() || x.transition_on.size() != inst.transitions.size())
        throw std::invalid_argument("assignment not total over instance variables");

    decomposed_state s;
    s.det.resize(g.detection_count());
    s.conf.resize(g.conflict_count());

    for (std::size_t u = 0; u < g.detection_count(); ++u)
        s.det[u].det = x.detection_on[u] != 0;

    for (std::size_t u = 0; u < g.detection_count(); ++u) {
        const detection_factor& f = g.detection(u);
        for (std::size_t k = 0; k < f.in_edges.size(); ++k) {
            if (x.transition_on[f.in_edges[k].transition]) {
                if (s.det[u].in_choice)
                    throw std::invalid_argument("two active incoming transitions at " + to_string(f.id));
                s.det[u].in_choice = std::uint32_t(k);
            }
        }
        for (std::size_t k = 0; k < f.out_edges.size(); ++k) {
            if (x.transition_on[f.out_edges[k].transition]) {
                if (s.det[u].out_choice)
                    throw std::invalid_argument("two active outgoing transitions at " + to_string(f.id));
                s.det[u].out_choice = std::uint32_t(k);
            }
        }
        if ((s.det[u].in_choice || s.det[u].out_choice) && !s.det[u].det)
            throw std::invalid_argument("active transition at inactive detection " + to_string(f.id));
    }

    for (std::size_t c = 0; c < g.conflict_count(); ++c) {
        const conflict_factor& f = g.conflict(c);
        for (std::size_t k = 0; k < f.members.size(); ++k) {
            if (s.det[f.members[k]].det) {
                if (s.conf[c].active_member)
                    throw std::invalid_argument("two active members in conflict set " + std::to_string(c));
                s.conf[c].active_member = std::uint32_t(k);
            }
        }
    }

    return s;
}

}  // namespace tba
