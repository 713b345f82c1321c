#include "tba/instance.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace tba {

transition transition::make_move(detection_id from, detection_id to, double cost) {
    transition t;
    t.kind = kind_t::move;
    t.from = from;
    t.to1 = to;
    t.cost = cost;
    return t;
}

transition transition::make_division(detection_id from, detection_id to1, detection_id to2, double cost) {
    transition t;
    t.kind = kind_t::division;
    t.from = from;
    t.to1 = to1;
    t.to2 = to2;
    t.cost = cost;
    return t;
}

assignment assignment::all_off(const instance& inst) {
    assignment x;
    x.detection_on.assign(inst.detections.size(), 0);
    x.transition_on.assign(inst.transitions.size(), 0);
    return x;
}

std::string to_string(detection_id id) {
    return "(" + std::to_string(id.frame) + "," + std::to_string(id.index) + ")";
}

std::string to_string(const transition& t) {
    if (t.kind == transition::kind_t::move)
        return "MOVE " + to_string(t.from) + "->" + to_string(t.to1);
    return "DIV " + to_string(t.from) + "->" + to_string(t.to1) + "+" + to_string(t.to2);
}

namespace {

bool finite(double v) { return std::isfinite(v); }

// duplicate key for a transition; division children are unordered
std::tuple<int, detection_id, detection_id, detection_id> transition_key(const transition& t) {
    if (t.kind == transition::kind_t::move)
        return {0, t.from, t.to1, detection_id{}};
    auto lo = std::min(t.to1, t.to2);
    auto hi = std::max(t.to1, t.to2);
    return {1, t.from, lo, hi};
}

}  // namespace

validation_report validate(const instance& inst) {
    validation_report report;
    auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

    if (inst.frame_count < 1)
        fail("frame count must be >= 1, got " + std::to_string(inst.frame_count));

    std::set<detection_id> ids;
    for (std::size_t i = 0; i < inst.detections.size(); ++i) {
        const detection& d = inst.detections[i];
        if (d.id.frame < 1 || d.id.frame > inst.frame_count)
            fail("detection " + to_string(d.id) + ": frame out of range [1," + std::to_string(inst.frame_count) + "]");
        if (!ids.insert(d.id).second)
            fail("duplicate detection id " + to_string(d.id));
        if (!finite(d.cost))
            fail("detection " + to_string(d.id) + ": non-finite cost");
        if (!finite(d.appearance_cost) || d.appearance_cost < 0.0)
            fail("detection " + to_string(d.id) + ": appearance cost must be finite and >= 0");
        if (!finite(d.disappearance_cost) || d.disappearance_cost < 0.0)
            fail("detection " + to_string(d.id) + ": disappearance cost must be finite and >= 0");
    }

    auto exists = [&](detection_id id) { return ids.count(id) != 0; };

    std::set<std::tuple<int, detection_id, detection_id, detection_id>> seen_transitions;
    for (std::size_t i = 0; i < inst.transitions.size(); ++i) {
        const transition& t = inst.transitions[i];
        const std::string where = "transition " + std::to_string(i) + " (" + to_string(t) + ")";
        if (!finite(t.cost))
            fail(where + ": non-finite cost");

        bool endpoints_ok = true;
        for (detection_id id : {t.from, t.to1}) {
            if (!exists(id)) {
                fail(where + ": dangling id " + to_string(id));
                endpoints_ok = false;
            }
        }
        if (t.kind == transition::kind_t::division && !exists(t.to2)) {
            fail(where + ": dangling id " + to_string(t.to2));
            endpoints_ok = false;
        }
        if (!endpoints_ok)
            continue;

        if (t.kind == transition::kind_t::move) {
            if (t.to1.frame != t.from.frame + 1)
                fail(where + ": non-consecutive frames");
        } else {
            if (t.to1.frame != t.from.frame + 1 || t.to2.frame != t.from.frame + 1)
                fail(where + ": non-consecutive frames");
            if (t.to1 == t.to2)
                fail(where + ": division children must be distinct");
        }
        if (!seen_transitions.insert(transition_key(t)).second)
            fail(where + ": duplicate transition");
    }

    for (std::size_t i = 0; i < inst.conflicts.size(); ++i) {
        const conflict_set& c = inst.conflicts[i];
        const std::string where = "conflict set " + std::to_string(i);
        if (c.frame < 1 || c.frame > inst.frame_count)
            fail(where + ": frame out of range");
        if (c.members.size() < 2)
            fail(where + ": needs at least 2 members");
        std::set<detection_id> members;
        for (detection_id id : c.members) {
            if (!exists(id)) {
                fail(where + ": dangling id " + to_string(id));
                continue;
            }
            if (id.frame != c.frame)
                fail(where + ": member " + to_string(id) + " not in frame " + std::to_string(c.frame));
            if (!members.insert(id).second)
                fail(where + ": duplicate member " + to_string(id));
        }
    }

    return report;
}

instance_index::instance_index(const instance& inst) {
    const std::size_t n = inst.detections.size();
    ordinal_.reserve(n);
    in_transitions_.resize(n);
    out_transitions_.resize(n);
    conflicts_of_.resize(n);
    frame_detections_.resize(std::size_t(std::max<std::int32_t>(inst.frame_count, 1)));
    frame_conflicts_.resize(frame_detections_.size());

    for (std::size_t i = 0; i < n; ++i) {
        const detection& d = inst.detections[i];
        if (!ordinal_.emplace(d.id, i).second)
            throw std::invalid_argument("duplicate detection id " + to_string(d.id));
        frame_detections_.at(std::size_t(d.id.frame - 1)).push_back(std::uint32_t(i));
    }
    for (std::size_t t = 0; t < inst.transitions.size(); ++t) {
        const transition& tr = inst.transitions[t];
        out_transitions_[detection_ordinal(tr.from)].push_back(std::uint32_t(t));
        in_transitions_[detection_ordinal(tr.to1)].push_back(std::uint32_t(t));
        if (tr.kind == transition::kind_t::division)
            in_transitions_[detection_ordinal(tr.to2)].push_back(std::uint32_t(t));
    }
    for (std::size_t c = 0; c < inst.conflicts.size(); ++c) {
        const conflict_set& cs = inst.conflicts[c];
        frame_conflicts_.at(std::size_t(cs.frame - 1)).push_back(std::uint32_t(c));
        for (detection_id id : cs.members)
            conflicts_of_[detection_ordinal(id)].push_back(std::uint32_t(c));
    }
}

bool instance_index::has_detection(detection_id id) const { return ordinal_.count(id) != 0; }

std::size_t instance_index::detection_ordinal(detection_id id) const {
    auto it = ordinal_.find(id);
    if (it == ordinal_.end())
        throw std::out_of_range("unknown detection id " + to_string(id));
    return it->second;
}

const std::vector<std::uint32_t>& instance_index::detections_in_frame(std::int32_t frame) const {
    return frame_detections_.at(std::size_t(frame - 1));
}

const std::vector<std::uint32_t>& instance_index::conflicts_in_frame(std::int32_t frame) const {
    return frame_conflicts_.at(std::size_t(frame - 1));
}

feasibility_report check_feasible(const instance& inst, const assignment& x) {
    return check_feasible(inst, instance_index(inst), x);
}

feasibility_report check_feasible(const instance& inst, const instance_index& idx, const assignment& x) {
    feasibility_report report;
    auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

    if (x.detection_on.size() != inst.detections.size() || x.transition_on.size() != inst.transitions.size())
        throw std::invalid_argument("assignment not total over instance variables");

    auto det_on = [&](detection_id id) { return x.detection_on[idx.detection_ordinal(id)] != 0; };

    for (std::size_t t = 0; t < inst.transitions.size(); ++t) {
        if (!x.transition_on[t])
            continue;
        const transition& tr = inst.transitions[t];
        const std::string where = "active " + to_string(tr);
        if (!det_on(tr.from))
            fail(where + ": source detection inactive");
        if (!det_on(tr.to1))
            fail(where + ": target detection " + to_string(tr.to1) + " inactive");
        if (tr.kind == transition::kind_t::division && !det_on(tr.to2))
            fail(where + ": target detection " + to_string(tr.to2) + " inactive");
    }

    for (std::size_t d = 0; d < inst.detections.size(); ++d) {
        int in_active = 0;
        for (std::uint32_t t : idx.in_transitions(d)) in_active += x.transition_on[t] != 0;
        int out_active = 0;
        for (std::uint32_t t : idx.out_transitions(d)) out_active += x.transition_on[t] != 0;
        if (in_active > 1)
            fail("detection " + to_string(inst.detections[d].id) + ": " + std::to_string(in_active) + " active incoming transitions");
        if (out_active > 1)
            fail("detection " + to_string(inst.detections[d].id) + ": " + std::to_string(out_active) + " active outgoing transitions");
    }

    for (std::size_t c = 0; c < inst.conflicts.size(); ++c) {
        int active = 0;
        for (detection_id id : inst.conflicts[c].members) active += det_on(id) ? 1 : 0;
        if (active > 1)
            fail("conflict set " + std::to_string(c) + ": " + std::to_string(active) + " active members");
    }

    return report;
}

energy_result energy(const instance& inst, const assignment& x) {
    return energy(inst, instance_index(inst), x);
}

energy_result energy(const instance& inst, const instance_index& idx, const assignment& x) {
    energy_result result;
    result.feasible = check_feasible(inst, idx, x).ok();

    double value = 0.0;
    for (std::size_t d = 0; d < inst.detections.size(); ++d)
        if (x.detection_on[d])
            value += inst.detections[d].cost;
    for (std::size_t t = 0; t < inst.transitions.size(); ++t)
        if (x.transition_on[t])
            value += inst.transitions[t].cost;

    for (std::size_t d = 0; d < inst.detections.size(); ++d) {
        if (!x.detection_on[d])
            continue;
        const detection& det = inst.detections[d];
        bool has_in = false;
        for (std::uint32_t t : idx.in_transitions(d)) has_in = has_in || x.transition_on[t];
        bool has_out = false;
        for (std::uint32_t t : idx.out_transitions(d)) has_out = has_out || x.transition_on[t];
        if (!has_in && det.id.frame > 1)
            value += det.appearance_cost;
        if (!has_out && det.id.frame < inst.frame_count)
            value += det.disappearance_cost;
    }

    result.value = value;
    return result;
}

}  // namespace tba
