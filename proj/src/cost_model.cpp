#include "tba/cost_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tba {

namespace {

double sq(double v) { return v * v; }

double squared_displacement(const detection_features& a, const detection_features& b) {
    return sq(a.centroid[0] - b.centroid[0]) + sq(a.centroid[1] - b.centroid[1]);
}

// absolute angle between two axes (orientations mod pi), folded to [0, pi/2]
double axis_angle(double a, double b) {
    const double pi = std::numbers::pi;
    double d = std::fmod(std::abs(a - b), pi);
    if (d > pi / 2.0)
        d = pi - d;
    return d;
}

}  // namespace

double detection_cost(const detection_features& f, const cost_params& p) {
    const double oversize = std::max(0.0, f.area - p.det.area_limit);
    return -p.det.alpha * f.area + p.det.beta * std::abs(f.convex_hull_area - f.area) + p.det.gamma * sq(oversize);
}

double move_cost(const detection_features& from, const detection_features& to, const cost_params& p) {
    return p.move.alpha * std::abs(from.area - to.area) + p.move.beta * squared_displacement(from, to);
}

double division_cost(const detection_features& mother, const detection_features& d1, const detection_features& d2,
                     const cost_params& p) {
    const double area_balance = std::abs(mother.area - d1.area - d2.area);
    const double daughter_diff = std::abs(d1.area - d2.area);

    // orientation mismatch between the mother axis and the daughter-daughter
    // axis; coincident daughters have no axis and contribute nothing
    const double dx = d2.centroid[0] - d1.centroid[0];
    const double dy = d2.centroid[1] - d1.centroid[1];
    const double mismatch = (dx == 0.0 && dy == 0.0) ? 0.0 : axis_angle(mother.orientation, std::atan2(dy, dx));

    return p.div.alpha + p.div.beta * area_balance + p.div.gamma * daughter_diff + p.div.kappa * sq(daughter_diff) +
           0.5 * p.div.rho * (squared_displacement(mother, d1) + squared_displacement(mother, d2)) +
           p.div.sigma * squared_displacement(d1, d2) + p.div.tau * mismatch;
}

namespace {

double boundary_cost(const detection_features& f, const boundary_cost_params& p) {
    return p.alpha * f.area + p.beta * std::sqrt(f.boundary_distance) + p.gamma * f.boundary_distance;
}

}  // namespace

double appearance_cost(const detection_features& f, const cost_params& p) { return boundary_cost(f, p.app); }

double disappearance_cost(const detection_features& f, const cost_params& p) { return boundary_cost(f, p.dis); }

instance build_instance(const tracking_candidates& candidates, const cost_params& p) {
    instance inst;
    inst.frame_count = std::int32_t(std::max<std::size_t>(candidates.frames.size(), 1));

    for (std::size_t t = 0; t < candidates.frames.size(); ++t) {
        for (std::size_t i = 0; i < candidates.frames[t].size(); ++i) {
            const detection_features& f = candidates.frames[t][i];
            detection d;
            d.id = {std::int32_t(t + 1), std::int32_t(i)};
            d.cost = detection_cost(f, p);
            d.appearance_cost = appearance_cost(f, p);
            d.disappearance_cost = disappearance_cost(f, p);
            inst.detections.push_back(d);
        }
    }

    auto features_of = [&](std::int32_t frame, std::int32_t index) -> const detection_features& {
        if (frame < 1 || std::size_t(frame) > candidates.frames.size())
            throw std::invalid_argument("candidate link frame out of range");
        const auto& fr = candidates.frames[std::size_t(frame - 1)];
        if (index < 0 || std::size_t(index) >= fr.size())
            throw std::invalid_argument("candidate link index out of range");
        return fr[std::size_t(index)];
    };

    for (const auto& m : candidates.moves) {
        const detection_features& a = features_of(m.frame, m.from);
        const detection_features& b = features_of(m.frame + 1, m.to);
        inst.transitions.push_back(transition::make_move({m.frame, m.from}, {m.frame + 1, m.to}, move_cost(a, b, p)));
    }
    for (const auto& d : candidates.divisions) {
        const detection_features& mother = features_of(d.frame, d.from);
        const detection_features& c1 = features_of(d.frame + 1, d.to1);
        const detection_features& c2 = features_of(d.frame + 1, d.to2);
        inst.transitions.push_back(transition::make_division({d.frame, d.from}, {d.frame + 1, d.to1},
                                                             {d.frame + 1, d.to2}, division_cost(mother, c1, c2, p)));
    }
    for (const auto& c : candidates.conflicts) {
        conflict_set cs;
        cs.frame = c.frame;
        for (std::int32_t i : c.members) cs.members.push_back({c.frame, i});
        inst.conflicts.push_back(std::move(cs));
    }

    const validation_report report = validate(inst);
    if (!report.ok())
        throw std::invalid_argument("built instance is invalid: " + report.violations.front());
    return inst;
}

}  // namespace tba
