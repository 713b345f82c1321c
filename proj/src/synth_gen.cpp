#include "tba/synth_gen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace tba {

double splitmix64::gaussian() {
    // (0,1] for the log argument
    const double u1 = double((next() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

splitmix64 substream(std::uint64_t seed, std::uint64_t tag) {
    splitmix64 s{seed ^ (0x9E3779B97F4A7C15ull * (tag + 1))};
    s.next();
    return s;
}

namespace {

constexpr double kArena = 512.0;

struct sim_object {
    double x = 0.0, y = 0.0;
    double area = 100.0;
    double axis = 0.0;
    // provenance within the previous frame: -1 = carried over by a move from
    // prev_index, otherwise divided from prev_index together with a sibling
    std::int32_t prev_index = -1;
    bool via_division = false;
};

bool inside_arena(const sim_object& o) {
    return o.x >= 0.0 && o.x <= kArena && o.y >= 0.0 && o.y <= kArena;
}

double boundary_distance(double x, double y) {
    const double d = std::min(std::min(x, kArena - x), std::min(y, kArena - y));
    return std::max(0.0, d);
}

struct frame_layout {
    std::int32_t hypotheses_per_object;
    std::int32_t hypothesis_index(std::int32_t object, std::int32_t copy) const {
        return object * hypotheses_per_object + copy;
    }
};

}  // namespace

generated generate(const gen_params& p, const cost_params& costs) {
    if (!p.valid())
        throw std::invalid_argument("invalid generator parameters");

    const std::int32_t H = p.hypotheses_per_object;
    const frame_layout layout{H};

    // simulate the true objects frame by frame
    std::vector<std::vector<sim_object>> world(std::size_t(p.frames));
    {
        splitmix64 init = substream(p.seed, 0);
        for (std::int32_t i = 0; i < p.initial_objects; ++i) {
            sim_object o;
            o.x = init.uniform(0.15 * kArena, 0.85 * kArena);
            o.y = init.uniform(0.15 * kArena, 0.85 * kArena);
            o.area = init.uniform(80.0, 120.0);
            o.axis = init.uniform(0.0, std::numbers::pi);
            world[0].push_back(o);
        }
    }
    for (std::int32_t t = 1; t < p.frames; ++t) {
        splitmix64 motion = substream(p.seed, std::uint64_t(t) * 4 + 1);
        splitmix64 division = substream(p.seed, std::uint64_t(t) * 4 + 2);
        for (std::size_t i = 0; i < world[std::size_t(t - 1)].size(); ++i) {
            const sim_object& prev = world[std::size_t(t - 1)][i];
            if (p.division_prob > 0.0 && division.bernoulli(p.division_prob)) {
                const double dx = motion.gaussian() * std::max(p.motion_sigma, 1.0);
                const double dy = motion.gaussian() * std::max(p.motion_sigma, 1.0);
                for (int child = 0; child < 2; ++child) {
                    sim_object o = prev;
                    o.x = prev.x + (child == 0 ? dx : -dx);
                    o.y = prev.y + (child == 0 ? dy : -dy);
                    o.area = std::max(1.0, prev.area / 2.0);
                    o.prev_index = std::int32_t(i);
                    o.via_division = true;
                    if (inside_arena(o))
                        world[std::size_t(t)].push_back(o);
                }
            } else {
                sim_object o = prev;
                o.x += motion.gaussian() * p.motion_sigma;
                o.y += motion.gaussian() * p.motion_sigma;
                o.prev_index = std::int32_t(i);
                o.via_division = false;
                if (inside_arena(o))
                    world[std::size_t(t)].push_back(o);
            }
        }
    }

    // hypotheses: copy 0 is the true one, further copies are jittered and a
    // little less convex; all copies of one object are mutually conflicting
    tracking_candidates cand;
    cand.frames.resize(std::size_t(p.frames));
    const double jitter = std::max(1.0, p.motion_sigma / 2.0);
    for (std::int32_t t = 0; t < p.frames; ++t) {
        splitmix64 jit = substream(p.seed, std::uint64_t(t) * 4 + 3);
        for (std::size_t i = 0; i < world[std::size_t(t)].size(); ++i) {
            const sim_object& o = world[std::size_t(t)][i];
            for (std::int32_t copy = 0; copy < H; ++copy) {
                detection_features f;
                if (copy == 0) {
                    f.centroid = {o.x, o.y};
                    f.area = o.area;
                    f.convex_hull_area = o.area;
                } else {
                    f.centroid = {o.x + jit.gaussian() * jitter, o.y + jit.gaussian() * jitter};
                    f.area = std::max(1.0, o.area * (1.0 + 0.05 * jit.gaussian()));
                    f.convex_hull_area = f.area * (1.0 + std::abs(0.05 * jit.gaussian()));
                }
                f.orientation = o.axis;
                f.boundary_distance = boundary_distance(f.centroid[0], f.centroid[1]);
                cand.frames[std::size_t(t)].push_back(f);
            }
            if (H >= 2) {
                tracking_candidates::conflict c;
                c.frame = t + 1;
                for (std::int32_t copy = 0; copy < H; ++copy)
                    c.members.push_back(layout.hypothesis_index(std::int32_t(i), copy));
                cand.conflicts.push_back(std::move(c));
            }
        }
    }

    // radius-gated candidate links; keyed for deduplication against the
    // forced ground-truth links
    std::map<std::tuple<std::int32_t, std::int32_t, std::int32_t>, std::size_t> move_at;
    std::map<std::tuple<std::int32_t, std::int32_t, std::int32_t, std::int32_t>, std::size_t> division_at;

    auto add_move = [&](std::int32_t frame, std::int32_t from, std::int32_t to) -> std::size_t {
        const auto key = std::make_tuple(frame, from, to);
        auto it = move_at.find(key);
        if (it != move_at.end())
            return it->second;
        cand.moves.push_back({frame, from, to});
        move_at.emplace(key, cand.moves.size() - 1);
        return cand.moves.size() - 1;
    };
    auto add_division = [&](std::int32_t frame, std::int32_t from, std::int32_t to1, std::int32_t to2) -> std::size_t {
        const auto key = std::make_tuple(frame, from, std::min(to1, to2), std::max(to1, to2));
        auto it = division_at.find(key);
        if (it != division_at.end())
            return it->second;
        cand.divisions.push_back({frame, from, std::min(to1, to2), std::max(to1, to2)});
        division_at.emplace(key, cand.divisions.size() - 1);
        return cand.divisions.size() - 1;
    };

    const double radius2 = p.candidate_radius * p.candidate_radius;
    for (std::int32_t t = 0; t + 1 < p.frames; ++t) {
        const auto& here = cand.frames[std::size_t(t)];
        const auto& next = cand.frames[std::size_t(t + 1)];
        for (std::size_t u = 0; u < here.size(); ++u) {
            std::vector<std::pair<double, std::int32_t>> targets;
            for (std::size_t v = 0; v < next.size(); ++v) {
                const double dx = here[u].centroid[0] - next[v].centroid[0];
                const double dy = here[u].centroid[1] - next[v].centroid[1];
                const double d2 = dx * dx + dy * dy;
                if (d2 <= radius2) {
                    add_move(t + 1, std::int32_t(u), std::int32_t(v));
                    targets.emplace_back(d2, std::int32_t(v));
                }
            }
            if (p.division_prob > 0.0 && targets.size() >= 2) {
                std::sort(targets.begin(), targets.end());
                const std::size_t take = std::min<std::size_t>(targets.size(), 4);
                for (std::size_t a = 0; a < take; ++a)
                    for (std::size_t b = a + 1; b < take; ++b)
                        add_division(t + 1, std::int32_t(u), targets[a].second, targets[b].second);
            }
        }
    }

    // the true chain: copy-0 hypotheses plus the links the simulation took
    std::vector<std::size_t> true_moves;
    std::vector<std::size_t> true_divisions;
    for (std::int32_t t = 1; t < p.frames; ++t) {
        const auto& objs = world[std::size_t(t)];
        std::vector<std::uint8_t> handled(objs.size(), 0);
        for (std::size_t i = 0; i < objs.size(); ++i) {
            if (handled[i] || objs[i].prev_index < 0)
                continue;
            const std::int32_t from = layout.hypothesis_index(objs[i].prev_index, 0);
            if (!objs[i].via_division) {
                true_moves.push_back(add_move(t, from, layout.hypothesis_index(std::int32_t(i), 0)));
                handled[i] = 1;
            } else {
                // find the sibling: the other child of the same parent
                std::size_t sib = i;
                for (std::size_t j = i + 1; j < objs.size(); ++j) {
                    if (!handled[j] && objs[j].via_division && objs[j].prev_index == objs[i].prev_index) {
                        sib = j;
                        break;
                    }
                }
                if (sib == i) {
                    // the other child left the arena; the survivor continues as a move
                    true_moves.push_back(add_move(t, from, layout.hypothesis_index(std::int32_t(i), 0)));
                } else {
                    true_divisions.push_back(add_division(t, from, layout.hypothesis_index(std::int32_t(i), 0),
                                                          layout.hypothesis_index(std::int32_t(sib), 0)));
                    handled[sib] = 1;
                }
                handled[i] = 1;
            }
        }
    }

    generated result;
    result.inst = build_instance(cand, costs);

    result.ground_truth = assignment::all_off(result.inst);
    {
        const instance_index idx(result.inst);
        for (std::int32_t t = 0; t < p.frames; ++t)
            for (std::size_t i = 0; i < world[std::size_t(t)].size(); ++i) {
                const detection_id id{t + 1, layout.hypothesis_index(std::int32_t(i), 0)};
                result.ground_truth.detection_on[idx.detection_ordinal(id)] = 1;
            }
        // build_instance appends all moves before all divisions
        for (std::size_t m : true_moves)
            result.ground_truth.transition_on[m] = 1;
        for (std::size_t d : true_divisions)
            result.ground_truth.transition_on[cand.moves.size() + d] = 1;
    }

    return result;
}

}  // namespace tba
