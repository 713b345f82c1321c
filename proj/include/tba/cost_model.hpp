#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tba/instance.hpp"

namespace tba {

struct detection_features {
    double area = 1.0;              // pixels
    double convex_hull_area = 1.0;  // >= area
    std::array<double, 2> centroid{0.0, 0.0};
    double orientation = 0.0;       // radians, axis (mod pi)
    double boundary_distance = 0.0; // pixels to the closest image border
};

struct detection_cost_params {
    double alpha = 1.0;       // area reward
    double beta = 1.0;        // convexity penalty
    double gamma = 1.0;       // oversize penalty
    double area_limit = 500;  // upper end of reasonable object sizes
};

struct move_cost_params {
    double alpha = 0.1;  // area change
    double beta = 0.01;  // squared displacement
};

struct division_cost_params {
    double alpha = 10.0;   // flat division charge
    double beta = 0.1;     // mother/daughters area balance
    double gamma = 0.1;    // daughter area difference
    double kappa = 0.001;  // daughter area difference, squared
    double rho = 0.01;     // mother-to-daughter displacement
    double sigma = 0.01;   // daughter separation
    double tau = 1.0;      // orientation mismatch
};

struct boundary_cost_params {
    double alpha = 0.25;  // area
    double beta = 1.0;    // sqrt(boundary distance)
    double gamma = 0.5;   // boundary distance
};

struct cost_params {
    detection_cost_params det;
    move_cost_params move;
    division_cost_params div;
    boundary_cost_params app;
    boundary_cost_params dis;

    static cost_params defaults() { return {}; }
};

double detection_cost(const detection_features& f, const cost_params& p);
double move_cost(const detection_features& from, const detection_features& to, const cost_params& p);
double division_cost(const detection_features& mother, const detection_features& d1, const detection_features& d2,
                     const cost_params& p);
double appearance_cost(const detection_features& f, const cost_params& p);
double disappearance_cost(const detection_features& f, const cost_params& p);

// Feature-level description of a tracking problem: per-frame hypotheses,
// candidate links between consecutive frames and per-frame conflict sets.
// Frame numbers are 1-based, detection indices are positions within a frame.
struct tracking_candidates {
    std::vector<std::vector<detection_features>> frames;

    struct move_link {
        std::int32_t frame = 1;  // source frame
        std::int32_t from = 0;
        std::int32_t to = 0;
    };
    struct division_link {
        std::int32_t frame = 1;
        std::int32_t from = 0;
        std::int32_t to1 = 0;
        std::int32_t to2 = 0;
    };
    struct conflict {
        std::int32_t frame = 1;
        std::vector<std::int32_t> members;
    };

    std::vector<move_link> moves;
    std::vector<division_link> divisions;
    std::vector<conflict> conflicts;
};

// Applies the cost formulas to every hypothesis and candidate link and
// returns a validated instance. Throws std::invalid_argument when the result
// does not validate.
instance build_instance(const tracking_candidates& candidates, const cost_params& p);

}  // namespace tba
