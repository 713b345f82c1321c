#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tba/cost_model.hpp"
#include "tba/dual_bca.hpp"
#include "tba/instance.hpp"
#include "tba/synth_gen.hpp"

namespace tba {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Text format, one record per line, `#` starts a comment:
//   H <frame> <id> <det_cost> <app_cost> <disapp_cost>
//   MOVE <from_frame> <from_id> <to_id> <cost>          (to-frame is from_frame+1)
//   DIV <from_frame> <from_id> <to_id1> <to_id2> <cost>
//   CONFSET <frame> <id> <id> [<id>...]
// The frame count is the largest frame any record touches.
instance parse_instance(std::string_view text);

// Canonical form: records sorted by (frame, H < MOVE < DIV < CONFSET, ids),
// division children and conflict members ascending, floats with 17
// significant digits. parse_instance is its exact inverse.
std::string write_instance(const instance& inst);

// Solution format: ENERGY/BOUND/GAP header, then one `ON <frame> <id>` per
// active detection and one `LINK MOVE|DIV <frame> <ids...>` per active
// transition in canonical order. Refuses infeasible assignments.
std::string write_solution(const instance& inst, const assignment& x, double energy, double dual_bound);

struct parsed_solution {
    double energy = 0.0;
    double bound = 0.0;
    double gap = 0.0;
    assignment x;
};

parsed_solution parse_solution(const instance& inst, std::string_view text);

// header sweep,direction,dual_bound,primal_energy,wall_time_s; empty primal
// field when no extraction ran that sweep
std::string write_convergence_csv(std::span<const convergence_record> records);

// flat `key = value` configuration file
class config_file {
public:
    static config_file parse(std::string_view text);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;

    // throws io_error when a key outside the known set is present
    void require_known(std::span<const std::string_view> known) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

cost_params cost_params_from_config(const config_file& cfg);
solver_config solver_config_from_config(const config_file& cfg);
gen_params gen_params_from_config(const config_file& cfg);

// every key the three sections above understand
std::span<const std::string_view> known_config_keys();

// 17-significant-digit rendering, round-trip exact for doubles
std::string format_double(double v);

}  // namespace tba
