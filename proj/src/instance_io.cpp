#include "tba/instance_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <tuple>

namespace tba {

std::string format_double(double v) {
    std::array<char, 64> buf;
    const int n = std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return std::string(buf.data(), std::size_t(n));
}

namespace {

[[noreturn]] void fail_line(std::size_t line, const std::string& message) {
    throw io_error("line " + std::to_string(line) + ": " + message);
}

std::vector<std::string_view> tokenize(std::string_view line) {
    // strip comment
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
        line = line.substr(0, hash);
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r')
            ++j;
        if (j > i)
            tokens.push_back(line.substr(i, j - i));
        i = j;
    }
    return tokens;
}

std::int32_t parse_int(std::string_view token, std::size_t line) {
    std::int32_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.begin(), token.end(), value);
    if (ec != std::errc() || ptr != token.end())
        fail_line(line, "expected integer, got '" + std::string(token) + "'");
    return value;
}

// frames take part in +1 arithmetic before validation runs
std::int32_t parse_frame(std::string_view token, std::size_t line) {
    const std::int32_t value = parse_int(token, line);
    if (value < 1 || value > 100000000)
        fail_line(line, "frame out of range: " + std::string(token));
    return value;
}

double parse_float(std::string_view token, std::size_t line) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.begin(), token.end(), value);
    if (ec != std::errc() || ptr != token.end())
        fail_line(line, "expected number, got '" + std::string(token) + "'");
    return value;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        ++line_no;
        const std::size_t end = std::min(text.find('\n', start), text.size());
        fn(line_no, text.substr(start, end - start));
        if (end == text.size())
            break;
        start = end + 1;
    }
}

}  // namespace

instance parse_instance(std::string_view text) {
    instance inst;
    std::int32_t max_frame = 1;

    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        const auto tokens = tokenize(line);
        if (tokens.empty())
            return;
        const std::string_view kind = tokens[0];

        if (kind == "H") {
            if (tokens.size() != 6)
                fail_line(line_no, "H record needs 5 fields");
            detection d;
            d.id.frame = parse_frame(tokens[1], line_no);
            d.id.index = parse_int(tokens[2], line_no);
            d.cost = parse_float(tokens[3], line_no);
            d.appearance_cost = parse_float(tokens[4], line_no);
            d.disappearance_cost = parse_float(tokens[5], line_no);
            max_frame = std::max(max_frame, d.id.frame);
            inst.detections.push_back(d);
        } else if (kind == "MOVE") {
            if (tokens.size() != 5)
                fail_line(line_no, "MOVE record needs 4 fields");
            const std::int32_t frame = parse_frame(tokens[1], line_no);
            const detection_id from{frame, parse_int(tokens[2], line_no)};
            const detection_id to{frame + 1, parse_int(tokens[3], line_no)};
            inst.transitions.push_back(transition::make_move(from, to, parse_float(tokens[4], line_no)));
            max_frame = std::max(max_frame, frame + 1);
        } else if (kind == "DIV") {
            if (tokens.size() != 6)
                fail_line(line_no, "DIV record needs 5 fields");
            const std::int32_t frame = parse_frame(tokens[1], line_no);
            const detection_id from{frame, parse_int(tokens[2], line_no)};
            const detection_id to1{frame + 1, parse_int(tokens[3], line_no)};
            const detection_id to2{frame + 1, parse_int(tokens[4], line_no)};
            inst.transitions.push_back(transition::make_division(from, to1, to2, parse_float(tokens[5], line_no)));
            max_frame = std::max(max_frame, frame + 1);
        } else if (kind == "CONFSET") {
            if (tokens.size() < 4)
                fail_line(line_no, "CONFSET record needs a frame and at least 2 ids");
            conflict_set c;
            c.frame = parse_frame(tokens[1], line_no);
            for (std::size_t k = 2; k < tokens.size(); ++k)
                c.members.push_back({c.frame, parse_int(tokens[k], line_no)});
            max_frame = std::max(max_frame, c.frame);
            inst.conflicts.push_back(std::move(c));
        } else {
            fail_line(line_no, "unknown record '" + std::string(kind) + "'");
        }
    });

    inst.frame_count = max_frame;

    const validation_report report = validate(inst);
    if (!report.ok()) {
        std::string message = "invalid instance: " + report.violations.front();
        if (report.violations.size() > 1)
            message += " (+" + std::to_string(report.violations.size() - 1) + " more)";
        throw io_error(message);
    }
    return inst;
}

namespace {

struct keyed_line {
    std::vector<std::int64_t> key;
    std::string text;

    bool operator<(const keyed_line& other) const { return key < other.key; }
};

}  // namespace

std::string write_instance(const instance& inst) {
    std::vector<keyed_line> lines;
    lines.reserve(inst.detections.size() + inst.transitions.size() + inst.conflicts.size());

    for (const detection& d : inst.detections) {
        lines.push_back({{d.id.frame, 0, d.id.index},
                         "H " + std::to_string(d.id.frame) + " " + std::to_string(d.id.index) + " " +
                             format_double(d.cost) + " " + format_double(d.appearance_cost) + " " +
                             format_double(d.disappearance_cost)});
    }
    for (const transition& t : inst.transitions) {
        if (t.kind == transition::kind_t::move) {
            lines.push_back({{t.from.frame, 1, t.from.index, t.to1.index},
                             "MOVE " + std::to_string(t.from.frame) + " " + std::to_string(t.from.index) + " " +
                                 std::to_string(t.to1.index) + " " + format_double(t.cost)});
        } else {
            const std::int32_t lo = std::min(t.to1.index, t.to2.index);
            const std::int32_t hi = std::max(t.to1.index, t.to2.index);
            lines.push_back({{t.from.frame, 2, t.from.index, lo, hi},
                             "DIV " + std::to_string(t.from.frame) + " " + std::to_string(t.from.index) + " " +
                                 std::to_string(lo) + " " + std::to_string(hi) + " " + format_double(t.cost)});
        }
    }
    for (const conflict_set& c : inst.conflicts) {
        std::vector<std::int32_t> members;
        for (detection_id id : c.members) members.push_back(id.index);
        std::sort(members.begin(), members.end());
        keyed_line line{{c.frame, 3}, "CONFSET " + std::to_string(c.frame)};
        for (std::int32_t m : members) {
            line.key.push_back(m);
            line.text += " " + std::to_string(m);
        }
        lines.push_back(std::move(line));
    }

    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const keyed_line& line : lines) {
        out += line.text;
        out += '\n';
    }
    return out;
}

std::string write_solution(const instance& inst, const assignment& x, double energy, double dual_bound) {
    const feasibility_report report = check_feasible(inst, x);
    if (!report.ok())
        throw io_error("refusing to write infeasible solution: " + report.violations.front());

    std::string out;
    out += "ENERGY " + format_double(energy) + "\n";
    out += "BOUND " + format_double(dual_bound) + "\n";
    out += "GAP " + format_double(relative_gap(energy, dual_bound)) + "\n";

    std::vector<keyed_line> lines;
    for (std::size_t d = 0; d < inst.detections.size(); ++d) {
        if (!x.detection_on[d])
            continue;
        const detection_id id = inst.detections[d].id;
        lines.push_back({{id.frame, 0, id.index}, "ON " + std::to_string(id.frame) + " " + std::to_string(id.index)});
    }
    for (std::size_t t = 0; t < inst.transitions.size(); ++t) {
        if (!x.transition_on[t])
            continue;
        const transition& tr = inst.transitions[t];
        if (tr.kind == transition::kind_t::move) {
            lines.push_back({{tr.from.frame, 1, tr.from.index, tr.to1.index},
                             "LINK MOVE " + std::to_string(tr.from.frame) + " " + std::to_string(tr.from.index) +
                                 " " + std::to_string(tr.to1.index)});
        } else {
            const std::int32_t lo = std::min(tr.to1.index, tr.to2.index);
            const std::int32_t hi = std::max(tr.to1.index, tr.to2.index);
            lines.push_back({{tr.from.frame, 2, tr.from.index, lo, hi},
                             "LINK DIV " + std::to_string(tr.from.frame) + " " + std::to_string(tr.from.index) +
                                 " " + std::to_string(lo) + " " + std::to_string(hi)});
        }
    }
    std::sort(lines.begin(), lines.end());
    for (const keyed_line& line : lines) {
        out += line.text;
        out += '\n';
    }
    return out;
}

parsed_solution parse_solution(const instance& inst, std::string_view text) {
    const instance_index idx(inst);
    parsed_solution sol;
    sol.x = assignment::all_off(inst);

    // transition lookup keyed like the writer
    std::map<std::tuple<int, std::int32_t, std::int32_t, std::int32_t, std::int32_t>, std::size_t> transitions;
    for (std::size_t t = 0; t < inst.transitions.size(); ++t) {
        const transition& tr = inst.transitions[t];
        if (tr.kind == transition::kind_t::move)
            transitions[{0, tr.from.frame, tr.from.index, tr.to1.index, 0}] = t;
        else
            transitions[{1, tr.from.frame, tr.from.index, std::min(tr.to1.index, tr.to2.index),
                         std::max(tr.to1.index, tr.to2.index)}] = t;
    }

    bool have_energy = false, have_bound = false, have_gap = false;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        const auto tokens = tokenize(line);
        if (tokens.empty())
            return;
        const std::string_view kind = tokens[0];
        if (kind == "ENERGY" && tokens.size() == 2) {
            sol.energy = parse_float(tokens[1], line_no);
            have_energy = true;
        } else if (kind == "BOUND" && tokens.size() == 2) {
            sol.bound = parse_float(tokens[1], line_no);
            have_bound = true;
        } else if (kind == "GAP" && tokens.size() == 2) {
            sol.gap = parse_float(tokens[1], line_no);
            have_gap = true;
        } else if (kind == "ON" && tokens.size() == 3) {
            const detection_id id{parse_int(tokens[1], line_no), parse_int(tokens[2], line_no)};
            if (!idx.has_detection(id))
                fail_line(line_no, "unknown detection " + to_string(id));
            sol.x.detection_on[idx.detection_ordinal(id)] = 1;
        } else if (kind == "LINK" && tokens.size() >= 2 && tokens[1] == "MOVE" && tokens.size() == 5) {
            const std::int32_t frame = parse_int(tokens[2], line_no);
            const auto key = std::make_tuple(0, frame, parse_int(tokens[3], line_no), parse_int(tokens[4], line_no), 0);
            const auto it = transitions.find(key);
            if (it == transitions.end())
                fail_line(line_no, "unknown move transition");
            sol.x.transition_on[it->second] = 1;
        } else if (kind == "LINK" && tokens.size() >= 2 && tokens[1] == "DIV" && tokens.size() == 6) {
            const std::int32_t frame = parse_int(tokens[2], line_no);
            const std::int32_t a = parse_int(tokens[4], line_no);
            const std::int32_t b = parse_int(tokens[5], line_no);
            const auto key = std::make_tuple(1, frame, parse_int(tokens[3], line_no), std::min(a, b), std::max(a, b));
            const auto it = transitions.find(key);
            if (it == transitions.end())
                fail_line(line_no, "unknown division transition");
            sol.x.transition_on[it->second] = 1;
        } else {
            fail_line(line_no, "unknown solution record '" + std::string(kind) + "'");
        }
    });

    if (!have_energy || !have_bound || !have_gap)
        throw io_error("solution file misses ENERGY/BOUND/GAP header");
    return sol;
}

std::string write_convergence_csv(std::span<const convergence_record> records) {
    std::string out = "sweep,direction,dual_bound,primal_energy,wall_time_s\n";
    for (const convergence_record& r : records) {
        out += std::to_string(r.sweep);
        out += ',';
        out += to_string(r.direction);
        out += ',';
        out += format_double(r.dual_bound);
        out += ',';
        if (r.primal_energy)
            out += format_double(*r.primal_energy);
        out += ',';
        std::array<char, 64> buf;
        const int n = std::snprintf(buf.data(), buf.size(), "%.6f", r.wall_time_s);
        out.append(buf.data(), std::size_t(n));
        out += '\n';
    }
    return out;
}

config_file config_file::parse(std::string_view text) {
    config_file cfg;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            if (!tokenize(line).empty())
                fail_line(line_no, "expected 'key = value'");
            return;
        }
        const auto trim = [](std::string_view s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
                s.remove_prefix(1);
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
                s.remove_suffix(1);
            return s;
        };
        const std::string key{trim(line.substr(0, eq))};
        const std::string value{trim(line.substr(eq + 1))};
        if (key.empty() || value.empty())
            fail_line(line_no, "expected 'key = value'");
        if (!cfg.entries_.emplace(key, value).second)
            fail_line(line_no, "duplicate key '" + key + "'");
    });
    return cfg;
}

double config_file::get_double(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end())
        return fallback;
    double value = 0.0;
    const std::string_view s = it->second;
    const auto [ptr, ec] = std::from_chars(s.begin(), s.end(), value);
    if (ec != std::errc() || ptr != s.end())
        throw io_error("config key '" + key + "': expected number, got '" + it->second + "'");
    return value;
}

std::int64_t config_file::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end())
        return fallback;
    std::int64_t value = 0;
    const std::string_view s = it->second;
    const auto [ptr, ec] = std::from_chars(s.begin(), s.end(), value);
    if (ec != std::errc() || ptr != s.end())
        throw io_error("config key '" + key + "': expected integer, got '" + it->second + "'");
    return value;
}

std::uint64_t config_file::get_uint(const std::string& key, std::uint64_t fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end())
        return fallback;
    std::uint64_t value = 0;
    const std::string_view s = it->second;
    const auto [ptr, ec] = std::from_chars(s.begin(), s.end(), value);
    if (ec != std::errc() || ptr != s.end())
        throw io_error("config key '" + key + "': expected unsigned integer, got '" + it->second + "'");
    return value;
}

namespace {

constexpr std::string_view kKnownKeys[] = {
    "det.alpha",  "det.beta",  "det.gamma", "det.area_limit",
    "move.alpha", "move.beta",
    "div.alpha",  "div.beta",  "div.gamma", "div.kappa", "div.rho", "div.sigma", "div.tau",
    "app.alpha",  "app.beta",  "app.gamma",
    "dis.alpha",  "dis.beta",  "dis.gamma",
    "solver.max_sweeps", "solver.gap_tolerance", "solver.stall_tolerance", "solver.primal_period",
    "gen.frames", "gen.initial_objects", "gen.division_prob", "gen.motion_sigma",
    "gen.hypotheses_per_object", "gen.candidate_radius", "gen.seed",
};

}  // namespace

std::span<const std::string_view> known_config_keys() { return kKnownKeys; }

void config_file::require_known(std::span<const std::string_view> known) const {
    for (const auto& [key, value] : entries_) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw io_error("unknown config key '" + key + "'");
    }
}

cost_params cost_params_from_config(const config_file& cfg) {
    cost_params p = cost_params::defaults();
    p.det.alpha = cfg.get_double("det.alpha", p.det.alpha);
    p.det.beta = cfg.get_double("det.beta", p.det.beta);
    p.det.gamma = cfg.get_double("det.gamma", p.det.gamma);
    p.det.area_limit = cfg.get_double("det.area_limit", p.det.area_limit);
    p.move.alpha = cfg.get_double("move.alpha", p.move.alpha);
    p.move.beta = cfg.get_double("move.beta", p.move.beta);
    p.div.alpha = cfg.get_double("div.alpha", p.div.alpha);
    p.div.beta = cfg.get_double("div.beta", p.div.beta);
    p.div.gamma = cfg.get_double("div.gamma", p.div.gamma);
    p.div.kappa = cfg.get_double("div.kappa", p.div.kappa);
    p.div.rho = cfg.get_double("div.rho", p.div.rho);
    p.div.sigma = cfg.get_double("div.sigma", p.div.sigma);
    p.div.tau = cfg.get_double("div.tau", p.div.tau);
    p.app.alpha = cfg.get_double("app.alpha", p.app.alpha);
    p.app.beta = cfg.get_double("app.beta", p.app.beta);
    p.app.gamma = cfg.get_double("app.gamma", p.app.gamma);
    p.dis.alpha = cfg.get_double("dis.alpha", p.dis.alpha);
    p.dis.beta = cfg.get_double("dis.beta", p.dis.beta);
    p.dis.gamma = cfg.get_double("dis.gamma", p.dis.gamma);
    return p;
}

solver_config solver_config_from_config(const config_file& cfg) {
    solver_config c;
    c.max_sweeps = std::uint32_t(cfg.get_int("solver.max_sweeps", c.max_sweeps));
    c.gap_tolerance = cfg.get_double("solver.gap_tolerance", c.gap_tolerance);
    c.stall_tolerance = cfg.get_double("solver.stall_tolerance", c.stall_tolerance);
    c.primal_period = std::uint32_t(cfg.get_int("solver.primal_period", c.primal_period));
    if (!c.valid())
        throw io_error("invalid solver configuration values");
    return c;
}

gen_params gen_params_from_config(const config_file& cfg) {
    gen_params p;
    p.frames = std::int32_t(cfg.get_int("gen.frames", p.frames));
    p.initial_objects = std::int32_t(cfg.get_int("gen.initial_objects", p.initial_objects));
    p.division_prob = cfg.get_double("gen.division_prob", p.division_prob);
    p.motion_sigma = cfg.get_double("gen.motion_sigma", p.motion_sigma);
    p.hypotheses_per_object = std::int32_t(cfg.get_int("gen.hypotheses_per_object", p.hypotheses_per_object));
    p.candidate_radius = cfg.get_double("gen.candidate_radius", p.candidate_radius);
    p.seed = cfg.get_uint("gen.seed", p.seed);
    if (!p.valid())
        throw io_error("invalid generator parameters");
    return p;
}

}  // namespace tba
