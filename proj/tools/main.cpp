#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include <CLI11.hpp>

#include "tba/decomposition.hpp"
#include "tba/dual_bca.hpp"
#include "tba/instance_io.hpp"
#include "tba/oracle.hpp"
#include "tba/synth_gen.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw tba::io_error("cannot open '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw tba::io_error("cannot write '" + path + "'");
    out << text;
}

tba::config_file load_config(const std::string& path) {
    if (path.empty())
        return {};
    tba::config_file cfg = tba::config_file::parse(read_file(path));
    cfg.require_known(tba::known_config_keys());
    return cfg;
}

struct solve_options {
    std::string instance_path;
    std::string config_path;
    std::string out_path;
    std::string csv_path;
    std::string direction = "both";
    std::int64_t max_sweeps = -1;
    double gap = -1.0;
};

int cmd_solve(const solve_options& opt) {
    const tba::instance inst = tba::parse_instance(read_file(opt.instance_path));
    const tba::config_file cfg = load_config(opt.config_path);

    tba::solver_config config = tba::solver_config_from_config(cfg);
    if (opt.max_sweeps >= 0)
        config.max_sweeps = std::uint32_t(opt.max_sweeps);
    if (opt.gap >= 0.0)
        config.gap_tolerance = opt.gap;
    if (opt.direction == "forward")
        config.primal_dir = tba::primal_direction::forward;
    else if (opt.direction == "backward")
        config.primal_dir = tba::primal_direction::backward;

    const tba::decomposed_graph graph = tba::decompose(inst);
    const tba::solve_result result = tba::run(graph, config);

    if (!opt.out_path.empty())
        write_file(opt.out_path, tba::write_solution(inst, result.best_assignment, result.primal_energy,
                                                     result.dual_bound));
    if (!opt.csv_path.empty())
        write_file(opt.csv_path, tba::write_convergence_csv(result.log));

    std::cout << "ENERGY " << tba::format_double(result.primal_energy) << "\n"
              << "BOUND " << tba::format_double(result.dual_bound) << "\n"
              << "GAP " << tba::format_double(result.gap) << "\n";
    return 0;
}

int cmd_check(const std::string& instance_path, const std::string& solution_path) {
    const tba::instance inst = tba::parse_instance(read_file(instance_path));
    const tba::parsed_solution sol = tba::parse_solution(inst, read_file(solution_path));

    const tba::feasibility_report report = tba::check_feasible(inst, sol.x);
    if (!report.ok()) {
        for (const std::string& v : report.violations)
            std::cerr << "infeasible: " << v << "\n";
        return 1;
    }
    const double recomputed = tba::energy(inst, sol.x).value;
    if (std::abs(recomputed - sol.energy) > 1e-6) {
        std::cerr << "energy mismatch: stated " << tba::format_double(sol.energy) << ", recomputed "
                  << tba::format_double(recomputed) << "\n";
        return 1;
    }
    std::cout << "OK\n";
    return 0;
}

int cmd_generate(const std::string& config_path, const std::string& out_path) {
    const tba::config_file cfg = load_config(config_path);
    const tba::gen_params params = tba::gen_params_from_config(cfg);
    const tba::cost_params costs = tba::cost_params_from_config(cfg);
    const tba::generated g = tba::generate(params, costs);
    const std::string text = tba::write_instance(g.inst);
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
    return 0;
}

int cmd_oracle(const std::string& instance_path) {
    const tba::instance inst = tba::parse_instance(read_file(instance_path));
    const tba::oracle_result result = tba::brute_force_solve(inst);
    std::cout << "OPTIMUM " << tba::format_double(result.optimum) << "\n"
              << "EXPLORED " << result.explored << "\n";
    return 0;
}

struct running_stat {
    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;

    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++n;
    }
    double mean() const { return n ? sum / double(n) : 0.0; }
    double stddev() const {
        if (!n)
            return 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, sum_sq / double(n) - m * m));
    }
};

std::string fmt_stat(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

int cmd_stats(const std::string& instance_path) {
    const tba::instance inst = tba::parse_instance(read_file(instance_path));
    const tba::instance_index idx(inst);

    running_stat dets, confs, cliques;
    for (std::int32_t frame = 1; frame <= inst.frame_count; ++frame) {
        const auto& frame_dets = idx.detections_in_frame(frame);
        dets.add(double(frame_dets.size()));
        confs.add(double(idx.conflicts_in_frame(frame).size()));

        // transitive conflict cliques: components of the detections that
        // share at least one conflict set
        std::unordered_map<std::uint32_t, std::uint32_t> parent;
        std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t v) {
            while (parent[v] != v)
                v = parent[v] = parent[parent[v]];
            return v;
        };
        for (std::uint32_t c : idx.conflicts_in_frame(frame)) {
            std::uint32_t first = 0;
            bool have_first = false;
            for (const tba::detection_id id : inst.conflicts[c].members) {
                const std::uint32_t d = std::uint32_t(idx.detection_ordinal(id));
                parent.try_emplace(d, d);
                if (!have_first) {
                    first = d;
                    have_first = true;
                } else {
                    parent[find(d)] = find(first);
                }
            }
        }
        std::unordered_map<std::uint32_t, std::size_t> sizes;
        for (const auto& [v, unused] : parent) ++sizes[find(v)];
        for (const auto& [root, size] : sizes) cliques.add(double(size));
    }

    std::size_t moves = 0, divisions = 0;
    for (const tba::transition& t : inst.transitions)
        (t.kind == tba::transition::kind_t::move ? moves : divisions) += 1;

    std::cout << "frames " << inst.frame_count << "\n"
              << "detections " << inst.detections.size() << "\n"
              << "moves " << moves << "\n"
              << "divisions " << divisions << "\n"
              << "conflict_sets " << inst.conflicts.size() << "\n"
              << "detections_per_frame_mean " << fmt_stat(dets.mean()) << "\n"
              << "detections_per_frame_std " << fmt_stat(dets.stddev()) << "\n"
              << "conflicts_per_frame_mean " << fmt_stat(confs.mean()) << "\n"
              << "conflicts_per_frame_std " << fmt_stat(confs.stddev()) << "\n"
              << "conflict_clique_mean " << fmt_stat(cliques.mean()) << "\n"
              << "conflict_clique_std " << fmt_stat(cliques.stddev()) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"solver for tracking-by-assignment problems"};
    app.require_subcommand(1);

    solve_options solve;
    CLI::App* solve_cmd = app.add_subcommand("solve", "optimize an instance and report primal/dual bounds");
    solve_cmd->add_option("instance", solve.instance_path, "instance file")->required();
    solve_cmd->add_option("--config", solve.config_path, "configuration file");
    solve_cmd->add_option("--out", solve.out_path, "write the best solution here");
    solve_cmd->add_option("--csv", solve.csv_path, "write the convergence log here");
    solve_cmd->add_option("--direction", solve.direction, "primal heuristic direction")
        ->check(CLI::IsMember({"both", "forward", "backward"}));
    solve_cmd->add_option("--max-sweeps", solve.max_sweeps, "override solver.max_sweeps");
    solve_cmd->add_option("--gap", solve.gap, "override solver.gap_tolerance");

    std::string check_instance, check_solution;
    CLI::App* check_cmd = app.add_subcommand("check", "verify a solution file against an instance");
    check_cmd->add_option("instance", check_instance)->required();
    check_cmd->add_option("solution", check_solution)->required();

    std::string gen_config, gen_out;
    CLI::App* gen_cmd = app.add_subcommand("generate", "emit a synthetic instance");
    gen_cmd->add_option("--config", gen_config, "configuration file");
    gen_cmd->add_option("--out", gen_out, "output path (stdout when omitted)");

    std::string oracle_instance;
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "exact optimum of a tiny instance");
    oracle_cmd->add_option("instance", oracle_instance)->required();

    std::string stats_instance;
    CLI::App* stats_cmd = app.add_subcommand("stats", "structural statistics of an instance");
    stats_cmd->add_option("instance", stats_instance)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed())
            return cmd_solve(solve);
        if (check_cmd->parsed())
            return cmd_check(check_instance, check_solution);
        if (gen_cmd->parsed())
            return cmd_generate(gen_config, gen_out);
        if (oracle_cmd->parsed())
            return cmd_oracle(oracle_instance);
        if (stats_cmd->parsed())
            return cmd_stats(stats_instance);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
