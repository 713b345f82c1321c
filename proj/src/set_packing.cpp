#include "tba/set_packing.hpp"

#include <algorithm>
#include <stdexcept>

namespace tba {

namespace {

// true when a (smaller wins) is lexicographically before b; both are sorted
// lists of included indices and the vector with the first extra 1 loses
bool lex_before(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++i;
            ++j;
        } else {
            return a[i] > b[j];  // the other one has a 1 at an earlier index
        }
    }
    return i == a.size() && j < b.size();
}

struct component_solver {
    const std::vector<double>& scores;
    const std::vector<std::vector<std::uint32_t>>& item_sets;  // per item: conflict set ids
    std::vector<std::uint32_t> items;  // component members, branch order (score ascending)
    std::vector<double> suffix_sum;    // sum of scores of items[d..]

    std::vector<int>& set_active;      // shared scratch, zeroed between components
    std::vector<std::uint32_t> chosen;

    double best_value = 0.0;
    std::vector<std::uint32_t> best_chosen;  // sorted by original index

    void search(std::size_t depth, double value) {
        if (depth == items.size()) {
            std::vector<std::uint32_t> sorted = chosen;
            std::sort(sorted.begin(), sorted.end());
            if (value < best_value || (value == best_value && lex_before(sorted, best_chosen))) {
                best_value = value;
                best_chosen = std::move(sorted);
            }
            return;
        }
        if (value + suffix_sum[depth] > best_value)
            return;  // even taking every remaining item cannot reach the incumbent

        const std::uint32_t item = items[depth];
        bool feasible = true;
        for (std::uint32_t s : item_sets[item])
            feasible = feasible && set_active[s] == 0;

        if (feasible) {
            for (std::uint32_t s : item_sets[item]) ++set_active[s];
            chosen.push_back(item);
            search(depth + 1, value + scores[item]);
            chosen.pop_back();
            for (std::uint32_t s : item_sets[item]) --set_active[s];
        }
        search(depth + 1, value);
    }
};

}  // namespace

packing_result solve_packing(const packing_problem& p) {
    const std::size_t n = p.scores.size();
    for (const auto& c : p.conflicts)
        for (std::uint32_t v : c)
            if (v >= n)
                throw std::invalid_argument("packing conflict member out of range");

    packing_result result;
    result.active.assign(n, 0);

    // only items with negative score can be part of an optimal packing
    std::vector<std::uint8_t> negative(n, 0);
    for (std::size_t i = 0; i < n; ++i) negative[i] = p.scores[i] < 0.0;

    std::vector<std::vector<std::uint32_t>> item_sets(n);
    std::vector<std::vector<std::uint32_t>> set_items(p.conflicts.size());
    for (std::size_t s = 0; s < p.conflicts.size(); ++s) {
        for (std::uint32_t v : p.conflicts[s]) {
            if (negative[v]) {
                item_sets[v].push_back(std::uint32_t(s));
                set_items[s].push_back(v);
            }
        }
    }

    std::vector<int> set_active(p.conflicts.size(), 0);
    std::vector<std::uint8_t> visited(n, 0);

    for (std::size_t seed = 0; seed < n; ++seed) {
        if (!negative[seed] || visited[seed])
            continue;

        // collect the connected component of the conflict graph around seed
        std::vector<std::uint32_t> component{std::uint32_t(seed)};
        visited[seed] = 1;
        for (std::size_t head = 0; head < component.size(); ++head) {
            for (std::uint32_t s : item_sets[component[head]]) {
                for (std::uint32_t other : set_items[s]) {
                    if (!visited[other]) {
                        visited[other] = 1;
                        component.push_back(other);
                    }
                }
            }
        }

        component_solver solver{p.scores, item_sets, std::move(component), {}, set_active, {}, 0.0, {}};
        std::sort(solver.items.begin(), solver.items.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (p.scores[a] != p.scores[b])
                return p.scores[a] < p.scores[b];
            return a < b;
        });
        solver.suffix_sum.assign(solver.items.size() + 1, 0.0);
        for (std::size_t d = solver.items.size(); d-- > 0;)
            solver.suffix_sum[d] = solver.suffix_sum[d + 1] + p.scores[solver.items[d]];

        solver.search(0, 0.0);

        for (std::uint32_t v : solver.best_chosen) result.active[v] = 1;
    }

    // canonical value: accumulate in index order (bit-exact no matter how the
    // components partitioned the items)
    result.value = 0.0;
    for (std::size_t v = 0; v < n; ++v)
        if (result.active[v])
            result.value += p.scores[v];

    return result;
}

}  // namespace tba
