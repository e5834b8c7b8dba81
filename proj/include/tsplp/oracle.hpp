#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "instance.hpp"

// Exact TSP references used to audit the LP.
namespace tsplp {

struct OracleResult {
    double cost;
    Tour tour;
};

// All (n-1)! tours in lexicographic order; the first strict minimum wins, so
// ties resolve to the lexicographically smallest tour.
inline OracleResult brute_force_opt(const TspInstance& inst) {
    const int n = inst.n();
    if (n > 10) throw ValidationError("brute force refused for n > 10 (got " + std::to_string(n) + ")");
    Tour t;
    t.order.resize(static_cast<std::size_t>(n - 1));
    std::iota(t.order.begin(), t.order.end(), 1);
    OracleResult best{std::numeric_limits<double>::infinity(), t};
    do {
        double c = tour_cost(inst, t);
        if (c < best.cost) best = {c, t};
    } while (std::next_permutation(t.order.begin(), t.order.end()));
    return best;
}

// Bellman-Held-Karp over subsets of cities 1..n-1, table indexed by
// (subset bitmask, last city). Partial sums accumulate in the same order as
// tour_cost, so the returned cost is bit-identical to tour_cost(tour).
inline OracleResult held_karp_opt(const TspInstance& inst) {
    const int n = inst.n();
    if (n > 17) throw ValidationError("Held-Karp refused for n > 17 (got " + std::to_string(n) + ")");
    const int m = n - 1;
    const std::size_t full = (std::size_t{1} << m) - 1;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dp((full + 1) * static_cast<std::size_t>(m), inf);
    std::vector<std::int8_t> pred((full + 1) * static_cast<std::size_t>(m), -1);
    auto at = [&](std::size_t mask, int last) { return mask * static_cast<std::size_t>(m) + static_cast<std::size_t>(last); };

    for (int j = 0; j < m; ++j) dp[at(std::size_t{1} << j, j)] = inst.cost(0, j + 1);
    for (std::size_t mask = 1; mask <= full; ++mask)
        for (int last = 0; last < m; ++last) {
            if (!(mask >> last & 1)) continue;
            const double base = dp[at(mask, last)];
            if (base == inf) continue;
            for (int next = 0; next < m; ++next) {
                if (mask >> next & 1) continue;
                std::size_t nm = mask | (std::size_t{1} << next);
                double v = base + inst.cost(last + 1, next + 1);
                if (v < dp[at(nm, next)]) {
                    dp[at(nm, next)] = v;
                    pred[at(nm, next)] = static_cast<std::int8_t>(last);
                }
            }
        }

    double best = inf;
    int last = -1;
    for (int j = 0; j < m; ++j) {
        double v = dp[at(full, j)] + inst.cost(j + 1, 0);
        if (v < best) {
            best = v;
            last = j;
        }
    }
    Tour t;
    std::size_t mask = full;
    while (last >= 0) {
        t.order.push_back(last + 1);
        int p = pred[at(mask, last)];
        mask &= ~(std::size_t{1} << last);
        last = p;
    }
    std::reverse(t.order.begin(), t.order.end());
    return {best, std::move(t)};
}

// Miller-Tucker-Zemlin integer program in free MPS: binary xm_i_j for every
// ordered pair of distinct cities, order variables u_i in [1, n-1] for
// i = 1..n-1, one out- and one in-degree row per city, and
// u_i - u_j + (n-1) xm_i_j <= n-2 for distinct i, j in 1..n-1.
inline void write_mtz(std::ostream& out, const TspInstance& inst) {
    const int n = inst.n();
    auto xm = [](int i, int j) { return "xm_" + std::to_string(i) + "_" + std::to_string(j); };
    auto mtz = [](int i, int j) { return "mtz_" + std::to_string(i) + "_" + std::to_string(j); };
    out << "NAME MTZ_N" << n << '\n';
    out << "ROWS\n N COST\n";
    for (int i = 0; i < n; ++i) out << " E out_" << i << '\n';
    for (int j = 0; j < n; ++j) out << " E in_" << j << '\n';
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j)
            if (i != j) out << " L " << mtz(i, j) << '\n';
    out << "COLUMNS\n";
    out << " MARKER 'MARKER' 'INTORG'\n";
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const std::string c = xm(i, j);
            out << ' ' << c << " COST " << format_double(inst.cost(i, j)) << '\n';
            out << ' ' << c << " out_" << i << " 1\n";
            out << ' ' << c << " in_" << j << " 1\n";
            if (i >= 1 && j >= 1) out << ' ' << c << ' ' << mtz(i, j) << ' ' << (n - 1) << '\n';
        }
    out << " MARKER 'MARKER' 'INTEND'\n";
    for (int i = 1; i < n; ++i) {
        const std::string u = "u_" + std::to_string(i);
        for (int j = 1; j < n; ++j) {
            if (i == j) continue;
            out << ' ' << u << ' ' << mtz(i, j) << " 1\n";
            out << ' ' << u << ' ' << mtz(j, i) << " -1\n";
        }
    }
    out << "RHS\n";
    for (int i = 0; i < n; ++i) out << " RHS out_" << i << " 1\n";
    for (int j = 0; j < n; ++j) out << " RHS in_" << j << " 1\n";
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j)
            if (i != j) out << " RHS " << mtz(i, j) << ' ' << (n - 2) << '\n';
    out << "BOUNDS\n";
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) out << " BV BND " << xm(i, j) << '\n';
    for (int i = 1; i < n; ++i) {
        out << " LO BND u_" << i << " 1\n";
        out << " UP BND u_" << i << ' ' << (n - 1) << '\n';
    }
    out << "ENDATA\n";
}

inline void write_mtz(const TspInstance& inst, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write " + path);
    write_mtz(out, inst);
    if (!out) throw FileError("write failed for " + path);
}

}  // namespace tsplp
