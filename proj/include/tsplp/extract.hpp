#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "instance.hpp"
#include "tspfg.hpp"

// Tour extraction from arc flows. A TSP path touches every city once, one
// city per stage, using only arcs whose flow exceeds the threshold.
// Iterative elimination peels such paths off the flow, each with weight equal
// to its bottleneck arc, until the flow is exhausted.
namespace tsplp {

enum class ExtractMode { greedy, enumerative };

inline std::string to_string(ExtractMode m) { return m == ExtractMode::greedy ? "greedy" : "enum"; }

struct WeightedTour {
    double weight;
    Tour tour;
};

struct Decomposition {
    std::vector<WeightedTour> parts;
    double residual_norm = 0.0;  // max |y - sum w_t char(t)|
    double stage_mass = 0.0;     // common per-stage flow of the input
    bool exhausted = false;

    double weight_sum() const {
        double s = 0.0;
        for (const auto& p : parts) s += p.weight;
        return s;
    }
};

namespace detail {

// Depth-first search over support arcs. The first arc is taken among all
// stage-1 arcs by descending flow (ties: smaller head, then smaller tail);
// later arcs from the current city by descending flow (ties: smaller head).
// `visit` returns false to stop the search.
inline void search_paths(const VariableIndex& ix, std::span<const double> y, double threshold,
                         const std::function<bool(const std::vector<int>&)>& visit) {
    const int m = ix.m();
    if (y.size() < static_cast<std::size_t>(ix.y_count()))
        throw ValidationError("flow vector shorter than the y-block");
    auto flow = [&](int i, int r, int j) { return y[static_cast<std::size_t>(ix.y_col(i, r, j))]; };

    struct Cand {
        double v;
        int tail;
        int head;
    };
    std::vector<Cand> first;
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            if (i != j && flow(i, 1, j) > threshold) first.push_back({flow(i, 1, j), i, j});
    std::stable_sort(first.begin(), first.end(), [](const Cand& a, const Cand& b) {
        if (a.v != b.v) return a.v > b.v;
        if (a.head != b.head) return a.head < b.head;
        return a.tail < b.tail;
    });

    std::vector<int> path;
    std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
    bool stop = false;

    std::function<void(int)> extend = [&](int r) {
        // path holds cities at stages 1..r
        if (r == m) {
            if (!visit(path)) stop = true;
            return;
        }
        const int i = path.back();
        std::vector<Cand> next;
        for (int j = 1; j <= m; ++j)
            if (!used[j] && flow(i, r, j) > threshold) next.push_back({flow(i, r, j), i, j});
        std::stable_sort(next.begin(), next.end(), [](const Cand& a, const Cand& b) {
            if (a.v != b.v) return a.v > b.v;
            return a.head < b.head;
        });
        for (const auto& c : next) {
            path.push_back(c.head);
            used[c.head] = 1;
            extend(r + 1);
            used[c.head] = 0;
            path.pop_back();
            if (stop) return;
        }
    };

    for (const auto& c : first) {
        path = {c.tail, c.head};
        used[c.tail] = used[c.head] = 1;
        extend(2);
        used[c.tail] = used[c.head] = 0;
        if (stop) return;
    }
}

}  // namespace detail

inline std::optional<Tour> find_tsp_path(const VariableIndex& ix, std::span<const double> y, double threshold = 1e-6) {
    std::optional<Tour> found;
    detail::search_paths(ix, y, threshold, [&](const std::vector<int>& p) {
        found = Tour{p};
        return false;
    });
    return found;
}

inline std::vector<Tour> enumerate_tsp_paths(const VariableIndex& ix, std::span<const double> y, double threshold,
                                             std::size_t limit) {
    if (limit < 1) throw ValidationError("enumeration limit must be at least 1");
    std::vector<Tour> out;
    detail::search_paths(ix, y, threshold, [&](const std::vector<int>& p) {
        out.push_back(Tour{p});
        return out.size() < limit;
    });
    return out;
}

// Per-stage total flow sum_{i,j} y[i,r,j], r = 1..m-1.
inline std::vector<double> stage_sums(const VariableIndex& ix, std::span<const double> y) {
    const int m = ix.m();
    std::vector<double> sums(static_cast<std::size_t>(m - 1), 0.0);
    for (int i = 1; i <= m; ++i)
        for (int r = 1; r <= m - 1; ++r)
            for (int j = 1; j <= m; ++j)
                if (i != j) sums[static_cast<std::size_t>(r - 1)] += y[static_cast<std::size_t>(ix.y_col(i, r, j))];
    return sums;
}

// Arc-flow vector (y-block) of a tour.
inline std::vector<double> tour_flow(const VariableIndex& ix, const Tour& tour) {
    validate_tour(ix.n(), tour);
    std::vector<double> y(static_cast<std::size_t>(ix.y_count()), 0.0);
    for (int r = 1; r < ix.m(); ++r) y[static_cast<std::size_t>(ix.y_col(tour.order[r - 1], r, tour.order[r]))] = 1.0;
    return y;
}

struct EliminationOptions {
    ExtractMode mode = ExtractMode::enumerative;
    double threshold = 1e-6;
    std::size_t enumeration_limit = 100000;
    double stage_tolerance = 1e-6;
    // Enumerative mode: when the widest path strands flow, undo and try the
    // next-widest one, up to this many path removals in total. 0 disables.
    std::size_t backtrack_budget = 20000;
};

namespace detail {

struct Peeler {
    const VariableIndex& ix;
    const EliminationOptions& opt;
    std::vector<WeightedTour> parts;
    std::size_t budget;

    double resid(const std::vector<double>& w) const {
        double mx = 0.0;
        for (double v : w) mx = std::max(mx, std::abs(v));
        return mx;
    }

    std::size_t col(const Tour& t, int r) const {
        return static_cast<std::size_t>(ix.y_col(t.order[r - 1], r, t.order[r]));
    }

    // Removes bottleneck * path; the bottleneck arc becomes exactly zero.
    void peel(std::vector<double>& w, Tour t) {
        std::size_t arg = 0;
        double eps = std::numeric_limits<double>::infinity();
        for (int r = 1; r < ix.m(); ++r)
            if (w[col(t, r)] < eps) {
                eps = w[col(t, r)];
                arg = col(t, r);
            }
        for (int r = 1; r < ix.m(); ++r) w[col(t, r)] -= eps;
        w[arg] = 0.0;
        parts.push_back({eps, std::move(t)});
    }

    // Candidate paths, widest bottleneck first (stable on search order).
    std::vector<Tour> ranked(const std::vector<double>& w) const {
        auto all = enumerate_tsp_paths(ix, w, opt.threshold, opt.enumeration_limit);
        std::vector<std::pair<double, std::size_t>> key;
        for (std::size_t t = 0; t < all.size(); ++t) {
            double b = std::numeric_limits<double>::infinity();
            for (int r = 1; r < ix.m(); ++r) b = std::min(b, w[col(all[t], r)]);
            key.push_back({b, t});
        }
        std::stable_sort(key.begin(), key.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        std::vector<Tour> out;
        for (const auto& k : key) out.push_back(std::move(all[k.second]));
        return out;
    }

    // Single pass without backtracking.
    void run(std::vector<double>& w) {
        while (resid(w) > opt.threshold) {
            std::optional<Tour> pick;
            if (opt.mode == ExtractMode::greedy) {
                pick = find_tsp_path(ix, w, opt.threshold);
            } else {
                auto r = ranked(w);
                if (!r.empty()) pick = std::move(r.front());
            }
            if (!pick) return;
            peel(w, std::move(*pick));
        }
    }

    bool search(std::vector<double>& w) {
        if (resid(w) <= opt.threshold) return true;
        for (auto& t : ranked(w)) {
            if (budget == 0) return false;
            --budget;
            std::vector<double> saved = w;
            peel(w, std::move(t));
            if (search(w)) return true;
            parts.pop_back();
            w = std::move(saved);
        }
        return false;
    }
};

}  // namespace detail

// Iterative elimination: repeatedly choose a TSP path in the support of the
// remaining flow (greedy: the first one found; enumerative: the one with the
// largest bottleneck), subtract bottleneck * path, and record it. Every round
// zeroes an arc, so a pass ends after at most y_count rounds.
inline Decomposition iterative_elimination(const VariableIndex& ix, std::span<const double> y,
                                           const EliminationOptions& opt = {}) {
    const std::size_t ny = static_cast<std::size_t>(ix.y_count());
    if (y.size() < ny) throw ValidationError("flow vector shorter than the y-block");
    std::vector<double> w(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(ny));
    for (double v : w)
        if (v < -opt.threshold) throw ValidationError("flow has negative entry " + format_double(v));

    auto sums = stage_sums(ix, w);
    auto [lo, hi] = std::minmax_element(sums.begin(), sums.end());
    if (*hi - *lo > opt.stage_tolerance)
        throw ValidationError("stage flows are unequal (" + format_double(*lo) + " vs " + format_double(*hi) +
                              "); input is not a scaled tour-flow point");

    Decomposition dec;
    for (double s : sums) dec.stage_mass += s;
    dec.stage_mass /= static_cast<double>(sums.size());

    detail::Peeler pl{ix, opt, {}, opt.backtrack_budget};
    std::vector<double> work = w;
    bool done = false;
    if (opt.mode == ExtractMode::enumerative && opt.backtrack_budget > 0) done = pl.search(work);
    if (!done) {
        pl.parts.clear();
        work = w;
        pl.run(work);
    }
    dec.parts = std::move(pl.parts);
    dec.residual_norm = pl.resid(work);
    dec.exhausted = dec.residual_norm <= opt.threshold;
    return dec;
}

// Greedy first; if that leaves flow behind, start over in enumerative mode.
inline Decomposition decompose_with_fallback(const VariableIndex& ix, std::span<const double> y,
                                             EliminationOptions opt = {}) {
    opt.mode = ExtractMode::greedy;
    Decomposition dec = iterative_elimination(ix, y, opt);
    if (dec.exhausted) return dec;
    opt.mode = ExtractMode::enumerative;
    return iterative_elimination(ix, y, opt);
}

}  // namespace tsplp
