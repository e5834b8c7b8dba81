#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "error.hpp"

namespace tsplp {

// A tour visits cities 1..n-1 in `order`, starting and ending at depot 0.
// order[r-1] is the city visited at time-of-travel r.
struct Tour {
    std::vector<int> order;

    friend bool operator==(const Tour&, const Tour&) = default;
    friend auto operator<=>(const Tour&, const Tour&) = default;
};

inline std::string to_string(const Tour& tour) {
    std::string s = "0";
    for (int c : tour.order) s += "-" + std::to_string(c);
    return s + "-0";
}

// Throws ValidationError unless `tour` is a permutation of 1..n-1.
inline void validate_tour(int n, const Tour& tour) {
    if (static_cast<int>(tour.order.size()) != n - 1)
        throw ValidationError("tour has " + std::to_string(tour.order.size()) +
                              " cities, expected " + std::to_string(n - 1));
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int c : tour.order) {
        if (c < 1 || c >= n) throw ValidationError("tour city " + std::to_string(c) + " out of range");
        if (seen[c]) throw ValidationError("tour repeats city " + std::to_string(c));
        seen[c] = 1;
    }
}

enum class CostModel { euclidean_pct, uniform };

inline std::string to_string(CostModel m) {
    return m == CostModel::euclidean_pct ? "euclid" : "uniform";
}

struct GenConfig {
    int n = 7;
    CostModel cost_model = CostModel::euclidean_pct;
    double pct_low = 0.9;
    double pct_high = 1.1;
    double low = 0.0;
    double high = 100.0;
    bool symmetric = true;
    bool integer = false;
    bool triangle = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 3) throw ConfigError("city count must be at least 3");
        if (!(pct_low <= pct_high)) throw ConfigError("pct_low must not exceed pct_high");
        if (!(low <= high)) throw ConfigError("low must not exceed high");
        if (cost_model == CostModel::euclidean_pct && pct_low < 0.0)
            throw ConfigError("percentage bounds must be nonnegative");
    }
};

// Describes where an instance came from. `external` instances carry the
// symmetric/integer flags detected when they were loaded.
struct InstanceMeta {
    bool external = true;
    CostModel cost_model = CostModel::euclidean_pct;
    std::uint64_t seed = 0;
    bool symmetric = false;
    bool integer = false;
    bool triangle = false;
};

class TspInstance {
public:
    TspInstance(int n, std::vector<double> cost, InstanceMeta meta = {})
        : n_(n), cost_(std::move(cost)), meta_(meta) {
        if (n_ < 3) throw ValidationError("instance needs at least 3 cities");
        if (cost_.size() != static_cast<std::size_t>(n_) * n_)
            throw ValidationError("cost matrix size does not match city count");
        for (int i = 0; i < n_; ++i) cost_[idx(i, i)] = 0.0;
    }

    int n() const noexcept { return n_; }
    double cost(int i, int j) const { return cost_[idx(i, j)]; }
    const std::vector<double>& costs() const noexcept { return cost_; }
    const InstanceMeta& meta() const noexcept { return meta_; }

    bool is_symmetric() const {
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j)
                if (cost(i, j) != cost(j, i)) return false;
        return true;
    }

    bool is_integer() const {
        return std::all_of(cost_.begin(), cost_.end(), [](double v) { return std::floor(v) == v; });
    }

    TspInstance transposed() const {
        std::vector<double> t(cost_.size());
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) t[idx(j, i)] = cost(i, j);
        return {n_, std::move(t), meta_};
    }

private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

    int n_;
    std::vector<double> cost_;
    InstanceMeta meta_;
};

// c(0,i_1) + sum c(i_r,i_{r+1}) + c(i_m,0)
inline double tour_cost(const TspInstance& inst, const Tour& tour) {
    validate_tour(inst.n(), tour);
    double total = inst.cost(0, tour.order.front());
    for (std::size_t r = 0; r + 1 < tour.order.size(); ++r)
        total += inst.cost(tour.order[r], tour.order[r + 1]);
    return total + inst.cost(tour.order.back(), 0);
}

// SplitMix64. Portable: the output sequence is fixed by the seed alone,
// and uniform reals are derived from the top 53 bits, so generated
// instances are bit-identical across platforms and standard libraries.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Stream for the ordered pair (i, j): seeded with
    // mix(seed ^ (0xD1B54A32D192ED03 * (i * n + j + 1))). Each cost entry thus
    // has its own stream, independent of generation order.
    static SplitMix64 for_pair(std::uint64_t seed, int n, int i, int j) {
        std::uint64_t key = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
                            static_cast<std::uint64_t>(j) + 1;
        SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ULL * key));
        return SplitMix64(mixer.next());
    }

private:
    std::uint64_t state_;
};

namespace detail {

// Clamp c(i,j) to min over k of c(i,k)+c(k,j) (Floyd-Warshall closure) until
// no triple violates the triangle inequality. Returns false if the pass
// budget runs out.
inline bool repair_triangle(int n, std::vector<double>& c, int max_passes) {
    auto at = [&](int i, int j) -> double& { return c[static_cast<std::size_t>(i) * n + j]; };
    for (int pass = 0; pass < max_passes; ++pass) {
        bool changed = false;
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i) {
                if (i == k) continue;
                for (int j = 0; j < n; ++j) {
                    if (j == i || j == k) continue;
                    double via = at(i, k) + at(k, j);
                    if (at(i, j) > via) {
                        at(i, j) = via;
                        changed = true;
                    }
                }
            }
        if (!changed) return true;
    }
    return false;
}

}  // namespace detail

// Coordinates are drawn from the main stream (seeded with config.seed); the
// perturbation factor or uniform cost for each pair comes from that pair's
// own stream (SplitMix64::for_pair). Symmetric instances draw once per
// unordered pair using the (min, max) key. The triangle option repairs the
// matrix by shortest-path clamping rather than re-drawing.
inline TspInstance generate_random(const GenConfig& config) {
    config.validate();
    const int n = config.n;
    std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
    auto at = [&](int i, int j) -> double& { return c[static_cast<std::size_t>(i) * n + j]; };

    std::vector<std::pair<double, double>> pts;
    if (config.cost_model == CostModel::euclidean_pct) {
        SplitMix64 rng(config.seed);
        pts.resize(static_cast<std::size_t>(n));
        for (auto& p : pts) {
            p.first = rng.uniform(0.0, 100.0);
            p.second = rng.uniform(0.0, 100.0);
        }
    }

    auto draw = [&](int i, int j) {
        SplitMix64 rng = SplitMix64::for_pair(config.seed, n, i, j);
        double v;
        if (config.cost_model == CostModel::euclidean_pct) {
            double d = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
            v = rng.uniform(config.pct_low, config.pct_high) * d;
        } else {
            v = rng.uniform(config.low, config.high);
        }
        return config.integer ? std::round(v) : v;
    };

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (config.symmetric) {
                if (i < j) at(i, j) = at(j, i) = draw(i, j);
            } else {
                at(i, j) = draw(i, j);
            }
        }

    if (config.triangle && !detail::repair_triangle(n, c, 8))
        throw GenerationError("triangle inequality repair did not converge");

    InstanceMeta meta;
    meta.external = false;
    meta.cost_model = config.cost_model;
    meta.seed = config.seed;
    meta.symmetric = config.symmetric;
    meta.integer = config.integer;
    meta.triangle = config.triangle;
    return {n, std::move(c), meta};
}

// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace detail

inline TspInstance parse_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t blank_run = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto text = detail::trim(line);
        if (lineno == 1 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
        if (text.empty()) {
            ++blank_run;
            continue;
        }
        if (blank_run > 0 && !rows.empty()) throw ParseError("blank line inside matrix", lineno - blank_run);
        blank_run = 0;
        std::vector<double> row;
        std::size_t col = 0;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = text.find(',', start);
            auto cell = detail::trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
            ++col;
            double v = 0.0;
            if (!detail::parse_double(cell, v))
                throw ParseError("non-numeric cell '" + std::string(cell) + "'", lineno, col);
            row.push_back(v);
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("row has " + std::to_string(row.size()) + " fields, expected " +
                                 std::to_string(rows.front().size()),
                             lineno);
        rows.push_back(std::move(row));
    }
    const std::size_t n = rows.size();
    if (n < 3) throw ParseError("matrix needs at least 3 rows, found " + std::to_string(n));
    if (rows.front().size() != n)
        throw ParseError("matrix is " + std::to_string(n) + "x" + std::to_string(rows.front().size()) +
                         ", expected square");
    std::vector<double> flat;
    flat.reserve(n * n);
    for (auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    TspInstance inst(static_cast<int>(n), std::move(flat));
    InstanceMeta meta;
    meta.external = true;
    meta.symmetric = inst.is_symmetric();
    meta.integer = inst.is_integer();
    return {inst.n(), inst.costs(), meta};
}

inline TspInstance load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open " + path);
    return parse_csv(in);
}

inline void write_csv(std::ostream& out, const TspInstance& inst) {
    for (int i = 0; i < inst.n(); ++i) {
        for (int j = 0; j < inst.n(); ++j) {
            if (j) out << ',';
            out << format_double(inst.cost(i, j));
        }
        out << '\n';
    }
}

inline void save_csv(const TspInstance& inst, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write " + path);
    write_csv(out, inst);
    if (!out) throw FileError("write failed for " + path);
}

}  // namespace tsplp
