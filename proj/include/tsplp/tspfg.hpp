#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

// The TSP flow graph: node [i,r] is city i visited at time-of-travel r
// (cities and stages both range over 1..m, m = n-1), arc [i,r,j] travels
// from [i,r] to [j,r+1]. LP columns are one y per arc and one x per
// (node, arc) pair that can lie on a common tour path.
namespace tsplp {

struct NodeId {
    int i;
    int r;
    friend bool operator==(const NodeId&, const NodeId&) = default;
};

struct ArcId {
    int i;
    int r;
    int j;
    friend bool operator==(const ArcId&, const ArcId&) = default;
};

// Decoded column: an arc variable y[arc] or a node-arc variable x[node][arc].
struct VarKey {
    bool is_x = false;
    NodeId node{0, 0};
    ArcId arc{0, 0, 0};
    friend bool operator==(const VarKey&, const VarKey&) = default;
};

inline std::int64_t closed_form_y_count(std::int64_t m) { return m * (m - 1) * (m - 1); }

inline std::int64_t closed_form_x_count(std::int64_t m) {
    return m * (m - 1) * (m - 1) * ((m - 2) * (m - 2) + 2);
}

// x[i,r][j,s,k] is forced to zero (never created) when the node and the arc
// cannot lie on one tour path:
//   j == k                         self loop
//   s == r     and i != j          arc leaves stage r from another city
//   s == r - 1 and i != k          arc enters stage r at another city
//   s not in {r-1, r}, i in {j,k}  city i would repeat at two stages
// The printed implicit-zero rule carries an unconditional i == k clause,
// which would also remove the s == r-1 variables the flow-consistency rows
// tie to y; it is applied only off the adjacent stages here.
inline bool is_implicit_zero_x(int i, int r, int j, int s, int k, int m) {
    if (i < 1 || i > m || j < 1 || j > m || k < 1 || k > m)
        throw ValidationError("city index out of range 1.." + std::to_string(m));
    if (r < 1 || r > m) throw ValidationError("node stage out of range 1.." + std::to_string(m));
    if (s < 1 || s > m - 1) throw ValidationError("arc stage out of range 1.." + std::to_string(m - 1));
    if (j == k) return true;
    if (s == r) return i != j;
    if (s == r - 1) return i != k;
    return i == j || i == k;
}

// Bijection between surviving variables and dense columns. y-block first,
// ordered lexicographically by (i,r,j); then the x-block ordered by
// (i,r,j,s,k).
class VariableIndex {
public:
    explicit VariableIndex(int n) : n_(n), m_(n - 1) {
        if (n < 6)
            throw DomainError("the LP model requires more than five cities (n >= 6), got n = " +
                              std::to_string(n));
        const int m = m_;
        const int w = m + 1;
        y_lookup_.assign(static_cast<std::size_t>(w) * w * w, -1);
        x_lookup_.assign(static_cast<std::size_t>(w) * w * w * w * w, -1);

        int col = 0;
        for (int i = 1; i <= m; ++i)
            for (int r = 1; r <= m - 1; ++r)
                for (int j = 1; j <= m; ++j) {
                    if (i == j) continue;
                    y_lookup_[yslot(i, r, j)] = col++;
                    keys_.push_back(VarKey{false, {0, 0}, {i, r, j}});
                }
        y_count_ = col;
        for (int i = 1; i <= m; ++i)
            for (int r = 1; r <= m; ++r)
                for (int j = 1; j <= m; ++j)
                    for (int s = 1; s <= m - 1; ++s)
                        for (int k = 1; k <= m; ++k) {
                            if (is_implicit_zero_x(i, r, j, s, k, m)) continue;
                            x_lookup_[xslot(i, r, j, s, k)] = col++;
                            keys_.push_back(VarKey{true, {i, r}, {j, s, k}});
                        }
        x_count_ = col - y_count_;
    }

    int n() const noexcept { return n_; }
    int m() const noexcept { return m_; }
    int y_count() const noexcept { return y_count_; }
    int x_count() const noexcept { return x_count_; }
    int size() const noexcept { return y_count_ + x_count_; }

    // Column of y[i,r,j], or -1 if the arc does not exist or is out of range.
    int y_col(int i, int r, int j) const {
        if (i < 1 || i > m_ || j < 1 || j > m_ || r < 1 || r > m_ - 1) return -1;
        return y_lookup_[yslot(i, r, j)];
    }

    // Column of x[i,r][j,s,k], or -1 for implicit zeros and out-of-range
    // stages (callers drop such terms).
    int x_col(int i, int r, int j, int s, int k) const {
        if (i < 1 || i > m_ || j < 1 || j > m_ || k < 1 || k > m_) return -1;
        if (r < 1 || r > m_ || s < 1 || s > m_ - 1) return -1;
        return x_lookup_[xslot(i, r, j, s, k)];
    }

    const VarKey& key(int col) const {
        if (col < 0 || col >= size()) throw ValidationError("column " + std::to_string(col) + " out of range");
        return keys_[static_cast<std::size_t>(col)];
    }

    int encode(const VarKey& v) const {
        return v.is_x ? x_col(v.node.i, v.node.r, v.arc.i, v.arc.r, v.arc.j) : y_col(v.arc.i, v.arc.r, v.arc.j);
    }

    // y_i_r_j / x_i_r_j_s_k
    std::string name(int col) const {
        const VarKey& v = key(col);
        if (!v.is_x)
            return "y_" + std::to_string(v.arc.i) + "_" + std::to_string(v.arc.r) + "_" + std::to_string(v.arc.j);
        return "x_" + std::to_string(v.node.i) + "_" + std::to_string(v.node.r) + "_" + std::to_string(v.arc.i) +
               "_" + std::to_string(v.arc.r) + "_" + std::to_string(v.arc.j);
    }

    // Inverse of name(); nullopt for malformed or nonexistent variables.
    std::optional<int> column_of(std::string_view name) const {
        if (name.size() < 2 || name[1] != '_' || (name[0] != 'x' && name[0] != 'y')) return std::nullopt;
        const bool is_x = name[0] == 'x';
        const std::size_t want = is_x ? 5 : 3;
        int parts[5] = {0, 0, 0, 0, 0};
        std::size_t count = 0;
        std::string_view rest = name.substr(2);
        while (true) {
            if (count == want) return std::nullopt;
            std::size_t us = rest.find('_');
            std::string_view tok = rest.substr(0, us);
            if (tok.empty()) return std::nullopt;
            auto res = std::from_chars(tok.data(), tok.data() + tok.size(), parts[count]);
            if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) return std::nullopt;
            ++count;
            if (us == std::string_view::npos) break;
            rest.remove_prefix(us + 1);
        }
        if (count != want) return std::nullopt;
        int col = is_x ? x_col(parts[0], parts[1], parts[2], parts[3], parts[4]) : y_col(parts[0], parts[1], parts[2]);
        if (col < 0 || this->name(col) != name) return std::nullopt;
        return col;
    }

private:
    std::size_t yslot(int i, int r, int j) const {
        const std::size_t w = static_cast<std::size_t>(m_) + 1;
        return (static_cast<std::size_t>(i) * w + r) * w + j;
    }
    std::size_t xslot(int i, int r, int j, int s, int k) const {
        const std::size_t w = static_cast<std::size_t>(m_) + 1;
        return (((static_cast<std::size_t>(i) * w + r) * w + j) * w + s) * w + k;
    }

    int n_;
    int m_;
    int y_count_ = 0;
    int x_count_ = 0;
    std::vector<int> y_lookup_;
    std::vector<int> x_lookup_;
    std::vector<VarKey> keys_;
};

inline VariableIndex build_index(int n) { return VariableIndex(n); }

}  // namespace tsplp
