#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "instance.hpp"
#include "tspfg.hpp"

namespace tsplp {

enum class VisitFamily { nodes_only, arcs_only, both };

inline std::string to_string(VisitFamily v) {
    switch (v) {
        case VisitFamily::nodes_only: return "nodes";
        case VisitFamily::arcs_only: return "arcs";
        case VisitFamily::both: return "both";
    }
    return "?";
}

struct BuildOptions {
    VisitFamily visit_family = VisitFamily::nodes_only;
    bool include_flow_consist_nonadjacent = true;
};

// Constraint families in emission order.
enum class Family : std::uint8_t {
    initial_flow,       // sum x[i,1][j,2,k] = 1
    gke_adjacent_right, // x[i,r][i,r,j] = sum_k x[i,r][j,r+1,k]
    gke_adjacent_left,  // x[i,r][j,r-1,i] = sum_k x[i,r][k,r-2,j]
    gke_node,           // flow into [i,r] seen from [i,r] = flow out of it
    gke_node_pair,      // flow into [u,p] seen from [i,r] = flow out of it
    reciprocity_2,      // x[i,r][k,r+1,j] = x[j,r+2][i,r,k]
    reciprocity_far,    // same for stage separation >= 3
    flow_left,          // y[i,r,j] = x[i,r][i,r,j]
    flow_right,         // y[i,r,j] = x[j,r+1][i,r,j]
    flow_nonadjacent,   // y[i,r,j] = sum_k x[k,s][i,r,j]
    visit_arcs,         // y[i,r,j] = sum_s x[u,s][i,r,j]
    visit_nodes,        // [i,r] shares equal flow with every city u and city 1
    visit_node_one,     // [1,r] shares equal flow with every city u and city 2
};

inline constexpr std::size_t family_count = 13;

struct FamilyInfo {
    std::string_view label;   // diagnostic label
    std::string_view prefix;  // MPS row-name prefix
    std::string_view params;  // index letters, in tag order
};

inline const FamilyInfo& family_info(Family f) {
    static const std::array<FamilyInfo, family_count> table{{
        {"InitialFlow", "f1", ""},
        {"GKE2", "g2", "ijr"},
        {"GKE3", "g3", "ijr"},
        {"GKE4", "g4", "ir"},
        {"GKE5", "g5", "iurp"},
        {"Recip6", "p6", "ijkr"},
        {"Recip7", "p7", "ijrs"},
        {"Flow8", "c8", "ijr"},
        {"Flow9", "c9", "ijr"},
        {"Flow10", "c10", "ijrs"},
        {"VisitArcs11", "a11", "ijur"},
        {"VisitNodes12", "v12", "iur"},
        {"VisitNodes13", "v13", "ur"},
    }};
    return table[static_cast<std::size_t>(f)];
}

struct RowTag {
    Family family = Family::initial_flow;
    std::array<int, 4> idx{0, 0, 0, 0};

    // e.g. GKE2(i=3,j=5,r=2)
    std::string label() const {
        const auto& info = family_info(family);
        std::string s(info.label);
        s += '(';
        for (std::size_t p = 0; p < info.params.size(); ++p) {
            if (p) s += ',';
            s += info.params[p];
            s += '=';
            s += std::to_string(idx[p]);
        }
        return s + ')';
    }

    // e.g. g2_3_5_2
    std::string mps_name() const {
        const auto& info = family_info(family);
        std::string s(info.prefix);
        for (std::size_t p = 0; p < info.params.size(); ++p) s += "_" + std::to_string(idx[p]);
        return s;
    }
};

// Equality-constrained LP: min objective.x s.t. row_k . x = rhs_k, x >= 0.
// Rows are stored compressed (CSR) with strictly increasing columns.
class LinearModel {
public:
    std::shared_ptr<const VariableIndex> index;
    std::vector<std::int64_t> row_start{0};
    std::vector<int> cols;
    std::vector<double> vals;
    std::vector<double> rhs;
    std::vector<RowTag> tags;
    std::vector<double> objective;

    int row_count() const noexcept { return static_cast<int>(rhs.size()); }
    int col_count() const noexcept { return index ? index->size() : static_cast<int>(objective.size()); }
    std::int64_t nonzeros() const noexcept { return static_cast<std::int64_t>(cols.size()); }

    struct RowView {
        const int* col_begin;
        const double* val_begin;
        std::size_t size;
        int col(std::size_t t) const { return col_begin[t]; }
        double val(std::size_t t) const { return val_begin[t]; }
    };

    RowView row(int k) const {
        auto b = row_start[static_cast<std::size_t>(k)];
        auto e = row_start[static_cast<std::size_t>(k) + 1];
        return {cols.data() + b, vals.data() + b, static_cast<std::size_t>(e - b)};
    }

    // Appends a row; terms with negative column are dropped, duplicate
    // columns merged, zero coefficients removed.
    void add_row(std::vector<std::pair<int, double>>& terms, double b, RowTag tag) {
        std::erase_if(terms, [](const auto& t) { return t.first < 0; });
        std::sort(terms.begin(), terms.end());
        for (std::size_t t = 0; t < terms.size();) {
            int c = terms[t].first;
            double v = 0.0;
            for (; t < terms.size() && terms[t].first == c; ++t) v += terms[t].second;
            if (v != 0.0) {
                cols.push_back(c);
                vals.push_back(v);
            }
        }
        row_start.push_back(static_cast<std::int64_t>(cols.size()));
        rhs.push_back(b);
        tags.push_back(tag);
    }
};

struct RowCounts {
    std::array<std::int64_t, family_count> per_family{};
    std::int64_t total() const {
        std::int64_t t = 0;
        for (auto c : per_family) t += c;
        return t;
    }
};

// Number of rows build_model emits, per family, from closed forms.
inline RowCounts count_rows(int n, const BuildOptions& options = {}) {
    if (n < 6) throw DomainError("the LP model requires n >= 6");
    const std::int64_t m = n - 1;
    RowCounts rc;
    auto set = [&](Family f, std::int64_t v) { rc.per_family[static_cast<std::size_t>(f)] = v; };
    set(Family::initial_flow, 1);
    set(Family::gke_adjacent_right, m * (m - 1) * (m - 2));
    set(Family::gke_adjacent_left, m * (m - 1) * (m - 2));
    set(Family::gke_node, m * (m - 2));
    set(Family::gke_node_pair, m * (m - 1) * (m - 2) * (m - 3));
    set(Family::reciprocity_2, m * (m - 1) * (m - 2) * (m - 2));
    set(Family::reciprocity_far, m * (m - 1) * (m - 2) * (m - 3) / 2);
    set(Family::flow_left, m * (m - 1) * (m - 1));
    set(Family::flow_right, m * (m - 1) * (m - 1));
    set(Family::flow_nonadjacent,
        options.include_flow_consist_nonadjacent ? m * (m - 1) * (m - 1) * (m - 2) : 0);
    bool arcs = options.visit_family != VisitFamily::nodes_only;
    bool nodes = options.visit_family != VisitFamily::arcs_only;
    set(Family::visit_arcs, arcs ? m * (m - 1) * (m - 2) * (m - 1) : 0);
    set(Family::visit_nodes, nodes ? (m - 1) * (m - 2) * m : 0);
    set(Family::visit_node_one, nodes ? (m - 2) * m : 0);
    return rc;
}

namespace detail {

// Terms of "flow through node [i,r] that also visits city u":
// u before r-1 (leaving on arc [u,p,k]), u at r-1 (arc [u,r-1,i]),
// u at r+1 (arc [i,r,u]), u after r+1 (entering on arc [k,p,u]).
inline void visit_terms(const VariableIndex& ix, int i, int r, int u, double sign,
                        std::vector<std::pair<int, double>>& out) {
    const int m = ix.m();
    for (int p = 1; p <= r - 2; ++p)
        for (int k = 1; k <= m; ++k)
            if (k != i && k != u) out.emplace_back(ix.x_col(i, r, u, p, k), sign);
    out.emplace_back(ix.x_col(i, r, u, r - 1, i), sign);
    out.emplace_back(ix.x_col(i, r, i, r, u), sign);
    for (int p = r + 1; p <= m - 1; ++p)
        for (int k = 1; k <= m; ++k)
            if (k != i && k != u) out.emplace_back(ix.x_col(i, r, k, p, u), sign);
}

}  // namespace detail

inline std::vector<double> build_objective(const VariableIndex& ix, const TspInstance& inst) {
    if (inst.n() != ix.n()) throw ValidationError("instance size does not match variable index");
    const int m = ix.m();
    std::vector<double> obj(static_cast<std::size_t>(ix.size()), 0.0);
    for (int i = 1; i <= m; ++i)
        for (int r = 1; r <= m - 1; ++r)
            for (int j = 1; j <= m; ++j) {
                if (i == j) continue;
                double c = inst.cost(i, j);
                if (r == 1) c += inst.cost(0, i);
                if (r == m - 1) c += inst.cost(j, 0);
                obj[static_cast<std::size_t>(ix.y_col(i, r, j))] = c;
            }
    return obj;
}

// Emits the constraint rows family by family, each family in lexicographic
// order of its index tuple. Terms on implicit-zero variables or on stages
// outside 1..m are dropped.
inline LinearModel build_structure(std::shared_ptr<const VariableIndex> index, const BuildOptions& options = {}) {
    const VariableIndex& ix = *index;
    const int m = ix.m();
    LinearModel lm;
    lm.index = index;
    const RowCounts expected = count_rows(ix.n(), options);
    lm.rhs.reserve(static_cast<std::size_t>(expected.total()));
    lm.tags.reserve(static_cast<std::size_t>(expected.total()));
    lm.row_start.reserve(static_cast<std::size_t>(expected.total()) + 1);

    std::vector<std::pair<int, double>> t;
    auto emit = [&](Family f, std::array<int, 4> idx, double b = 0.0) {
        lm.add_row(t, b, RowTag{f, idx});
        t.clear();
    };
    auto X = [&](int i, int r, int j, int s, int k) { return ix.x_col(i, r, j, s, k); };
    auto Y = [&](int i, int r, int j) { return ix.y_col(i, r, j); };

    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            for (int k = 1; k <= m; ++k)
                if (j != i && k != i && k != j) t.emplace_back(X(i, 1, j, 2, k), 1.0);
    emit(Family::initial_flow, {}, 1.0);

    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) {
            if (i == j) continue;
            for (int r = 1; r <= m - 2; ++r) {
                t.emplace_back(X(i, r, i, r, j), 1.0);
                for (int k = 1; k <= m; ++k)
                    if (k != i && k != j) t.emplace_back(X(i, r, j, r + 1, k), -1.0);
                emit(Family::gke_adjacent_right, {i, j, r});
            }
        }

    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) {
            if (i == j) continue;
            for (int r = 3; r <= m; ++r) {
                t.emplace_back(X(i, r, j, r - 1, i), 1.0);
                for (int k = 1; k <= m; ++k)
                    if (k != i && k != j) t.emplace_back(X(i, r, k, r - 2, j), -1.0);
                emit(Family::gke_adjacent_left, {i, j, r});
            }
        }

    for (int i = 1; i <= m; ++i)
        for (int r = 2; r <= m - 1; ++r) {
            for (int k = 1; k <= m; ++k) {
                if (k == i) continue;
                t.emplace_back(X(i, r, k, r - 1, i), 1.0);
                t.emplace_back(X(i, r, i, r, k), -1.0);
            }
            emit(Family::gke_node, {i, r});
        }

    for (int i = 1; i <= m; ++i)
        for (int u = 1; u <= m; ++u) {
            if (u == i) continue;
            for (int r = 1; r <= m; ++r)
                for (int p = 2; p <= m - 1; ++p) {
                    if (p >= r - 1 && p <= r + 1) continue;
                    for (int k = 1; k <= m; ++k) {
                        if (k == i || k == u) continue;
                        t.emplace_back(X(i, r, k, p - 1, u), 1.0);
                        t.emplace_back(X(i, r, u, p, k), -1.0);
                    }
                    emit(Family::gke_node_pair, {i, u, r, p});
                }
        }

    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            for (int k = 1; k <= m; ++k) {
                if (i == j || j == k || i == k) continue;
                for (int r = 1; r <= m - 2; ++r) {
                    t.emplace_back(X(i, r, k, r + 1, j), 1.0);
                    t.emplace_back(X(j, r + 2, i, r, k), -1.0);
                    emit(Family::reciprocity_2, {i, j, k, r});
                }
            }

    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) {
            if (i == j) continue;
            for (int r = 1; r <= m - 2; ++r)
                for (int s = r + 3; s <= m; ++s) {
                    for (int k = 1; k <= m; ++k) {
                        if (k == i || k == j) continue;
                        t.emplace_back(X(i, r, k, s - 1, j), 1.0);
                        t.emplace_back(X(j, s, i, r, k), -1.0);
                    }
                    emit(Family::reciprocity_far, {i, j, r, s});
                }
        }

    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) {
            if (i == j) continue;
            for (int r = 1; r <= m - 1; ++r) {
                t.emplace_back(Y(i, r, j), 1.0);
                t.emplace_back(X(i, r, i, r, j), -1.0);
                emit(Family::flow_left, {i, j, r});
            }
        }

    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) {
            if (i == j) continue;
            for (int r = 1; r <= m - 1; ++r) {
                t.emplace_back(Y(i, r, j), 1.0);
                t.emplace_back(X(j, r + 1, i, r, j), -1.0);
                emit(Family::flow_right, {i, j, r});
            }
        }

    if (options.include_flow_consist_nonadjacent)
        for (int i = 1; i <= m; ++i)
            for (int j = 1; j <= m; ++j) {
                if (i == j) continue;
                for (int r = 1; r <= m - 1; ++r)
                    for (int s = 1; s <= m; ++s) {
                        if (s == r || s == r + 1) continue;
                        t.emplace_back(Y(i, r, j), 1.0);
                        for (int k = 1; k <= m; ++k)
                            if (k != i && k != j) t.emplace_back(X(k, s, i, r, j), -1.0);
                        emit(Family::flow_nonadjacent, {i, j, r, s});
                    }
            }

    if (options.visit_family != VisitFamily::nodes_only)
        for (int i = 1; i <= m; ++i)
            for (int j = 1; j <= m; ++j)
                for (int u = 1; u <= m; ++u) {
                    if (i == j || j == u || i == u) continue;
                    for (int r = 1; r <= m - 1; ++r) {
                        t.emplace_back(Y(i, r, j), 1.0);
                        for (int s = 1; s <= m; ++s)
                            if (s != r && s != r + 1) t.emplace_back(X(u, s, i, r, j), -1.0);
                        emit(Family::visit_arcs, {i, j, u, r});
                    }
                }

    if (options.visit_family != VisitFamily::arcs_only) {
        for (int i = 2; i <= m; ++i)
            for (int u = 2; u <= m; ++u) {
                if (i == u) continue;
                for (int r = 1; r <= m; ++r) {
                    detail::visit_terms(ix, i, r, u, 1.0, t);
                    detail::visit_terms(ix, i, r, 1, -1.0, t);
                    emit(Family::visit_nodes, {i, u, r});
                }
            }
        for (int u = 3; u <= m; ++u)
            for (int r = 1; r <= m; ++r) {
                detail::visit_terms(ix, 1, r, u, 1.0, t);
                detail::visit_terms(ix, 1, r, 2, -1.0, t);
                emit(Family::visit_node_one, {u, r});
            }
    }
    return lm;
}

inline LinearModel build_model(const TspInstance& inst, const BuildOptions& options = {}) {
    if (inst.n() < 6)
        throw DomainError("the LP model requires more than five cities (n >= 6), got n = " +
                          std::to_string(inst.n()));
    auto index = std::make_shared<const VariableIndex>(inst.n());
    LinearModel lm = build_structure(index, options);
    lm.objective = build_objective(*index, inst);
    return lm;
}

struct Point {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t c) const { return values[c]; }
    friend bool operator==(const Point&, const Point&) = default;
};

// 0/1 point of a tour: every arc on the tour path and every surviving
// (node, arc) pair along it is set to 1.
inline Point tour_to_point(const VariableIndex& ix, const Tour& tour) {
    validate_tour(ix.n(), tour);
    const int m = ix.m();
    const auto& c = tour.order;
    Point p{std::vector<double>(static_cast<std::size_t>(ix.size()), 0.0)};
    for (int s = 1; s <= m - 1; ++s) {
        int arc_from = c[s - 1];
        int arc_to = c[s];
        p.values[static_cast<std::size_t>(ix.y_col(arc_from, s, arc_to))] = 1.0;
        for (int r = 1; r <= m; ++r) {
            int col = ix.x_col(c[r - 1], r, arc_from, s, arc_to);
            if (col >= 0) p.values[static_cast<std::size_t>(col)] = 1.0;
        }
    }
    return p;
}

inline Point blend_points(const std::vector<std::pair<double, Point>>& weighted) {
    if (weighted.empty()) throw ValidationError("blend needs at least one point");
    double sum = 0.0;
    const std::size_t len = weighted.front().second.size();
    for (const auto& [w, p] : weighted) {
        if (!(w > 0.0)) throw ValidationError("blend weights must be positive");
        if (p.size() != len) throw ValidationError("blend points differ in length");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("blend weights sum to " + format_double(sum) + ", not 1");
    Point out{std::vector<double>(len, 0.0)};
    for (const auto& [w, p] : weighted)
        for (std::size_t c = 0; c < len; ++c) out.values[c] += w * p.values[c];
    return out;
}

inline double objective_value(const LinearModel& lm, const Point& p) {
    double v = 0.0;
    for (std::size_t c = 0; c < lm.objective.size(); ++c) v += lm.objective[c] * p.values[c];
    return v;
}

struct RowViolation {
    int row;
    double residual;
    std::string tag;
};

struct FeasibilityReport {
    double max_abs_residual = 0.0;
    std::vector<RowViolation> violations;
    double min_component = 0.0;
    int min_component_col = -1;
    bool feasible = false;
};

// Residual of each row is row.p - rhs.
inline std::vector<double> row_residuals(const LinearModel& lm, const Point& p) {
    std::vector<double> res(static_cast<std::size_t>(lm.row_count()));
    for (int k = 0; k < lm.row_count(); ++k) {
        auto row = lm.row(k);
        double acc = -lm.rhs[static_cast<std::size_t>(k)];
        for (std::size_t t = 0; t < row.size; ++t) acc += row.val(t) * p.values[static_cast<std::size_t>(row.col(t))];
        res[static_cast<std::size_t>(k)] = acc;
    }
    return res;
}

inline FeasibilityReport check_point(const LinearModel& lm, const Point& p, double tol) {
    if (p.size() != static_cast<std::size_t>(lm.col_count()))
        throw ValidationError("point length " + std::to_string(p.size()) + " does not match model width " +
                              std::to_string(lm.col_count()));
    FeasibilityReport rep;
    auto res = row_residuals(lm, p);
    for (int k = 0; k < lm.row_count(); ++k) {
        double r = res[static_cast<std::size_t>(k)];
        rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(r));
        if (std::abs(r) > tol) rep.violations.push_back({k, r, lm.tags[static_cast<std::size_t>(k)].label()});
    }
    rep.min_component = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < p.size(); ++c)
        if (p.values[c] < rep.min_component) {
            rep.min_component = p.values[c];
            rep.min_component_col = static_cast<int>(c);
        }
    if (p.size() == 0) rep.min_component = 0.0;
    rep.feasible = rep.violations.empty() && rep.min_component >= -tol;
    return rep;
}

}  // namespace tsplp
