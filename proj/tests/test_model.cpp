#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <random>

#include <tsplp/model.hpp>

#include "support.hpp"

using namespace tsplp;

namespace {

using Tuple = std::pair<int, std::array<int, 4>>;

// Row tuples per family, enumerated from the index ranges alone.
std::vector<Tuple> expected_tuples(int n, const BuildOptions& opt) {
    const int m = n - 1;
    std::vector<Tuple> out;
    auto add = [&](Family f, int a = 0, int b = 0, int c = 0, int d = 0) {
        out.push_back({static_cast<int>(f), {a, b, c, d}});
    };
    add(Family::initial_flow);
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            if (i != j)
                for (int r = 1; r <= m - 2; ++r) add(Family::gke_adjacent_right, i, j, r);
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            if (i != j)
                for (int r = 3; r <= m; ++r) add(Family::gke_adjacent_left, i, j, r);
    for (int i = 1; i <= m; ++i)
        for (int r = 2; r <= m - 1; ++r) add(Family::gke_node, i, r);
    for (int i = 1; i <= m; ++i)
        for (int u = 1; u <= m; ++u)
            if (i != u)
                for (int r = 1; r <= m; ++r)
                    for (int p = 2; p <= m - 1; ++p)
                        if (p != r - 1 && p != r && p != r + 1) add(Family::gke_node_pair, i, u, r, p);
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            for (int k = 1; k <= m; ++k)
                if (i != j && j != k && i != k)
                    for (int r = 1; r <= m - 2; ++r) add(Family::reciprocity_2, i, j, k, r);
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            if (i != j)
                for (int r = 1; r <= m - 2; ++r)
                    for (int s = r + 3; s <= m; ++s) add(Family::reciprocity_far, i, j, r, s);
    for (auto f : {Family::flow_left, Family::flow_right})
        for (int i = 1; i <= m; ++i)
            for (int j = 1; j <= m; ++j)
                if (i != j)
                    for (int r = 1; r <= m - 1; ++r) add(f, i, j, r);
    if (opt.include_flow_consist_nonadjacent)
        for (int i = 1; i <= m; ++i)
            for (int j = 1; j <= m; ++j)
                if (i != j)
                    for (int r = 1; r <= m - 1; ++r)
                        for (int s = 1; s <= m; ++s)
                            if (s != r && s != r + 1) add(Family::flow_nonadjacent, i, j, r, s);
    if (opt.visit_family != VisitFamily::nodes_only)
        for (int i = 1; i <= m; ++i)
            for (int j = 1; j <= m; ++j)
                for (int u = 1; u <= m; ++u)
                    if (i != j && j != u && i != u)
                        for (int r = 1; r <= m - 1; ++r) add(Family::visit_arcs, i, j, u, r);
    if (opt.visit_family != VisitFamily::arcs_only) {
        for (int i = 2; i <= m; ++i)
            for (int u = 2; u <= m; ++u)
                if (i != u)
                    for (int r = 1; r <= m; ++r) add(Family::visit_nodes, i, u, r);
        for (int u = 3; u <= m; ++u)
            for (int r = 1; r <= m; ++r) add(Family::visit_node_one, u, r);
    }
    return out;
}

std::vector<Tuple> built_tuples(const LinearModel& lm) {
    std::vector<Tuple> out;
    for (const auto& t : lm.tags) out.push_back({static_cast<int>(t.family), t.idx});
    return out;
}

}  // namespace

TEST(Model, RowTuplesMatchRangeEnumeration) {
    for (int n = 6; n <= 12; ++n)
        for (auto vf : {VisitFamily::nodes_only, VisitFamily::arcs_only, VisitFamily::both}) {
            BuildOptions opt{vf};
            auto ix = std::make_shared<const VariableIndex>(n);
            auto lm = build_structure(ix, opt);
            auto want = expected_tuples(n, opt);
            auto got = built_tuples(lm);
            std::sort(want.begin(), want.end());
            auto sorted_got = got;
            std::sort(sorted_got.begin(), sorted_got.end());
            ASSERT_EQ(sorted_got, want) << "n=" << n << " visit=" << to_string(vf);
            // emission order is family-major
            EXPECT_TRUE(std::is_sorted(got.begin(), got.end(),
                                       [](const Tuple& a, const Tuple& b) { return a.first < b.first; }));
            EXPECT_EQ(count_rows(n, opt).total(), lm.row_count());
        }
}

TEST(Model, NonadjacentFlowRowsOptional) {
    BuildOptions opt;
    opt.include_flow_consist_nonadjacent = false;
    auto lm = build_model(fixtures::constant_instance(7, 1.0), opt);
    EXPECT_EQ(static_cast<std::size_t>(lm.row_count()), expected_tuples(7, opt).size());
    for (const auto& t : lm.tags) EXPECT_NE(t.family, Family::flow_nonadjacent);
}

TEST(Model, RowStructure) {
    auto lm = build_model(fixtures::random_integer_instance(7, 3));
    int ones = 0;
    for (int k = 0; k < lm.row_count(); ++k) {
        auto row = lm.row(k);
        EXPECT_GT(row.size, 0u) << lm.tags[k].label();
        for (std::size_t t = 1; t < row.size; ++t) ASSERT_LT(row.col(t - 1), row.col(t));
        for (std::size_t t = 0; t < row.size; ++t) {
            ASSERT_GE(row.col(t), 0);
            ASSERT_LT(row.col(t), lm.col_count());
        }
        if (lm.rhs[k] == 1.0) {
            ++ones;
            EXPECT_EQ(lm.tags[k].family, Family::initial_flow);
        } else {
            EXPECT_EQ(lm.rhs[k], 0.0);
        }
    }
    EXPECT_EQ(ones, 1);
    for (int c = lm.index->y_count(); c < lm.col_count(); ++c) ASSERT_EQ(lm.objective[c], 0.0);
}

TEST(Model, ObjectiveWithUnitCosts) {
    auto lm = build_model(fixtures::constant_instance(7, 1.0));
    const auto& ix = *lm.index;
    const int m = ix.m();
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) {
            if (i == j) continue;
            for (int r = 1; r <= m - 1; ++r)
                EXPECT_EQ(lm.objective[ix.y_col(i, r, j)], (r == 1 || r == m - 1) ? 2.0 : 1.0);
        }
}

TEST(Model, RowNames) {
    RowTag t{Family::gke_adjacent_right, {3, 5, 2, 0}};
    EXPECT_EQ(t.label(), "GKE2(i=3,j=5,r=2)");
    EXPECT_EQ(t.mps_name(), "g2_3_5_2");
    EXPECT_EQ((RowTag{Family::initial_flow, {}}).mps_name(), "f1");
    auto lm = build_model(fixtures::constant_instance(7, 1.0), {VisitFamily::both});
    std::set<std::string> names;
    for (const auto& tag : lm.tags) names.insert(tag.mps_name());
    EXPECT_EQ(names.size(), lm.tags.size());
}

TEST(Model, RejectsSmallN) { EXPECT_THROW(build_model(fixtures::constant_instance(5, 1.0)), DomainError); }

TEST(TourPoint, CountsAtSix) {
    VariableIndex ix(6);
    auto p = tour_to_point(ix, Tour{{1, 2, 3, 4, 5}});
    int ys = 0, xs = 0;
    for (int c = 0; c < ix.size(); ++c) {
        ASSERT_TRUE(p[c] == 0.0 || p[c] == 1.0);
        if (p[c] == 1.0) (c < ix.y_count() ? ys : xs)++;
    }
    EXPECT_EQ(ys, 4);
    EXPECT_EQ(xs, 20);
}

TEST(TourPoint, EveryTourAtSevenIsExactlyFeasible) {
    auto inst = fixtures::random_integer_instance(7, 21);
    for (auto vf : {VisitFamily::nodes_only, VisitFamily::arcs_only, VisitFamily::both}) {
        auto lm = build_model(inst, {vf});
        for (const auto& t : fixtures::all_tours(7)) {
            auto p = tour_to_point(*lm.index, t);
            auto res = row_residuals(lm, p);
            for (double r : res) ASSERT_EQ(r, 0.0) << to_string(t);
            ASSERT_TRUE(check_point(lm, p, 0.0).feasible);
            ASSERT_EQ(objective_value(lm, p), tour_cost(inst, t));
        }
    }
}

TEST(TourPoint, RejectsInvalidTour) {
    VariableIndex ix(6);
    EXPECT_THROW(tour_to_point(ix, Tour{{1, 2, 3, 4}}), ValidationError);
    EXPECT_THROW(tour_to_point(ix, Tour{{1, 1, 3, 4, 5}}), ValidationError);
}

TEST(Blend, IdentityAndIdempotence) {
    VariableIndex ix(7);
    auto p = tour_to_point(ix, Tour{{2, 1, 3, 5, 4, 6}});
    EXPECT_EQ(blend_points({{1.0, p}}), p);
    EXPECT_EQ(blend_points({{0.5, p}, {0.5, p}}), p);
}

TEST(Blend, RandomConvexCombinationsFeasible) {
    auto lm = build_model(fixtures::random_integer_instance(7, 5));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        int k = 2 + static_cast<int>(rng() % 4);
        std::vector<double> w(k);
        double s = 0;
        for (auto& x : w) s += (x = u(rng));
        std::vector<std::pair<double, Point>> parts;
        double acc = 0;
        for (int t = 0; t < k; ++t) {
            double wt = t + 1 < k ? w[t] / s : 1.0 - acc;
            acc += wt;
            parts.push_back({wt, tour_to_point(*lm.index, fixtures::random_tour(7, rng))});
        }
        auto rep = check_point(lm, blend_points(parts), 1e-12);
        ASSERT_TRUE(rep.feasible) << rep.max_abs_residual;
    }
}

TEST(Blend, Errors) {
    VariableIndex ix(6), ix7(7);
    auto p = tour_to_point(ix, Tour{{1, 2, 3, 4, 5}});
    EXPECT_THROW(blend_points({}), ValidationError);
    EXPECT_THROW(blend_points({{0.5, p}, {0.4, p}}), ValidationError);
    EXPECT_THROW(blend_points({{1.5, p}, {-0.5, p}}), ValidationError);
    EXPECT_THROW(blend_points({{0.5, p}, {0.5, tour_to_point(ix7, Tour{{1, 2, 3, 4, 5, 6}})}}), ValidationError);
}

TEST(CheckPoint, ZeroVectorMissesInitialFlow) {
    auto lm = build_model(fixtures::constant_instance(7, 1.0));
    Point zero{std::vector<double>(lm.col_count(), 0.0)};
    auto rep = check_point(lm, zero, 1e-9);
    EXPECT_FALSE(rep.feasible);
    ASSERT_EQ(rep.violations.size(), 1u);
    EXPECT_EQ(rep.violations[0].residual, -1.0);
    EXPECT_EQ(rep.violations[0].tag, "InitialFlow()");
}

TEST(CheckPoint, FlippedArcBreaksFlowConsistency) {
    auto lm = build_model(fixtures::constant_instance(7, 1.0));
    Tour t{{3, 1, 4, 6, 2, 5}};
    auto p = tour_to_point(*lm.index, t);
    p.values[lm.index->y_col(4, 3, 6)] = 0.0;
    auto rep = check_point(lm, p, 1e-9);
    EXPECT_FALSE(rep.feasible);
    bool flow8 = false;
    for (const auto& v : rep.violations) flow8 |= v.tag == "Flow8(i=4,j=6,r=3)";
    EXPECT_TRUE(flow8);
}

TEST(CheckPoint, NegativeComponent) {
    auto lm = build_model(fixtures::constant_instance(6, 1.0));
    auto p = tour_to_point(*lm.index, Tour{{1, 2, 3, 4, 5}});
    p.values[10] = -0.5;
    auto rep = check_point(lm, p, 1e-9);
    EXPECT_EQ(rep.min_component, -0.5);
    EXPECT_EQ(rep.min_component_col, 10);
    EXPECT_FALSE(rep.feasible);
    EXPECT_THROW(check_point(lm, Point{{1.0}}, 1e-9), ValidationError);
}
