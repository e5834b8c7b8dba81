#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <tsplp/oracle.hpp>

#include "support.hpp"

using namespace tsplp;

namespace {

// Second enumerator: recursive extension over unvisited cities, no
// std::next_permutation, no shared cost routine.
void naive(const TspInstance& inst, std::vector<int>& path, std::vector<bool>& used, double& best) {
    const int n = inst.n();
    if (static_cast<int>(path.size()) == n - 1) {
        double c = inst.cost(0, path.front());
        for (std::size_t k = 1; k < path.size(); ++k) c += inst.cost(path[k - 1], path[k]);
        c += inst.cost(path.back(), 0);
        best = std::min(best, c);
        return;
    }
    for (int v = 1; v < n; ++v) {
        if (used[v]) continue;
        used[v] = true;
        path.push_back(v);
        naive(inst, path, used, best);
        path.pop_back();
        used[v] = false;
    }
}

double naive_opt(const TspInstance& inst) {
    std::vector<int> path;
    std::vector<bool> used(inst.n(), false);
    double best = std::numeric_limits<double>::infinity();
    naive(inst, path, used, best);
    return best;
}

TspInstance random_instance(int n, std::uint64_t seed, bool integer, bool symmetric) {
    GenConfig g;
    g.n = n;
    g.seed = seed;
    g.integer = integer;
    g.symmetric = symmetric;
    g.cost_model = seed % 2 ? CostModel::uniform : CostModel::euclidean_pct;
    return generate_random(g);
}

}  // namespace

TEST(BruteForce, AllOnesTie) {
    auto r = brute_force_opt(fixtures::constant_instance(6, 1.0));
    EXPECT_EQ(r.cost, 6.0);
    EXPECT_EQ(r.tour, (Tour{{1, 2, 3, 4, 5}}));
}

TEST(BruteForce, DistanceMatrixMatchesNaive) {
    std::vector<double> c(25);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) c[i * 5 + j] = std::abs(i - j);
    TspInstance inst(5, c);
    auto r = brute_force_opt(inst);
    EXPECT_EQ(r.cost, naive_opt(inst));
    EXPECT_EQ(r.cost, 8.0);
    EXPECT_EQ(tour_cost(inst, r.tour), r.cost);
}

TEST(BruteForce, RandomMatchesNaive) {
    for (std::uint64_t s = 0; s < 30; ++s) {
        auto inst = random_instance(3 + static_cast<int>(s % 6), s, s % 3 == 0, s % 4 != 0);
        EXPECT_EQ(brute_force_opt(inst).cost, naive_opt(inst)) << s;
    }
}

TEST(BruteForce, SymmetricTranspose) {
    auto inst = fixtures::random_integer_instance(8, 3);
    EXPECT_EQ(brute_force_opt(inst).cost, brute_force_opt(inst.transposed()).cost);
}

TEST(BruteForce, RefusesLargeN) { EXPECT_THROW(brute_force_opt(fixtures::constant_instance(11, 1.0)), ValidationError); }

TEST(HeldKarp, AgreesWithBruteForce) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        int n = 3 + static_cast<int>(s % 7);
        auto inst = random_instance(n, 1000 + s, s % 2 == 0, s % 3 != 0);
        auto bf = brute_force_opt(inst);
        auto hk = held_karp_opt(inst);
        ASSERT_EQ(hk.cost, bf.cost) << "seed " << s;
        validate_tour(n, hk.tour);
        ASSERT_EQ(tour_cost(inst, hk.tour), hk.cost);
        ASSERT_EQ(tour_cost(inst, bf.tour), bf.cost);
    }
}

TEST(HeldKarp, ConstantEight) { EXPECT_EQ(held_karp_opt(fixtures::constant_instance(8, 5.0)).cost, 40.0); }

TEST(HeldKarp, AsymmetricTranspose) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto inst = random_instance(9, s, false, false);
        // reversed summation order: equal up to rounding
        double a = held_karp_opt(inst).cost, b = held_karp_opt(inst.transposed()).cost;
        EXPECT_NEAR(a, b, 1e-12 * a);
    }
}

TEST(HeldKarp, LargerInstanceBeatsRandomTours) {
    auto inst = random_instance(14, 5, false, false);
    auto hk = held_karp_opt(inst);
    EXPECT_EQ(tour_cost(inst, hk.tour), hk.cost);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 1000; ++k) EXPECT_LE(hk.cost, tour_cost(inst, fixtures::random_tour(14, rng)));
}

TEST(HeldKarp, RefusesLargeN) { EXPECT_THROW(held_karp_opt(fixtures::constant_instance(18, 1.0)), ValidationError); }

TEST(Mtz, ColumnCountsAndDeterminism) {
    auto inst = fixtures::random_integer_instance(6, 8);
    std::ostringstream a, b;
    write_mtz(a, inst);
    write_mtz(b, inst);
    EXPECT_EQ(a.str(), b.str());

    std::istringstream in(a.str());
    std::string line, section;
    std::set<std::string> binaries, orders;
    bool in_int = false;
    int bv = 0, mtz_rows = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<std::string> f;
        for (std::string w; ls >> w;) f.push_back(w);
        if (line[0] != ' ') {
            section = f[0];
            continue;
        }
        if (section == "ROWS" && f[1].rfind("mtz_", 0) == 0) {
            EXPECT_EQ(f[0], "L");
            ++mtz_rows;
        }
        if (section == "COLUMNS") {
            if (f.size() >= 3 && f[1] == "'MARKER'") {
                in_int = f[2] == "'INTORG'";
                continue;
            }
            (in_int ? binaries : orders).insert(f[0]);
        }
        if (section == "BOUNDS" && f[0] == "BV") ++bv;
    }
    EXPECT_EQ(binaries.size(), 30u);
    EXPECT_EQ(orders.size(), 5u);
    EXPECT_EQ(bv, 30);
    EXPECT_EQ(mtz_rows, 20);
    EXPECT_TRUE(binaries.count("xm_0_5"));
    EXPECT_TRUE(orders.count("u_5"));
}

TEST(Mtz, FileErrors) {
    auto inst = fixtures::constant_instance(6, 1.0);
    EXPECT_THROW(write_mtz(inst, "/nonexistent/dir/m.mps"), FileError);
    auto path = std::filesystem::temp_directory_path() / "tsplp_mtz.mps";
    write_mtz(inst, path.string());
    EXPECT_TRUE(std::filesystem::file_size(path) > 0);
    std::filesystem::remove(path);
}
