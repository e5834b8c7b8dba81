#include <gtest/gtest.h>

#include <charconv>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <tsplp/lpio.hpp>

#include "support.hpp"

using namespace tsplp;

namespace {

// Minimal free-MPS reader, independent of the writer.
struct ParsedMps {
    std::string name;
    std::vector<std::string> rows;  // E rows in order
    std::vector<std::string> columns;
    std::map<std::pair<std::string, std::string>, double> coef;  // (row, column)
    std::map<std::string, double> cost;
    std::map<std::string, double> rhs;
    bool saw_bounds = false;
};

double to_num(const std::string& s) {
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::runtime_error("bad number " + s);
    return v;
}

ParsedMps read_mps(const std::string& text) {
    ParsedMps out;
    std::istringstream in(text);
    std::string line, section;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<std::string> f;
        for (std::string w; ls >> w;) f.push_back(w);
        if (f.empty()) continue;
        if (line[0] != ' ') {
            section = f[0];
            if (section == "NAME") out.name = f.at(1);
            if (section == "BOUNDS") out.saw_bounds = true;
            continue;
        }
        if (section == "ROWS") {
            if (f.at(0) == "E") out.rows.push_back(f.at(1));
            else if (f.at(0) != "N" || f.at(1) != "COST") throw std::runtime_error("unexpected row " + line);
        } else if (section == "COLUMNS") {
            if (out.columns.empty() || out.columns.back() != f.at(0)) out.columns.push_back(f.at(0));
            for (std::size_t t = 1; t + 1 < f.size(); t += 2) {
                double v = to_num(f[t + 1]);
                if (f[t] == "COST") out.cost[f[0]] = v;
                else if (!out.coef.emplace(std::make_pair(f[t], f[0]), v).second)
                    throw std::runtime_error("duplicate entry " + line);
            }
        } else if (section == "RHS") {
            out.rhs[f.at(1)] = to_num(f.at(2));
        }
    }
    return out;
}

std::string mps_text(const LinearModel& lm) {
    std::ostringstream os;
    write_mps(os, lm, "T");
    return os.str();
}

}  // namespace

TEST(Mps, ColumnNamesAreTheIndex) {
    auto lm = build_model(fixtures::random_integer_instance(6, 1));
    auto mps = read_mps(mps_text(lm));
    std::set<std::string> names(mps.columns.begin(), mps.columns.end());
    EXPECT_EQ(names.size(), static_cast<std::size_t>(lm.index->y_count() + lm.index->x_count()));
    EXPECT_EQ(mps.columns.size(), names.size());
    EXPECT_FALSE(mps.saw_bounds);
}

TEST(Mps, Deterministic) {
    auto inst = fixtures::random_integer_instance(7, 2);
    auto a = mps_text(build_model(inst));
    auto b = mps_text(build_model(inst));
    EXPECT_EQ(a, b);
    auto dir = std::filesystem::temp_directory_path() / "tsplp_lpio_det";
    std::filesystem::create_directories(dir);
    auto lm = build_model(inst);
    write_model(lm, ModelFormat::mps, (dir / "a.mps").string());
    write_model(lm, ModelFormat::mps, (dir / "b.mps").string());
    std::ifstream fa(dir / "a.mps"), fb(dir / "b.mps");
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(sa.str().rfind("NAME TSPLP_N7", 0), 0u);
    std::filesystem::remove_all(dir);
}

TEST(Mps, LosslessRoundTrip) {
    for (int n = 6; n <= 9; ++n) {
        GenConfig g;
        g.n = n;
        g.seed = 40 + n;
        g.symmetric = false;  // non-integer, asymmetric costs
        auto inst = generate_random(g);
        auto lm = build_model(inst, {VisitFamily::both});
        auto mps = read_mps(mps_text(lm));
        ASSERT_EQ(mps.rows.size(), static_cast<std::size_t>(lm.row_count()));
        std::size_t nnz = 0;
        for (int k = 0; k < lm.row_count(); ++k) {
            ASSERT_EQ(mps.rows[k], lm.tags[k].mps_name());
            auto row = lm.row(k);
            for (std::size_t t = 0; t < row.size; ++t) {
                auto it = mps.coef.find({mps.rows[k], lm.index->name(row.col(t))});
                ASSERT_NE(it, mps.coef.end());
                ASSERT_EQ(it->second, row.val(t));
                ++nnz;
            }
            double b = mps.rhs.count(mps.rows[k]) ? mps.rhs[mps.rows[k]] : 0.0;
            ASSERT_EQ(b, lm.rhs[k]);
        }
        EXPECT_EQ(nnz, mps.coef.size());
        for (int c = 0; c < lm.col_count(); ++c) {
            double v = mps.cost.count(lm.index->name(c)) ? mps.cost[lm.index->name(c)] : 0.0;
            ASSERT_EQ(v, lm.objective[c]);
        }
    }
}

TEST(LpText, Shape) {
    auto lm = build_model(fixtures::constant_instance(6, 2.0));
    std::ostringstream os;
    write_lp_text(os, lm);
    auto s = os.str();
    EXPECT_NE(s.find("Minimize"), std::string::npos);
    EXPECT_NE(s.find("Subject To"), std::string::npos);
    EXPECT_NE(s.find("f1: "), std::string::npos);
    EXPECT_NE(s.find(" = 1\n"), std::string::npos);
    std::size_t eqs = 0;
    for (std::size_t pos = 0; (pos = s.find(" = ", pos)) != std::string::npos; ++pos) ++eqs;
    EXPECT_EQ(eqs, static_cast<std::size_t>(lm.row_count()));
    EXPECT_EQ(s.substr(s.size() - 4), "End\n");
    for (std::istringstream in(s); std::getline(in, s);) EXPECT_LT(s.size(), 120u);
}

TEST(Solution, EmptyFileIsZero) {
    VariableIndex ix(6);
    std::istringstream in("");
    auto p = parse_solution(in, ix);
    EXPECT_EQ(p.values, std::vector<double>(ix.size(), 0.0));
}

TEST(Solution, TourRoundTrip) {
    VariableIndex ix(7);
    std::mt19937_64 rng(3);
    auto p = tour_to_point(ix, fixtures::random_tour(7, rng));
    std::stringstream ss;
    ss << "# tour point\n";
    write_solution(ss, p, ix);
    EXPECT_EQ(parse_solution(ss, ix), p);
}

TEST(Solution, FractionalRoundTrip) {
    VariableIndex ix(7);
    std::mt19937_64 rng(4);
    Point p{std::vector<double>(ix.size())};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : p.values) v = u(rng) < 0.3 ? u(rng) : 0.0;
    std::stringstream ss;
    write_solution(ss, p, ix);
    auto back = parse_solution(ss, ix);
    for (int c = 0; c < ix.size(); ++c) ASSERT_NEAR(back[c], p[c], 1e-12);
}

TEST(Solution, Errors) {
    VariableIndex ix(6);
    auto expect_line = [&](const std::string& text, std::size_t line) {
        std::istringstream in(text);
        try {
            parse_solution(in, ix);
            ADD_FAILURE() << "accepted: " << text;
        } catch (const ParseError& e) {
            EXPECT_EQ(e.line(), line) << text;
        }
    };
    expect_line("y_9_9_9 1\n", 1);
    expect_line("y_1_1_2 1\ny_1_1_3 abc\n", 2);
    expect_line("y_1_1_2 -0.5\n", 1);
    expect_line("y_1_1_2 1\n\ny_1_1_2 1\n", 3);
    expect_line("y_1_1_2\n", 1);
    expect_line("y_1_1_2 1 2\n", 1);
    std::istringstream tiny("y_1_1_2 -1e-12 # noise\n");
    EXPECT_NO_THROW(parse_solution(tiny, ix));
    EXPECT_THROW(read_solution("/nonexistent/sol.txt", ix), FileError);
}
