#pragma once

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "instance.hpp"
#include "model.hpp"

namespace tsplp {

enum class ModelFormat { mps, lp_text };

namespace detail {

struct ColumnMajor {
    std::vector<std::int64_t> start;
    std::vector<int> rows;
    std::vector<double> vals;
};

inline ColumnMajor transpose(const LinearModel& lm) {
    const int ncol = lm.col_count();
    ColumnMajor cm;
    cm.start.assign(static_cast<std::size_t>(ncol) + 1, 0);
    for (int c : lm.cols) ++cm.start[static_cast<std::size_t>(c) + 1];
    for (int c = 0; c < ncol; ++c) cm.start[c + 1] += cm.start[c];
    cm.rows.resize(lm.cols.size());
    cm.vals.resize(lm.cols.size());
    std::vector<std::int64_t> fill(cm.start.begin(), cm.start.end() - 1);
    for (int k = 0; k < lm.row_count(); ++k) {
        auto row = lm.row(k);
        for (std::size_t t = 0; t < row.size; ++t) {
            auto pos = static_cast<std::size_t>(fill[static_cast<std::size_t>(row.col(t))]++);
            cm.rows[pos] = k;
            cm.vals[pos] = row.val(t);
        }
    }
    return cm;
}

inline std::string column_name(const LinearModel& lm, int c) {
    return lm.index ? lm.index->name(c) : "c" + std::to_string(c);
}

}  // namespace detail

// Free MPS. Every column is listed (a column with no nonzero anywhere gets an
// explicit zero COST entry); no BOUNDS section, so all columns keep the
// default [0, +inf) bounds.
inline void write_mps(std::ostream& out, const LinearModel& lm, std::string_view name = "TSPLP") {
    std::vector<std::string> row_names(static_cast<std::size_t>(lm.row_count()));
    for (int k = 0; k < lm.row_count(); ++k) row_names[k] = lm.tags[k].mps_name();

    out << "NAME " << name << '\n';
    out << "ROWS\n N COST\n";
    for (const auto& rn : row_names) out << " E " << rn << '\n';
    out << "COLUMNS\n";
    auto cm = detail::transpose(lm);
    for (int c = 0; c < lm.col_count(); ++c) {
        const std::string cn = detail::column_name(lm, c);
        double obj = c < static_cast<int>(lm.objective.size()) ? lm.objective[c] : 0.0;
        const auto b = cm.start[c], e = cm.start[c + 1];
        if (obj != 0.0 || b == e) out << ' ' << cn << " COST " << format_double(obj) << '\n';
        for (auto t = b; t < e; ++t)
            out << ' ' << cn << ' ' << row_names[cm.rows[t]] << ' ' << format_double(cm.vals[t]) << '\n';
    }
    out << "RHS\n";
    for (int k = 0; k < lm.row_count(); ++k)
        if (lm.rhs[k] != 0.0) out << " RHS " << row_names[k] << ' ' << format_double(lm.rhs[k]) << '\n';
    out << "ENDATA\n";
}

// CPLEX-style LP text: objective, one named equality per row, wrapped lines.
inline void write_lp_text(std::ostream& out, const LinearModel& lm) {
    auto term = [&](double v, int c, bool first) {
        std::string s;
        if (v < 0) s = first ? "- " : " - ";
        else if (!first) s = " + ";
        double a = std::abs(v);
        if (a != 1.0) s += format_double(a) + " ";
        return s + detail::column_name(lm, c);
    };
    auto flush_line = [&](std::string& line) {
        if (line.size() > 72) {
            out << line << '\n';
            line = "   ";
        }
    };

    out << "\\ TSP flow-graph LP, " << lm.row_count() << " rows, " << lm.col_count() << " columns\n";
    out << "Minimize\n";
    std::string line = " COST:";
    bool first = true;
    for (int c = 0; c < static_cast<int>(lm.objective.size()); ++c) {
        if (lm.objective[c] == 0.0) continue;
        line += (first ? " " : "") + term(lm.objective[c], c, first);
        first = false;
        flush_line(line);
    }
    if (first) line += " 0 " + detail::column_name(lm, 0);
    out << line << '\n';
    out << "Subject To\n";
    for (int k = 0; k < lm.row_count(); ++k) {
        auto row = lm.row(k);
        line = " " + lm.tags[k].mps_name() + ":";
        for (std::size_t t = 0; t < row.size; ++t) {
            line += (t == 0 ? " " : "") + term(row.val(t), row.col(t), t == 0);
            flush_line(line);
        }
        if (row.size == 0) line += " 0 " + detail::column_name(lm, 0);
        line += " = " + format_double(lm.rhs[k]);
        out << line << '\n';
    }
    out << "End\n";
}

inline void write_model(const LinearModel& lm, ModelFormat format, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write " + path);
    if (format == ModelFormat::mps) {
        write_mps(out, lm, lm.index ? "TSPLP_N" + std::to_string(lm.index->n()) : "TSPLP");
    } else {
        write_lp_text(out, lm);
    }
    out.flush();
    if (!out) throw FileError("write failed for " + path);
}

// Solution files hold one "name value" pair per line; '#' starts a comment.
inline Point parse_solution(std::istream& in, const VariableIndex& ix) {
    Point p{std::vector<double>(static_cast<std::size_t>(ix.size()), 0.0)};
    std::vector<char> seen(static_cast<std::size_t>(ix.size()), 0);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string name, value, extra;
        if (!(ls >> name)) continue;
        if (!(ls >> value)) throw ParseError("missing value for '" + name + "'", lineno);
        if (ls >> extra) throw ParseError("trailing text '" + extra + "'", lineno);
        auto col = ix.column_of(name);
        if (!col) throw ParseError("unknown variable '" + name + "'", lineno);
        double v = 0.0;
        if (!detail::parse_double(value, v) || !std::isfinite(v))
            throw ParseError("malformed number '" + value + "'", lineno);
        if (v < -1e-9) throw ParseError("negative value " + value + " for '" + name + "'", lineno);
        if (seen[*col]) throw ParseError("duplicate variable '" + name + "'", lineno);
        seen[*col] = 1;
        p.values[static_cast<std::size_t>(*col)] = v;
    }
    return p;
}

inline Point read_solution(const std::string& path, const VariableIndex& ix) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open " + path);
    return parse_solution(in, ix);
}

// Writes the nonzero entries of `p` (|v| > drop_below) in column order.
inline void write_solution(std::ostream& out, const Point& p, const VariableIndex& ix, double drop_below = 0.0) {
    for (int c = 0; c < ix.size(); ++c) {
        double v = p.values[static_cast<std::size_t>(c)];
        if (std::abs(v) > drop_below) out << ix.name(c) << ' ' << format_double(v) << '\n';
    }
}

inline void save_solution(const Point& p, const VariableIndex& ix, const std::string& path, double drop_below = 0.0) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write " + path);
    write_solution(out, p, ix, drop_below);
    if (!out) throw FileError("write failed for " + path);
}

}  // namespace tsplp
