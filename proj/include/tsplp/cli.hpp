#pragma once

#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <json.hpp>

#include "error.hpp"
#include "extract.hpp"
#include "instance.hpp"
#include "lpio.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "solver.hpp"
#include "tspfg.hpp"

// Experiment driver: gen, build, solve, verify, decompose, bench, count.
namespace tsplp::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 2;
inline constexpr int mismatch = 3;
inline constexpr int solver_failure = 4;
inline constexpr int io = 5;
}  // namespace exit_code

class UsageError : public Error {
public:
    using Error::Error;
};

// Thrown by parse_args for --help; carries the help text.
struct HelpRequested {
    std::string text;
};

enum class Sub { gen, build, solve, verify, decompose, bench, count };

struct Command {
    Sub sub = Sub::count;
    GenConfig gen;  // gen, verify, bench
    int reps = 1;
    int cities_lo = 7, cities_hi = 7;
    std::string out;
    std::string instance;
    std::string solution;
    std::string external_solution;
    std::string report;
    std::string forensics = "tsplp_forensics";
    ModelFormat format = ModelFormat::mps;
    VisitFamily visit = VisitFamily::nodes_only;
    ExtractMode mode = ExtractMode::greedy;
    bool count_only = false;
    int jobs = 1;
};

// "A..B" or a single "N".
inline std::pair<int, int> parse_range(const std::string& s) {
    auto bad = [&] { return UsageError("bad city range '" + s + "' (expected N or A..B)"); };
    auto to_int = [&](std::string_view t) {
        int v = 0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size()) throw bad();
        return v;
    };
    auto dots = s.find("..");
    if (dots == std::string::npos) {
        int v = to_int(s);
        return {v, v};
    }
    int a = to_int(std::string_view(s).substr(0, dots));
    int b = to_int(std::string_view(s).substr(dots + 2));
    if (a > b) throw bad();
    return {a, b};
}

inline Command parse_args(const std::vector<std::string>& args) {
    CLI::App app{"tsplp: flow-graph LP for the TSP, with exact oracles"};
    app.require_subcommand(1, 1);
    Command cmd;
    app.add_option("--jobs", cmd.jobs, "concurrent replications (TSPLP_JOBS overrides)")->check(CLI::PositiveNumber);

    const std::map<std::string, CostModel> cost_models{{"euclid", CostModel::euclidean_pct},
                                                       {"uniform", CostModel::uniform}};
    const std::map<std::string, VisitFamily> visits{
        {"nodes", VisitFamily::nodes_only}, {"arcs", VisitFamily::arcs_only}, {"both", VisitFamily::both}};
    const std::map<std::string, ModelFormat> formats{{"mps", ModelFormat::mps}, {"lp", ModelFormat::lp_text}};
    const std::map<std::string, ExtractMode> modes{{"greedy", ExtractMode::greedy},
                                                   {"enum", ExtractMode::enumerative}};

    std::string cities;
    bool asymmetric = false;
    auto gen_flags = [&](CLI::App* s) {
        s->add_option("--cost-model", cmd.gen.cost_model, "euclid|uniform")
            ->transform(CLI::CheckedTransformer(cost_models, CLI::ignore_case));
        s->add_option("--pct-low", cmd.gen.pct_low, "lower perturbation factor (euclid)");
        s->add_option("--pct-high", cmd.gen.pct_high, "upper perturbation factor (euclid)");
        s->add_option("--low", cmd.gen.low, "lower cost bound (uniform)");
        s->add_option("--high", cmd.gen.high, "upper cost bound (uniform)");
        s->add_flag("--asymmetric", asymmetric, "draw c(i,j) and c(j,i) independently");
        s->add_flag("--integer", cmd.gen.integer, "round costs to integers");
        s->add_flag("--triangle", cmd.gen.triangle, "repair costs to satisfy the triangle inequality");
    };
    auto visit_flag = [&](CLI::App* s) {
        s->add_option("--visit", cmd.visit, "nodes|arcs|both")->transform(CLI::CheckedTransformer(visits, CLI::ignore_case));
    };

    auto* gen = app.add_subcommand("gen", "generate random instances");
    gen->add_option("--cities", cmd.gen.n, "city count")->required();
    gen->add_option("--reps", cmd.reps, "instances to generate")->check(CLI::PositiveNumber);
    gen->add_option("--seed", cmd.gen.seed, "base seed; replication k uses seed+k");
    gen->add_option("--out", cmd.out, "output directory")->required();
    gen_flags(gen);

    auto* build = app.add_subcommand("build", "write the LP model");
    build->add_option("--instance", cmd.instance, "instance CSV")->required();
    build->add_option("--format", cmd.format, "mps|lp")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    visit_flag(build);
    build->add_option("--out", cmd.out, "model file")->required();

    auto* solve = app.add_subcommand("solve", "solve the LP and extract tours");
    solve->add_option("--instance", cmd.instance, "instance CSV")->required();
    visit_flag(solve);
    solve->add_option("--report", cmd.report, "report CSV (JSON sidecar next to it)");
    solve->add_option("--external-solution", cmd.external_solution, "use this solution file instead of solving");

    auto* verify = app.add_subcommand("verify", "solve and compare with the Held-Karp optimum");
    auto* vi = verify->add_option("--instance", cmd.instance, "instance CSV");
    auto* vc = verify->add_option("--cities", cmd.gen.n, "city count for generated instances");
    vi->excludes(vc);
    verify->add_option("--reps", cmd.reps, "generated instances")->check(CLI::PositiveNumber);
    verify->add_option("--seed", cmd.gen.seed, "base seed; replication k uses seed+k");
    verify->add_option("--report", cmd.report, "report CSV (JSON sidecar next to it)");
    verify->add_option("--forensics", cmd.forensics, "directory for mismatch bundles");
    visit_flag(verify);
    gen_flags(verify);

    auto* decompose = app.add_subcommand("decompose", "split a solution into weighted tours");
    decompose->add_option("--instance", cmd.instance, "instance CSV")->required();
    decompose->add_option("--solution", cmd.solution, "solution file")->required();
    decompose->add_option("--mode", cmd.mode, "greedy|enum")->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));

    auto* bench = app.add_subcommand("bench", "sweep city counts");
    bench->add_option("--cities", cities, "A..B")->required();
    bench->add_option("--reps", cmd.reps, "instances per city count")->check(CLI::PositiveNumber);
    bench->add_option("--seed", cmd.gen.seed, "base seed");
    bench->add_flag("--count-only", cmd.count_only, "sizes only, no solving");
    bench->add_option("--report", cmd.report, "report CSV (JSON sidecar next to it)");
    visit_flag(bench);
    gen_flags(bench);

    auto* count = app.add_subcommand("count", "model sizes and cubic fit");
    count->add_option("--cities", cities, "A..B")->required();
    visit_flag(count);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    cmd.gen.symmetric = !asymmetric;
    if (*gen) cmd.sub = Sub::gen;
    else if (*build) cmd.sub = Sub::build;
    else if (*solve) cmd.sub = Sub::solve;
    else if (*verify) {
        cmd.sub = Sub::verify;
        if (vi->count() == 0 && vc->count() == 0) throw UsageError("verify needs --instance or --cities");
    } else if (*decompose) cmd.sub = Sub::decompose;
    else if (*bench) cmd.sub = Sub::bench;
    else cmd.sub = Sub::count;

    if (cmd.sub == Sub::bench || cmd.sub == Sub::count) {
        std::tie(cmd.cities_lo, cmd.cities_hi) = parse_range(cities);
        if (cmd.cities_lo < 6) throw UsageError("the flow-graph model needs at least 6 cities");
    }
    if (cmd.sub == Sub::gen || (cmd.sub == Sub::verify && cmd.instance.empty())) {
        try {
            cmd.gen.validate();
        } catch (const ConfigError& e) {
            throw UsageError(e.what());
        }
    }
    if (const char* env = std::getenv("TSPLP_JOBS")) {
        int j = std::atoi(env);
        if (j < 1) throw UsageError(std::string("TSPLP_JOBS must be a positive integer, got '") + env + "'");
        cmd.jobs = j;
    }
    return cmd;
}

inline Command parse_args(int argc, const char* const* argv) {
    return parse_args(std::vector<std::string>(argv + 1, argv + argc));
}

// ---------------------------------------------------------------- reports

struct ReportRow {
    std::string id;
    int n = 0;
    std::int64_t y_count = 0, x_count = 0, row_count = 0;
    std::string status;
    std::optional<double> lp_objective;
    std::optional<double> oracle_objective;
    std::optional<bool> match;
    std::string mode;
    int parts = 0;
    std::optional<double> residual;
    double t_build = 0, t_solve = 0, t_extract = 0, t_oracle = 0;
    std::string note;
};

inline bool objectives_match(double lp, double oracle) {
    return std::abs(lp - oracle) <= 1e-6 * std::max(1.0, std::abs(oracle));
}

inline const char* report_header() {
    return "id,n,y_count,x_count,row_count,status,lp_objective,oracle_objective,match,mode,parts,residual,"
           "t_build,t_solve,t_extract,t_oracle";
}

inline std::string csv_line(const ReportRow& r) {
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    std::ostringstream os;
    os << r.id << ',' << r.n << ',' << r.y_count << ',' << r.x_count << ',' << r.row_count << ',' << r.status << ','
       << opt(r.lp_objective) << ',' << opt(r.oracle_objective) << ','
       << (r.match ? (*r.match ? "yes" : "no") : "") << ',' << r.mode << ',' << r.parts << ',' << opt(r.residual)
       << std::fixed << std::setprecision(3) << ',' << r.t_build << ',' << r.t_solve << ',' << r.t_extract << ','
       << r.t_oracle;
    return os.str();
}

inline nlohmann::json to_json(const ReportRow& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["n"] = r.n;
    j["y_count"] = r.y_count;
    j["x_count"] = r.x_count;
    j["row_count"] = r.row_count;
    j["status"] = r.status;
    j["lp_objective"] = r.lp_objective ? nlohmann::json(*r.lp_objective) : nlohmann::json();
    j["oracle_objective"] = r.oracle_objective ? nlohmann::json(*r.oracle_objective) : nlohmann::json();
    j["match"] = r.match ? nlohmann::json(*r.match) : nlohmann::json();
    j["mode"] = r.mode;
    j["parts"] = r.parts;
    j["residual"] = r.residual ? nlohmann::json(*r.residual) : nlohmann::json();
    j["seconds"] = {{"build", r.t_build}, {"solve", r.t_solve}, {"extract", r.t_extract}, {"oracle", r.t_oracle}};
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

// CSV at `path`, JSON sidecar at the same path with extension ".json".
inline void write_report(const std::vector<ReportRow>& rows, const std::string& path, const nlohmann::json& meta) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw FileError("cannot write " + path);
        out << report_header() << '\n';
        for (const auto& r : rows) out << csv_line(r) << '\n';
        if (!out) throw FileError("write failed for " + path);
    }
    std::filesystem::path side(path);
    side.replace_extension(".json");
    nlohmann::json j = meta;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) j["rows"].push_back(to_json(r));
    std::ofstream out(side, std::ios::binary);
    if (!out) throw FileError("cannot write " + side.string());
    out << j.dump(2) << '\n';
    if (!out) throw FileError("write failed for " + side.string());
}

// ---------------------------------------------------------------- pipeline

struct PipelineOptions {
    BuildOptions build;
    SolverSettings solver;
    bool run_oracle = false;
    std::string forensics_dir;  // mismatch bundles; empty disables
    std::string external_solution;
};

struct PipelineResult {
    ReportRow row;
    std::optional<Solution> solution;
    std::optional<Decomposition> decomposition;
    std::optional<OracleResult> oracle;
    bool solver_failed = false;
    std::string failed_phase;
    std::string bundle;  // forensics directory written on mismatch
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void write_bundle(const std::string& dir, const TspInstance& inst, const LinearModel& lm, const Point& p,
                         const PipelineResult& res) {
    std::filesystem::create_directories(dir);
    save_csv(inst, dir + "/instance.csv");
    save_solution(p, *lm.index, dir + "/solution.txt");
    write_model(lm, ModelFormat::mps, dir + "/model.mps");
    std::ofstream out(dir + "/audit.txt", std::ios::binary);
    if (!out) throw FileError("cannot write " + dir + "/audit.txt");
    auto audit = check_point(lm, p, 1e-7);
    out << "lp_objective " << format_double(objective_value(lm, p)) << '\n';
    if (res.oracle) {
        out << "oracle_objective " << format_double(res.oracle->cost) << '\n';
        out << "oracle_tour " << to_string(res.oracle->tour) << '\n';
        auto tp = tour_to_point(*lm.index, res.oracle->tour);
        out << "oracle_tour_point_feasible " << (check_point(lm, tp, 1e-9).feasible ? "yes" : "no") << '\n';
    }
    out << "max_abs_residual " << format_double(audit.max_abs_residual) << '\n';
    out << "min_component " << format_double(audit.min_component) << '\n';
    out << "feasible " << (audit.feasible ? "yes" : "no") << '\n';
    for (const auto& v : audit.violations)
        out << "violation " << v.tag << ' ' << format_double(v.residual) << '\n';
    if (res.decomposition) {
        out << "decomposition_residual " << format_double(res.decomposition->residual_norm) << '\n';
        for (const auto& part : res.decomposition->parts)
            out << "part " << format_double(part.weight) << ' ' << to_string(part.tour) << ' '
                << format_double(tour_cost(inst, part.tour)) << '\n';
    }
    if (!out) throw FileError("write failed for " + dir + "/audit.txt");
}

}  // namespace detail

// build -> solve (or read) -> audit -> extract -> oracle for one instance.
inline PipelineResult run_pipeline(const TspInstance& inst, const std::string& id, const PipelineOptions& opt) {
    using clock = std::chrono::steady_clock;
    PipelineResult res;
    ReportRow& row = res.row;
    row.id = id;
    row.n = inst.n();

    auto t0 = clock::now();
    LinearModel lm = build_model(inst, opt.build);
    row.t_build = detail::seconds_since(t0);
    row.y_count = lm.index->y_count();
    row.x_count = lm.index->x_count();
    row.row_count = lm.row_count();

    Point point;
    t0 = clock::now();
    if (!opt.external_solution.empty()) {
        point = read_solution(opt.external_solution, *lm.index);
        row.status = "external";
    } else {
        Solution sol = solve(lm, opt.solver);
        row.status = std::string(to_string(sol.status));
        if (sol.status != SolveStatus::optimal) {
            row.note = sol.note;
            res.solver_failed = true;
            res.failed_phase = "solve";
            row.t_solve = detail::seconds_since(t0);
            res.solution = std::move(sol);
            return res;
        }
        point = sol.point;
        res.solution = std::move(sol);
    }
    row.t_solve = detail::seconds_since(t0);

    auto audit = check_point(lm, point, opt.solver.feas_tol);
    if (!audit.feasible) {
        row.status = "audit_failed";
        row.note = "max residual " + format_double(audit.max_abs_residual) + ", min component " +
                   format_double(audit.min_component);
        res.solver_failed = true;
        res.failed_phase = "audit";
        return res;
    }
    row.lp_objective = objective_value(lm, point);

    t0 = clock::now();
    try {
        EliminationOptions eo;
        eo.mode = ExtractMode::greedy;
        auto dec = iterative_elimination(*lm.index, point.values, eo);
        if (!dec.exhausted) {
            eo.mode = ExtractMode::enumerative;
            dec = iterative_elimination(*lm.index, point.values, eo);
        }
        row.mode = std::string(to_string(eo.mode));
        row.parts = static_cast<int>(dec.parts.size());
        row.residual = dec.residual_norm;
        res.decomposition = std::move(dec);
    } catch (const ValidationError& e) {
        row.mode = "none";
        row.note = std::string("extract: ") + e.what();
    }
    row.t_extract = detail::seconds_since(t0);

    if (opt.run_oracle) {
        t0 = clock::now();
        res.oracle = held_karp_opt(inst);
        row.t_oracle = detail::seconds_since(t0);
        row.oracle_objective = res.oracle->cost;
        row.match = objectives_match(*row.lp_objective, res.oracle->cost);
        if (!*row.match && !opt.forensics_dir.empty()) {
            res.bundle = opt.forensics_dir + "/" + id;
            detail::write_bundle(res.bundle, inst, lm, point, res);
        }
    }
    return res;
}

// Runs fn(k) for k in [0, count) on up to `jobs` threads; results in index order.
template <class Fn>
auto run_parallel(int count, int jobs, Fn fn) -> std::vector<decltype(fn(0))> {
    std::vector<std::optional<decltype(fn(0))>> slots(static_cast<std::size_t>(count));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int k = next++; k < count; k = next++) {
            try {
                slots[static_cast<std::size_t>(k)].emplace(fn(k));
            } catch (...) {
                errors[static_cast<std::size_t>(k)] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < std::min(jobs, count); ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    std::vector<decltype(fn(0))> out;
    out.reserve(slots.size());
    for (std::size_t k = 0; k < slots.size(); ++k) {
        if (errors[k]) std::rethrow_exception(errors[k]);
        out.push_back(std::move(*slots[k]));
    }
    return out;
}

// ---------------------------------------------------------------- count fit

struct CubicFit {
    std::array<double, 4> coeff{};  // c0 + c1 n + c2 n^2 + c3 n^3
    double r_squared = 0.0;
};

inline CubicFit fit_cubic(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 4) throw ValidationError("cubic fit needs at least 4 points");
    const auto k = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd v(k, 4);
    Eigen::VectorXd y(k);
    for (Eigen::Index r = 0; r < k; ++r) {
        double x = xs[static_cast<std::size_t>(r)];
        v(r, 0) = 1;
        v(r, 1) = x;
        v(r, 2) = x * x;
        v(r, 3) = x * x * x;
        y[r] = ys[static_cast<std::size_t>(r)];
    }
    Eigen::VectorXd c = v.colPivHouseholderQr().solve(y);
    double mean = y.mean();
    double ss_res = (y - v * c).squaredNorm();
    double ss_tot = (y.array() - mean).square().sum();
    CubicFit f;
    for (int i = 0; i < 4; ++i) f.coeff[static_cast<std::size_t>(i)] = c[i];
    f.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

struct SizeRow {
    int n;
    std::int64_t y_count, x_count, row_count;
    std::int64_t variables() const { return y_count + x_count; }
};

inline std::vector<SizeRow> size_table(int lo, int hi, const BuildOptions& build = {}) {
    std::vector<SizeRow> out;
    for (int n = lo; n <= hi; ++n) {
        const std::int64_t m = n - 1;
        out.push_back({n, closed_form_y_count(m), closed_form_x_count(m), count_rows(n, build).total()});
    }
    return out;
}

// ---------------------------------------------------------------- execute

namespace detail {

inline std::string replication_id(int n, std::uint64_t seed) {
    return "n" + std::to_string(n) + "_seed" + std::to_string(seed);
}

inline nlohmann::json report_meta(const Command& cmd, const char* sub) {
    return {{"command", sub},
            {"seed", cmd.gen.seed},
            {"reps", cmd.reps},
            {"visit", std::string(to_string(cmd.visit))},
            {"cost_model", std::string(to_string(cmd.gen.cost_model))},
            {"symmetric", cmd.gen.symmetric},
            {"integer", cmd.gen.integer},
            {"triangle", cmd.gen.triangle}};
}

inline void print_result(std::ostream& out, const TspInstance& inst, const PipelineResult& res) {
    const auto& r = res.row;
    out << "status " << r.status << '\n';
    if (r.lp_objective) out << "objective " << format_double(*r.lp_objective) << '\n';
    if (res.decomposition)
        for (const auto& part : res.decomposition->parts)
            out << "tour " << format_double(part.weight) << ' ' << to_string(part.tour) << " cost "
                << format_double(tour_cost(inst, part.tour)) << '\n';
    if (r.oracle_objective) out << "oracle " << format_double(*r.oracle_objective) << '\n';
    if (!r.note.empty()) out << "note " << r.note << '\n';
    out << report_header() << '\n' << csv_line(r) << '\n';
}

inline int run_gen(const Command& cmd, std::ostream& out) {
    std::filesystem::create_directories(cmd.out);
    const std::string manifest_path = cmd.out + "/manifest.csv";
    std::ofstream manifest(manifest_path, std::ios::binary);
    if (!manifest) throw FileError("cannot write " + manifest_path);
    manifest << "id,file,n,seed,cost_model,pct_low,pct_high,low,high,symmetric,integer,triangle\n";
    for (int k = 0; k < cmd.reps; ++k) {
        GenConfig g = cmd.gen;
        g.seed = cmd.gen.seed + static_cast<std::uint64_t>(k);
        auto inst = generate_random(g);
        const std::string id = replication_id(g.n, g.seed);
        const std::string file = id + ".csv";
        save_csv(inst, cmd.out + "/" + file);
        manifest << id << ',' << file << ',' << g.n << ',' << g.seed << ',' << to_string(g.cost_model) << ','
                 << format_double(g.pct_low) << ',' << format_double(g.pct_high) << ',' << format_double(g.low)
                 << ',' << format_double(g.high) << ',' << g.symmetric << ',' << g.integer << ',' << g.triangle
                 << '\n';
    }
    if (!manifest) throw FileError("write failed for " + manifest_path);
    out << "wrote " << cmd.reps << " instances to " << cmd.out << '\n';
    return exit_code::ok;
}

inline int run_build(const Command& cmd, std::ostream& out) {
    auto inst = load_csv(cmd.instance);
    auto lm = build_model(inst, {cmd.visit});
    write_model(lm, cmd.format, cmd.out);
    out << "rows " << lm.row_count() << " columns " << lm.col_count() << " nonzeros " << lm.nonzeros() << '\n';
    return exit_code::ok;
}

inline int run_solve(const Command& cmd, std::ostream& out, std::ostream& err) {
    auto inst = load_csv(cmd.instance);
    PipelineOptions po;
    po.build.visit_family = cmd.visit;
    po.external_solution = cmd.external_solution;
    auto res = run_pipeline(inst, std::filesystem::path(cmd.instance).stem().string(), po);
    print_result(out, inst, res);
    if (!cmd.report.empty()) write_report({res.row}, cmd.report, report_meta(cmd, "solve"));
    if (res.solver_failed) {
        err << "error: phase " << res.failed_phase << " failed: " << res.row.status << ' ' << res.row.note << '\n';
        return exit_code::solver_failure;
    }
    return exit_code::ok;
}

inline int finish_batch(const Command& cmd, const std::vector<PipelineResult>& results, const char* sub,
                        std::ostream& out, std::ostream& err) {
    std::vector<ReportRow> rows;
    int code = exit_code::ok;
    int matched = 0, compared = 0;
    bool failed = false;
    out << report_header() << '\n';
    for (const auto& r : results) {
        rows.push_back(r.row);
        out << csv_line(r.row) << '\n';
        if (r.solver_failed) {
            failed = true;
            err << "error: " << r.row.id << ": phase " << r.failed_phase << " failed: " << r.row.status << ' '
                << r.row.note << '\n';
        }
        if (r.row.match) {
            ++compared;
            if (*r.row.match) ++matched;
            else err << "mismatch: " << r.row.id << " (bundle " << r.bundle << ")\n";
        }
    }
    if (compared > 0) out << "matched " << matched << " of " << compared << '\n';
    if (!cmd.report.empty()) write_report(rows, cmd.report, report_meta(cmd, sub));
    if (failed) code = exit_code::solver_failure;
    else if (matched < compared) code = exit_code::mismatch;
    return code;
}

inline int run_verify(const Command& cmd, std::ostream& out, std::ostream& err) {
    PipelineOptions po;
    po.build.visit_family = cmd.visit;
    po.run_oracle = true;
    po.forensics_dir = cmd.forensics;
    std::vector<PipelineResult> results;
    if (!cmd.instance.empty()) {
        auto inst = load_csv(cmd.instance);
        if (inst.n() > 17) throw UsageError("verify needs n <= 17 for the Held-Karp oracle");
        results.push_back(run_pipeline(inst, std::filesystem::path(cmd.instance).stem().string(), po));
    } else {
        if (cmd.gen.n < 6 || cmd.gen.n > 17) throw UsageError("verify needs 6 <= cities <= 17");
        results = run_parallel(cmd.reps, cmd.jobs, [&](int k) {
            GenConfig g = cmd.gen;
            g.seed = cmd.gen.seed + static_cast<std::uint64_t>(k);
            return run_pipeline(generate_random(g), replication_id(g.n, g.seed), po);
        });
    }
    return finish_batch(cmd, results, "verify", out, err);
}

inline int run_decompose(const Command& cmd, std::ostream& out, std::ostream& err) {
    auto inst = load_csv(cmd.instance);
    auto ix = build_index(inst.n());
    auto p = read_solution(cmd.solution, ix);
    EliminationOptions eo;
    eo.mode = cmd.mode;
    auto dec = iterative_elimination(ix, p.values, eo);
    for (const auto& part : dec.parts)
        out << "tour " << format_double(part.weight) << ' ' << to_string(part.tour) << " cost "
            << format_double(tour_cost(inst, part.tour)) << '\n';
    out << "weight_sum " << format_double(dec.weight_sum()) << '\n';
    out << "residual " << format_double(dec.residual_norm) << '\n';
    out << "exhausted " << (dec.exhausted ? "yes" : "no") << '\n';
    if (!dec.exhausted) {
        err << "error: phase extract left residual " << format_double(dec.residual_norm)
            << (cmd.mode == ExtractMode::greedy ? "; retry with --mode enum" : "") << '\n';
        return exit_code::solver_failure;
    }
    return exit_code::ok;
}

inline int run_bench(const Command& cmd, std::ostream& out, std::ostream& err) {
    if (cmd.count_only) {
        std::vector<ReportRow> rows;
        out << report_header() << '\n';
        for (const auto& s : size_table(cmd.cities_lo, cmd.cities_hi, {cmd.visit}))
            for (int k = 0; k < cmd.reps; ++k) {
                ReportRow r;
                r.id = replication_id(s.n, cmd.gen.seed + static_cast<std::uint64_t>(k));
                r.n = s.n;
                r.y_count = s.y_count;
                r.x_count = s.x_count;
                r.row_count = s.row_count;
                r.status = "skipped";
                out << csv_line(r) << '\n';
                rows.push_back(std::move(r));
            }
        if (!cmd.report.empty()) write_report(rows, cmd.report, report_meta(cmd, "bench"));
        return exit_code::ok;
    }
    PipelineOptions po;
    po.build.visit_family = cmd.visit;
    po.run_oracle = cmd.cities_hi <= 17;
    const int per_n = cmd.reps;
    const int total = (cmd.cities_hi - cmd.cities_lo + 1) * per_n;
    auto results = run_parallel(total, cmd.jobs, [&](int k) {
        GenConfig g = cmd.gen;
        g.n = cmd.cities_lo + k / per_n;
        g.seed = cmd.gen.seed + static_cast<std::uint64_t>(k % per_n);
        return run_pipeline(generate_random(g), replication_id(g.n, g.seed), po);
    });
    return finish_batch(cmd, results, "bench", out, err);
}

inline int run_count(const Command& cmd, std::ostream& out) {
    auto table = size_table(cmd.cities_lo, cmd.cities_hi, {cmd.visit});
    out << "n,y_count,x_count,variables,rows\n";
    std::vector<double> xs, ys;
    for (const auto& s : table) {
        out << s.n << ',' << s.y_count << ',' << s.x_count << ',' << s.variables() << ',' << s.row_count << '\n';
        xs.push_back(s.n);
        ys.push_back(static_cast<double>(s.variables()));
    }
    if (table.size() >= 4) {
        auto f = fit_cubic(xs, ys);
        out << "cubic_fit variables = " << format_double(f.coeff[0]) << " + " << format_double(f.coeff[1])
            << " n + " << format_double(f.coeff[2]) << " n^2 + " << format_double(f.coeff[3]) << " n^3\n";
        out << "r_squared " << std::setprecision(6) << std::fixed << f.r_squared << '\n';
    } else {
        out << "r_squared n/a (need at least 4 city counts)\n";
    }
    return exit_code::ok;
}

}  // namespace detail

inline int execute(const Command& cmd, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        switch (cmd.sub) {
            case Sub::gen: return detail::run_gen(cmd, out);
            case Sub::build: return detail::run_build(cmd, out);
            case Sub::solve: return detail::run_solve(cmd, out, err);
            case Sub::verify: return detail::run_verify(cmd, out, err);
            case Sub::decompose: return detail::run_decompose(cmd, out, err);
            case Sub::bench: return detail::run_bench(cmd, out, err);
            case Sub::count: return detail::run_count(cmd, out);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const FileError& e) {
        err << "i/o error: " << e.what() << '\n';
        return exit_code::io;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << '\n';
        return exit_code::io;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "i/o error: " << e.what() << '\n';
        return exit_code::io;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::solver_failure;
    }
    return exit_code::usage;
}

inline int main(int argc, const char* const* argv) {
    Command cmd;
    try {
        cmd = parse_args(argc, argv);
    } catch (const HelpRequested& h) {
        std::cout << h.text;
        return exit_code::ok;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\nrun with --help for the list of options\n";
        return exit_code::usage;
    }
    return execute(cmd);
}

}  // namespace tsplp::cli
