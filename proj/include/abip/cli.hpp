#ifndef ABIP_CLI_HPP
#define ABIP_CLI_HPP

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "abip/bench.hpp"
#include "abip/core.hpp"
#include "abip/problems/generators.hpp"
#include "abip/problems/json_io.hpp"
#include "abip/problems/mps.hpp"
#include "abip/solver.hpp"

namespace abip::cli
{

/// 0 optimal, 2 primal infeasible, 3 dual infeasible, 4 iteration or time limit, 1 otherwise.
inline int exit_code_for(Status s) noexcept
{
    switch (s) {
    case Status::optimal: return 0;
    case Status::primal_infeasible: return 2;
    case Status::dual_infeasible: return 3;
    case Status::iteration_limit:
    case Status::time_limit: return 4;
    case Status::numerical_failure: return 1;
    }
    return 1;
}

inline constexpr int kExitError = 1;

struct GeneratorSpec
{
    std::string kind; // random-lp, staircase-pagerank, lasso, svm
    Index rows = 20;
    Index cols = 40;
    Index nodes = 1000;
    double density = 0.3;
    double svm_c = 1.0;
};

struct CliConfig
{
    std::string subcommand;
    std::string input;
    std::string format; // mps, mps-fixed, json; empty means by extension
    std::optional<GeneratorSpec> generate;
    std::string output;
    std::string trace;
    std::uint64_t seed = 0;
    int verbosity = 0;
    bool reduced_kernel = false;
    std::string scaling = "both";
    std::string manifest;
    double bench_time_limit = 600.0;
    std::vector<std::string> variants{"default"};
    SolverConfig solver;
};

/// A loaded problem plus whatever is needed to report in the original space.
struct LoadedProblem
{
    ConicProblem problem;
    std::optional<problems::MpsProblem> mps;
    NormalKernel kernel;
};

inline std::string lower_ext(const std::string& path)
{
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return {};
    std::string e = path.substr(dot + 1);
    for (auto& ch : e) ch = char(std::tolower(static_cast<unsigned char>(ch)));
    return e;
}

inline LoadedProblem load_input(const std::string& path, const std::string& format)
{
    LoadedProblem lp;
    const std::string fmt = format.empty() ? (lower_ext(path) == "json" ? "json" : "mps") : format;
    if (fmt == "json") {
        lp.problem = problems::read_problem_json_file(path);
    } else if (fmt == "mps" || fmt == "mps-fixed") {
        lp.mps = problems::read_mps_file(path, fmt == "mps" ? problems::MpsFormat::free : problems::MpsFormat::fixed);
        lp.problem = lp.mps->problem;
    } else {
        throw Error("unknown format '" + fmt + "'");
    }
    return lp;
}

inline LoadedProblem generate(const GeneratorSpec& g, std::uint64_t seed, bool want_kernel)
{
    LoadedProblem lp;
    if (g.kind == "random-lp") {
        lp.problem = problems::gen_random_lp(g.rows, g.cols, g.density, seed).problem;
    } else if (g.kind == "staircase-pagerank") {
        lp.problem = problems::gen_staircase_pagerank(g.nodes, 0.99, seed).problem;
    } else if (g.kind == "lasso") {
        auto inst = problems::gen_lasso_socp(g.rows, g.cols, seed);
        lp.problem = inst.problem;
        if (want_kernel) lp.kernel = problems::lasso_normal_kernel(inst.a);
    } else if (g.kind == "svm") {
        auto inst = problems::gen_svm(g.rows, g.cols, g.svm_c, seed);
        lp.problem = inst.problem;
        if (want_kernel) lp.kernel = problems::svm_normal_kernel(inst.x, inst.y);
    } else {
        throw Error("unknown generator '" + g.kind + "'");
    }
    return lp;
}

inline void apply_scaling_flag(SolverConfig& cfg, const std::string& mode)
{
    cfg.scaling = mode != "none";
    cfg.scaling_options.ruiz = mode == "ruiz" || mode == "both";
    cfg.scaling_options.pock_chambolle = mode == "pc" || mode == "both";
}

/// Result JSON plus the objective in the original space of the input.
inline nlohmann::json result_record(const SolveResult& r, const LoadedProblem& lp)
{
    auto j = problems::result_to_json(r);
    double objective = r.objective_primal;
    if (lp.mps && r.status == Status::optimal) {
        objective = lp.mps->original_objective(r.objective_primal);
        j["original_x"] = problems::detail::vec_to_json(lp.mps->map.to_original(r.x));
    }
    j["objective"] = problems::detail::number_to_json(objective);
    j["name"] = lp.problem.name;
    return j;
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream f(path);
    if (!f) throw Error("cannot write '" + path + "'");
    f << text;
}

inline SolveResult solve_loaded(const LoadedProblem& lp, SolverConfig cfg, const CliConfig& cli, std::ostream& err,
                                std::vector<OuterRecord>* records)
{
    if (lp.kernel) cfg.linsys_kernel = lp.kernel;
    TraceSink sink;
    if (records || cli.verbosity > 0) {
        sink = [&](const OuterRecord& rec) {
            if (records) records->push_back(rec);
            if (cli.verbosity > 0) {
                err << "outer " << rec.k << " mu " << rec.mu << " inner " << rec.inner_iters << " pres " << rec.pres
                    << " dres " << rec.dres << " dgap " << rec.dgap << "\n";
            }
        };
    }
    return solve(lp.problem, cfg, nullptr, sink);
}

inline int run_solve(const CliConfig& cli, std::ostream& out, std::ostream& err)
{
    try {
        LoadedProblem lp = cli.generate ? generate(*cli.generate, cli.seed, cli.reduced_kernel)
                                        : load_input(cli.input, cli.format);
        std::vector<OuterRecord> records;
        const SolveResult r = solve_loaded(lp, cli.solver, cli, err, cli.trace.empty() ? nullptr : &records);
        const std::string body = result_record(r, lp).dump(2) + "\n";
        if (cli.output.empty()) out << body;
        else write_text(cli.output, body);
        if (!cli.trace.empty()) {
            std::ostringstream csv;
            csv << std::setprecision(17) << "k,mu,inner_iters,pres,dres,dgap,restarts\n";
            for (const auto& rec : records) {
                csv << rec.k << ',' << rec.mu << ',' << rec.inner_iters << ',' << rec.pres << ',' << rec.dres << ','
                    << rec.dgap << ',' << rec.restarts << '\n';
            }
            write_text(cli.trace, csv.str());
        }
        return exit_code_for(r.status);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

inline int run_generate(const CliConfig& cli, std::ostream& out, std::ostream& err)
{
    try {
        if (!cli.generate) throw Error("generate needs --generate");
        const auto lp = generate(*cli.generate, cli.seed, false);
        const std::string body = problems::problem_to_json(lp.problem).dump() + "\n";
        if (cli.output.empty()) out << body;
        else write_text(cli.output, body);
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

/// Named solver variants for bench.
inline SolverConfig bench_variant(const std::string& name, SolverConfig base)
{
    if (name == "default") return base;
    if (name == "no-restart") base.restart_enabled = false;
    else if (name == "half-update") base.half_update = true;
    else if (name == "no-scaling") base.scaling = false;
    else if (name == "aggressive") base.mu_strategy = MuStrategy::aggressive;
    else if (name == "loqo") base.mu_strategy = MuStrategy::loqo;
    else if (name == "hybrid") base.mu_strategy = MuStrategy::hybrid;
    else throw Error("unknown bench variant '" + name + "'");
    return base;
}

struct BenchRow
{
    std::string variant;
    Index solved = 0;
    double sgm = 0.0;
    double normalized = 0.0;
};

/// Manifest lines: a problem file path, or
///   random-lp M N SEED | staircase-pagerank NODES SEED | lasso M N SEED | svm M N SEED
/// Blank lines and lines starting with '#' are skipped.
inline std::vector<std::string> read_manifest(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw Error("cannot open manifest '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(f, line)) {
        const auto t = problems::detail::trim(line);
        if (!t.empty() && t[0] != '#') lines.push_back(t);
    }
    return lines;
}

inline LoadedProblem load_manifest_entry(const std::string& entry, const std::string& format)
{
    const auto tok = problems::detail::split_ws(entry);
    auto num = [&](size_t i) -> long long {
        if (i >= tok.size()) throw Error("manifest entry '" + entry + "' is incomplete");
        return std::stoll(tok[i]);
    };
    GeneratorSpec g;
    g.kind = tok[0];
    if (g.kind == "staircase-pagerank") {
        g.nodes = num(1);
        return generate(g, std::uint64_t(num(2)), false);
    }
    if (g.kind == "random-lp" || g.kind == "lasso" || g.kind == "svm") {
        g.rows = num(1);
        g.cols = num(2);
        return generate(g, std::uint64_t(num(3)), false);
    }
    return load_input(entry, format);
}

/// Runs every instance under each variant. Failures and missing instances count as 15000 s.
inline std::vector<BenchRow> run_bench_rows(const std::vector<std::string>& entries, const CliConfig& cli,
                                            std::ostream& err)
{
    std::vector<BenchRow> rows;
    std::vector<double> sgms;
    for (const auto& v : cli.variants) {
        SolverConfig cfg = bench_variant(v, cli.solver);
        cfg.time_limit = std::min(cfg.time_limit, cli.bench_time_limit);
        std::vector<std::optional<double>> times;
        BenchRow row{v};
        for (const auto& e : entries) {
            std::optional<double> t;
            try {
                const auto lp = load_manifest_entry(e, cli.format);
                const auto t0 = std::chrono::steady_clock::now();
                const auto r = solve(lp.problem, cfg);
                const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                if (r.status == Status::optimal) {
                    t = secs;
                    ++row.solved;
                }
            } catch (const std::exception& ex) {
                err << "bench: " << e << ": " << ex.what() << "\n";
            }
            times.push_back(t);
        }
        row.sgm = bench::shifted_geometric_mean(times);
        sgms.push_back(row.sgm);
        rows.push_back(row);
    }
    const auto norm = bench::normalize_sgm(sgms);
    for (size_t i = 0; i < rows.size(); ++i) rows[i].normalized = norm[i];
    return rows;
}

inline int run_bench(const CliConfig& cli, std::ostream& out, std::ostream& err)
{
    try {
        if (cli.manifest.empty()) throw Error("bench needs --manifest");
        const auto entries = read_manifest(cli.manifest);
        if (entries.empty()) throw Error("manifest is empty");
        const auto rows = run_bench_rows(entries, cli, err);
        std::ostringstream os;
        os << std::left << std::setw(14) << "variant" << std::right << std::setw(8) << "solved" << std::setw(14)
           << "sgm" << std::setw(12) << "normalized" << "\n";
        for (const auto& r : rows) {
            os << std::left << std::setw(14) << r.variant << std::right << std::setw(5) << r.solved << "/"
               << std::setw(2) << entries.size() << std::setw(14) << std::setprecision(6) << r.sgm << std::setw(12)
               << r.normalized << "\n";
        }
        if (cli.output.empty()) out << os.str();
        else write_text(cli.output, os.str());
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

inline void add_solver_flags(CLI::App& app, CliConfig& c)
{
    auto& s = c.solver;
    app.add_option("--tol", s.tol, "Termination tolerance")->check(CLI::PositiveNumber);
    app.add_option("--max-iters", s.max_admm_iters, "ADMM iteration cap")->check(CLI::PositiveNumber);
    app.add_option("--time-limit", s.time_limit, "Wall-clock limit in seconds")->check(CLI::PositiveNumber);
    app.add_option_function<std::string>(
           "--linsys",
           [&s](const std::string& v) { s.linsys_mode = v == "direct" ? LinsysMode::direct : LinsysMode::indirect; },
           "Linear system mode")
        ->check(CLI::IsMember({"direct", "indirect"}));
    app.add_option_function<std::string>(
           "--mu",
           [&s](const std::string& v) {
               static const std::map<std::string, MuStrategy> names{{"aggressive", MuStrategy::aggressive},
                                                                    {"loqo", MuStrategy::loqo},
                                                                    {"hybrid", MuStrategy::hybrid},
                                                                    {"fixed", MuStrategy::fixed}};
               s.mu_strategy = names.at(v);
           },
           "Barrier update")
        ->check(CLI::IsMember({"aggressive", "loqo", "hybrid", "fixed"}));
    app.add_flag("--restart,!--no-restart", s.restart_enabled, "Averaged restarts");
    app.add_option("--restart-threshold", s.restart_threshold, "Iterations before restarts start");
    app.add_option("--restart-period", s.restart_period, "Restart cycle length");
    app.add_flag("--half-update", s.half_update, "Half-update step");
    app.add_option("--alpha1", s.alpha1, "Half-update relaxation before the prox");
    app.add_option("--alpha2", s.alpha2, "Half-update relaxation after the prox");
    app.add_option("--beta", s.beta, "Penalty and initial barrier value")->check(CLI::PositiveNumber);
    app.add_option("--scaling", c.scaling, "Diagonal scaling")
        ->check(CLI::IsMember({"none", "ruiz", "pc", "both"}));
    app.add_flag("--null-objective", s.skip_dual_check, "Drop the dual residual check (needs c = 0)");
    app.add_flag("--reduced-kernel", c.reduced_kernel, "Use the structured LASSO/SVM normal-equation solver");
}

inline void add_generator_flags(CLI::App& app, CliConfig& c, GeneratorSpec& g)
{
    app.add_option("--generate", g.kind, "Instance generator")
        ->check(CLI::IsMember({"random-lp", "staircase-pagerank", "lasso", "svm"}));
    app.add_option("--nodes", g.nodes, "PageRank node count")->check(CLI::PositiveNumber);
    app.add_option("--rows", g.rows, "Rows (random-lp), samples (lasso, svm)")->check(CLI::PositiveNumber);
    app.add_option("--cols", g.cols, "Columns (random-lp), features (lasso, svm)")->check(CLI::PositiveNumber);
    app.add_option("--density", g.density, "random-lp density")->check(CLI::Range(1e-9, 1.0));
    app.add_option("--svm-c", g.svm_c, "SVM penalty")->check(CLI::PositiveNumber);
    app.add_option("--seed", c.seed, "Seed for every generator");
}

/// Parses argv and dispatches. Usage errors exit 1 like any other error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"ADMM-based interior point solver for conic programs"};
    app.require_subcommand(1);
    CliConfig c;
    GeneratorSpec gen;

    auto* solve_cmd = app.add_subcommand("solve", "Solve a problem file or a generated instance");
    auto* in_opt = solve_cmd->add_option("--input", c.input, "Problem file (.mps or .json)");
    solve_cmd->add_option("--format", c.format, "Input format")->check(CLI::IsMember({"mps", "mps-fixed", "json"}));
    add_generator_flags(*solve_cmd, c, gen);
    add_solver_flags(*solve_cmd, c);
    solve_cmd->add_option("--output", c.output, "Result JSON path (stdout if omitted)");
    solve_cmd->add_option("--trace", c.trace, "Per-outer-iteration CSV path");
    solve_cmd->add_flag("-v,--verbose", c.verbosity, "Log outer iterations to stderr");
    solve_cmd->get_option("--generate")->excludes(in_opt);

    auto* gen_cmd = app.add_subcommand("generate", "Write a generated instance as problem JSON");
    add_generator_flags(*gen_cmd, c, gen);
    gen_cmd->get_option("--generate")->required();
    gen_cmd->add_option("--output", c.output, "Problem JSON path (stdout if omitted)");

    auto* bench_cmd = app.add_subcommand("bench", "Shifted geometric mean of runtimes over a manifest");
    bench_cmd->add_option("--manifest", c.manifest, "Instance list")->required();
    bench_cmd->add_option("--format", c.format, "Format of file entries")
        ->check(CLI::IsMember({"mps", "mps-fixed", "json"}));
    bench_cmd->add_option("--variants", c.variants, "Solver variants to compare")->delimiter(',');
    bench_cmd->add_option("--instance-time-limit", c.bench_time_limit, "Per-instance limit in seconds");
    add_solver_flags(*bench_cmd, c);
    bench_cmd->add_option("--output", c.output, "Table path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }

    if (!gen.kind.empty()) c.generate = gen;
    apply_scaling_flag(c.solver, c.scaling);
    if (solve_cmd->parsed()) {
        c.subcommand = "solve";
        if (c.input.empty() && !c.generate) {
            err << "error: solve needs --input or --generate\n";
            return kExitError;
        }
        if (c.reduced_kernel && c.solver.scaling) {
            err << "error: --reduced-kernel needs --scaling none\n";
            return kExitError;
        }
        return run_solve(c, out, err);
    }
    if (gen_cmd->parsed()) {
        c.subcommand = "generate";
        return run_generate(c, out, err);
    }
    c.subcommand = "bench";
    return run_bench(c, out, err);
}

} // namespace abip::cli

#endif // ABIP_CLI_HPP
