#include "l2e_cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "l2e/config.hpp"
#include "l2e/csv.hpp"
#include "l2e/error.hpp"
#include "l2e/experiments.hpp"
#include "l2e/report_io.hpp"

namespace l2e::cli {

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitArgs {
    std::string input;
    std::string response = "y";
    bool add_intercept = false;
    bool identity_design = false;
    std::string penalty = "none";
    std::optional<double> lambda;
    double gamma = 3.0;
    std::optional<Index> k;
    double rho = 1e8;
    std::string set = "sparse";
    std::string fusion = "identity";
    std::optional<double> tol;
    std::optional<int> max_outer;
    std::uint64_t seed = 0;
    std::string output;
    std::string weights;
};

struct SimArgs {
    std::string scenario;
    std::map<std::string, std::string> flags;
    bool full = false;
    std::string config;
    std::string out_prefix = "l2e_sim";
};

ConstraintSet parse_set(const std::string& name, std::optional<Index> k)
{
    if (name == "whole" || name == "none") return ConstraintSet::whole_space();
    if (name == "isotonic") return ConstraintSet::isotonic();
    if (name == "nonneg") return ConstraintSet::nonnegative();
    if (name == "sparse") {
        if (!k) throw InputError("the sparse set needs --k");
        return ConstraintSet::sparse(*k);
    }
    throw InputError("unknown set '" + name + "' (expected whole, isotonic, nonneg or sparse)");
}

Penalty build_penalty(const FitArgs& a, Index p)
{
    const std::string& kind = a.penalty;
    if (kind == "none") return NoPenalty{};
    if (kind == "lasso" || kind == "mcp") {
        if (!a.lambda) throw InputError("--penalty " + kind + " needs --lambda");
        if (kind == "lasso") return LassoPenalty{*a.lambda};
        return McpPenalty{*a.lambda, a.gamma};
    }
    if (kind == "isotonic" || kind == "nonneg" || kind == "sparse") return IndicatorPenalty{parse_set(kind, a.k)};
    if (kind == "distance") {
        DistancePenalty d;
        d.rho = a.rho;
        d.set = parse_set(a.set, a.k);
        if (a.fusion == "diff1") d.fusion = FusionMatrix::difference(p, 1);
        else if (a.fusion == "diff2") d.fusion = FusionMatrix::difference(p, 2);
        else if (a.fusion != "identity")
            throw InputError("unknown fusion '" + a.fusion + "' (expected identity, diff1 or diff2)");
        return d;
    }
    throw InputError("unknown penalty '" + kind + "'");
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes every file or none: all contents are prepared before the first open.
void write_files(const std::vector<std::pair<std::string, std::string>>& files)
{
    for (const auto& [path, text] : files) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write '" + path + "'");
        out << text;
        if (!out) throw InputError("write to '" + path + "' failed");
    }
}

int cmd_fit(const FitArgs& a, std::ostream& out)
{
    Dataset data = [&] {
        std::istringstream in(read_file(a.input));
        const CsvTable table = read_csv(in);
        if (!a.identity_design) return dataset_from_csv(table, a.response, a.add_intercept);
        if (a.add_intercept) throw InputError("--identity-design and --add-intercept are exclusive");
        const std::size_t col = table.column(a.response);
        VectorXd y(static_cast<Index>(table.rows.size()));
        for (std::size_t i = 0; i < table.rows.size(); ++i)
            y[static_cast<Index>(i)] = parse_double(table.rows[i][col], "row " + std::to_string(i + 1));
        return Dataset::with_identity_design(std::move(y));
    }();

    const Penalty pen = build_penalty(a, data.p());
    validate_penalty(pen);
    FitOptions opts;
    if (a.tol) opts.outer_tol = *a.tol;
    if (a.max_outer) opts.max_outer = *a.max_outer;
    opts.validate();

    const FitReport rep = fit_l2e_auto(data, pen, opts);

    std::vector<std::pair<std::string, std::string>> files;
    const std::string json = fit_report_to_json(rep) + "\n";
    if (!a.output.empty()) files.emplace_back(a.output, json);
    if (!a.weights.empty()) {
        std::ostringstream w;
        write_weights_csv(w, data, rep);
        files.emplace_back(a.weights, w.str());
    }
    write_files(files);
    if (a.output.empty()) out << json;
    return kOk;
}

ExperimentConfig build_experiment(const SimArgs& a)
{
    ExperimentConfig cfg;
    std::map<std::string, std::string> kv;
    if (!a.config.empty()) {
        std::istringstream in(read_file(a.config));
        kv = read_key_values(in);
        if (auto it = kv.find("scenario"); it != kv.end() && it->second != a.scenario)
            throw InputError("config scenario '" + it->second + "' does not match '" + a.scenario + "'");
    }
    kv["scenario"] = a.scenario;
    if (a.full && !a.flags.count("reps") && !kv.count("reps")) kv["reps"] = "100";
    for (const auto& [key, value] : a.flags) kv[key] = value;
    if (!kv.count("methods"))
        kv["methods"] = a.scenario == "isotonic" ? "mm,pg,ls" : "lasso,mcp,distance";
    apply_config(cfg, kv);
    cfg.validate();
    return cfg;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void print_summary(std::ostream& out, const ExperimentSummary& s)
{
    char line[256];
    std::snprintf(line, sizeof line, "%-9s %5s %5s %11s %11s %8s %8s %8s %8s %8s %10s\n", "method", "ok", "fail",
                  "median_mse", "mean_relerr", "mean_f1", "mean_fp", "outer", "inner_b", "inner_e", "runtime_s");
    out << line;
    for (const MethodSummary& m : s.methods) {
        std::snprintf(line, sizeof line, "%-9s %5d %5d %11s %11s %8s %8s %8s %8s %8s %10s\n",
                      method_name(m.method).c_str(), m.completed, m.failed, fmt(m.median_mse).c_str(),
                      fmt(m.mean_relative_error).c_str(), fmt(m.mean_f1).c_str(), fmt(m.mean_fp).c_str(),
                      fmt(m.mean_outer_iters).c_str(), fmt(m.mean_inner_beta).c_str(),
                      fmt(m.mean_inner_eta).c_str(), fmt(m.mean_runtime).c_str());
        out << line;
    }
}

int cmd_simulate(const SimArgs& a, std::ostream& out)
{
    const ExperimentConfig cfg = build_experiment(a);
    const ExperimentSummary s = run_replicates(cfg);
    std::ostringstream reps, timing;
    write_replicates_csv(reps, s);
    write_timing_csv(timing, s);
    write_files({{a.out_prefix + "_replicates.csv", reps.str()},
                 {a.out_prefix + "_timing.csv", timing.str()},
                 {a.out_prefix + "_summary.json", summary_to_json(s, cfg) + "\n"}});
    print_summary(out, s);
    return kOk;
}

int cmd_bench(const SimArgs& a, std::ostream& out)
{
    const ExperimentConfig cfg = build_experiment(a);
    const ExperimentSummary s = run_replicates(cfg);
    std::ostringstream bench;
    write_bench_csv(bench, s);
    write_files({{a.out_prefix + "_bench.csv", bench.str()}});
    print_summary(out, s);
    return kOk;
}

void add_experiment_flags(CLI::App& sub, SimArgs& a, std::map<std::string, std::string>& raw)
{
    sub.add_option("scenario", a.scenario, "isotonic or sparse")
        ->required()
        ->check(CLI::IsMember({"isotonic", "sparse"}));
    const std::vector<std::pair<std::string, std::string>> flags = {
        {"n", "number of cases"},
        {"m", "number of outliers"},
        {"shift", "outlier shift"},
        {"p", "number of predictors (sparse)"},
        {"tau", "noise precision (sparse)"},
        {"reps", "number of replicates (default 20)"},
        {"methods", "comma list: mm,pg,ls or lasso,mcp,distance"},
        {"seed", "master seed (default 0)"},
        {"jobs", "worker threads"},
        {"folds", "cross-validation folds"},
        {"lambda", "lasso/MCP lambda when --cv is off"},
        {"gamma", "MCP gamma"},
        {"k", "sparsity level when --cv is off"},
        {"rho", "distance penalty constant"},
        {"tol", "outer tolerance"},
        {"max-outer", "outer iteration cap"},
    };
    for (const auto& [name, help] : flags) sub.add_option("--" + name, raw[name], help);
    sub.add_flag("--cv", "select tuning parameters by cross-validation");
    sub.add_flag("--full", "run 100 replicates");
    sub.add_option("--config", a.config, "key = value scenario file");
    sub.add_option("--out-prefix", a.out_prefix, "prefix for output files");
}

void collect_flags(const CLI::App& sub, SimArgs& a, const std::map<std::string, std::string>& raw)
{
    for (const auto& [name, value] : raw) {
        if (sub.get_option("--" + name)->count() == 0) continue;
        std::string key = name;
        if (key == "max-outer") key = "max_outer";
        a.flags[key] = value;
    }
    if (sub.get_option("--cv")->count() > 0) a.flags["cv"] = "true";
    a.full = sub.get_option("--full")->count() > 0;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Robust structured regression with the L2E criterion"};
    app.require_subcommand(1);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit one dataset from CSV");
    fit_cmd->add_option("--input", fit.input, "CSV file with a header row")->required();
    fit_cmd->add_option("--response", fit.response, "response column (default y)");
    fit_cmd->add_flag("--add-intercept", fit.add_intercept, "prepend a column of ones");
    fit_cmd->add_flag("--identity-design", fit.identity_design, "use X = I (isotonic-style problems)");
    fit_cmd->add_option("--penalty", fit.penalty, "none, lasso, mcp, isotonic, nonneg, sparse or distance");
    fit_cmd->add_option("--lambda", fit.lambda, "lasso/MCP strength");
    fit_cmd->add_option("--gamma", fit.gamma, "MCP concavity (default 3)");
    fit_cmd->add_option("--k", fit.k, "sparsity level");
    fit_cmd->add_option("--rho", fit.rho, "distance penalty constant (default 1e8)");
    fit_cmd->add_option("--set", fit.set, "distance constraint set: whole, isotonic, nonneg, sparse");
    fit_cmd->add_option("--fusion", fit.fusion, "distance fusion matrix: identity, diff1, diff2");
    fit_cmd->add_option("--tol", fit.tol, "relative outer tolerance");
    fit_cmd->add_option("--max-outer", fit.max_outer, "outer iteration cap");
    fit_cmd->add_option("--seed", fit.seed, "accepted for uniformity; fits are deterministic");
    fit_cmd->add_option("--output", fit.output, "JSON report path (stdout if omitted)");
    fit_cmd->add_option("--weights", fit.weights, "per-case residual/weight CSV path");

    SimArgs sim, bench;
    std::map<std::string, std::string> sim_raw, bench_raw;
    auto* sim_cmd = app.add_subcommand("simulate", "run a simulation study");
    add_experiment_flags(*sim_cmd, sim, sim_raw);
    auto* bench_cmd = app.add_subcommand("bench", "iteration counts and timings per method");
    add_experiment_flags(*bench_cmd, bench, bench_raw);
    bench.out_prefix = "l2e_bench";

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kOk;
        }
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit, out);
        if (sim_cmd->parsed()) {
            collect_flags(*sim_cmd, sim, sim_raw);
            return cmd_simulate(sim, out);
        }
        collect_flags(*bench_cmd, bench, bench_raw);
        return cmd_bench(bench, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const UnsupportedConfiguration& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "solver error: " << e.what() << "\n";
        return kSolverError;
    }
}

} // namespace l2e::cli
