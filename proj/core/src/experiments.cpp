#include "l2e/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "l2e/error.hpp"
#include "l2e/numeric.hpp"
#include "l2e/random.hpp"

namespace l2e {

// ---------------------------------------------------------------------------
// Scenarios

void IsotonicScenario::validate() const
{
    if (n < 2) throw InvalidArgument("isotonic scenario: n must be at least 2");
    if (m < 0 || m > n) throw InvalidArgument("isotonic scenario: need 0 <= m <= n");
    if (!std::isfinite(shift)) throw InvalidArgument("isotonic scenario: shift must be finite");
}

Index IsotonicScenario::outlier_start() const
{
    const Index proportional = static_cast<Index>(std::llround(250.0 * static_cast<double>(n) / 1000.0));
    return std::max<Index>(0, std::min(proportional, n - m));
}

void SparseScenario::validate() const
{
    if (n < 2 || p < 1) throw InvalidArgument("sparse scenario: need n >= 2 and p >= 1");
    if (m < 0 || m > n) throw InvalidArgument("sparse scenario: need 0 <= m <= n");
    if (!(tau_true > 0.0)) throw InvalidArgument("sparse scenario: tau must be positive");
    if (!std::isfinite(shift)) throw InvalidArgument("sparse scenario: shift must be finite");
}

GeneratedData gen_isotonic(const IsotonicScenario& sc)
{
    sc.validate();
    Rng rng(sc.seed);
    VectorXd truth(sc.n);
    VectorXd y(sc.n);
    const Index start = sc.outlier_start();
    for (Index i = 0; i < sc.n; ++i) {
        const double x = -2.5 + 5.0 * static_cast<double>(i) / static_cast<double>(sc.n - 1);
        truth[i] = x * x * x;
        const double s = (i >= start && i < start + sc.m) ? sc.shift : 0.0;
        y[i] = truth[i] + s + rng.normal();
    }
    return {Dataset::with_identity_design(std::move(y)), std::move(truth)};
}

GeneratedData gen_sparse(const SparseScenario& sc)
{
    sc.validate();
    Rng rng(sc.seed);
    MatrixXd X(sc.n, sc.p);
    for (Index i = 0; i < sc.n; ++i)
        for (Index j = 0; j < sc.p; ++j) X(i, j) = rng.normal();
    VectorXd truth = VectorXd::Zero(sc.p);
    truth.head(std::min<Index>(5, sc.p)).setOnes();
    VectorXd y = X * truth;
    for (Index i = 0; i < sc.n; ++i) y[i] += rng.normal() / sc.tau_true;
    for (Index i = 0; i < sc.m; ++i) {
        y[i] += sc.shift;
        X.row(i).array() += sc.shift;
    }
    return {Dataset(std::move(y), std::move(X)), std::move(truth)};
}

// ---------------------------------------------------------------------------
// Metrics

Metrics compute_metrics(const VectorXd& beta_hat, const VectorXd& truth, double support_tol)
{
    if (beta_hat.size() != truth.size()) throw InvalidArgument("compute_metrics: length mismatch");
    if (truth.size() == 0) throw InvalidArgument("compute_metrics: empty vectors");
    Metrics m;
    const VectorXd diff = beta_hat - truth;
    m.mse = pairwise_dot(diff, diff) / static_cast<double>(diff.size());
    const double tnorm = truth.norm();
    if (tnorm > 0.0) {
        m.relative_error = diff.norm() / tnorm;
    } else {
        m.relative_error = std::numeric_limits<double>::quiet_NaN();
        m.relative_error_defined = false;
    }
    for (Index j = 0; j < truth.size(); ++j) {
        const bool est = std::abs(beta_hat[j]) > support_tol;
        const bool tru = truth[j] != 0.0;
        if (est && tru) ++m.true_positives;
        else if (est) ++m.false_positives;
        else if (tru) ++m.false_negatives;
    }
    const Index denom = 2 * m.true_positives + m.false_positives + m.false_negatives;
    m.f1 = denom == 0 ? 1.0 : 2.0 * static_cast<double>(m.true_positives) / static_cast<double>(denom);
    return m;
}

// ---------------------------------------------------------------------------
// Cross-validation

std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed)
{
    if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
    if (n < folds) throw InvalidArgument("cross-validation: fewer cases than folds");
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    Rng rng(seed);
    for (Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (Index pos = 0; pos < n; ++pos)
        fold[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos)])] = static_cast<int>(pos % folds);
    return fold;
}

namespace {

// Larger means more penalized; only compared within one penalty family.
double strength(const Penalty& p)
{
    if (const auto* l = std::get_if<LassoPenalty>(&p)) return l->lambda;
    if (const auto* m = std::get_if<McpPenalty>(&p)) return m->lambda;
    if (const auto* d = std::get_if<DistancePenalty>(&p))
        return d->set.kind == SetKind::sparse ? -static_cast<double>(d->set.k) : d->rho;
    if (const auto* i = std::get_if<IndicatorPenalty>(&p))
        return i->set.kind == SetKind::sparse ? -static_cast<double>(i->set.k) : 0.0;
    return 0.0;
}

FitReport default_fit(const Dataset& d, const Penalty& p)
{
    return fit_l2e_auto(d, p);
}

} // namespace

bool more_penalized(const Penalty& a, const Penalty& b)
{
    return strength(a) > strength(b);
}

CvResult cross_validate(const Dataset& data, const std::vector<Penalty>& grid, int folds, std::uint64_t seed,
                        const Fitter& fitter)
{
    if (grid.empty()) throw InvalidArgument("cross_validate: empty penalty grid");
    const Fitter& fit = fitter ? fitter : Fitter(default_fit);
    const std::vector<int> label = fold_assignment(data.n(), folds, seed);

    std::vector<std::vector<Index>> train(static_cast<std::size_t>(folds));
    std::vector<std::vector<Index>> test(static_cast<std::size_t>(folds));
    for (Index i = 0; i < data.n(); ++i) {
        const int f = label[static_cast<std::size_t>(i)];
        for (int g = 0; g < folds; ++g) (g == f ? test : train)[static_cast<std::size_t>(g)].push_back(i);
    }
    std::vector<Dataset> train_sets;
    std::vector<Dataset> test_sets;
    for (int g = 0; g < folds; ++g) {
        train_sets.push_back(data.subset(train[static_cast<std::size_t>(g)]));
        test_sets.push_back(data.subset(test[static_cast<std::size_t>(g)]));
    }

    CvResult res;
    res.scores.reserve(grid.size());
    for (const Penalty& pen : grid) {
        double total = 0.0;
        for (int g = 0; g < folds; ++g) {
            const auto gi = static_cast<std::size_t>(g);
            const FitReport rep = fit(train_sets[gi], pen);
            total += l2e_loss(test_sets[gi], rep.beta, rep.eta).value;
        }
        res.scores.push_back(total / folds);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double a = res.scores[i];
        const double b = res.scores[best];
        const bool tie = std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
        if ((!tie && a < b) || (tie && more_penalized(grid[i], grid[best]))) best = i;
    }
    res.best_index = best;
    res.best = grid[best];
    return res;
}

double lambda_max(const Dataset& data)
{
    const InitialValues init = init_default(data);
    return grad_beta(data, VectorXd::Zero(data.p()), init.eta).lpNorm<Eigen::Infinity>();
}

namespace {

std::vector<double> log_grid(double top, int count, double min_ratio)
{
    if (count < 1) throw InvalidArgument("penalty grid needs at least one value");
    if (!(min_ratio > 0.0 && min_ratio <= 1.0)) throw InvalidArgument("penalty grid min_ratio must be in (0, 1]");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double frac = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(top * std::pow(min_ratio, frac));
    }
    return out;
}

} // namespace

std::vector<Penalty> lasso_grid(const Dataset& data, int count, double min_ratio)
{
    std::vector<Penalty> grid;
    for (double l : log_grid(lambda_max(data), count, min_ratio)) grid.emplace_back(LassoPenalty{l});
    return grid;
}

std::vector<Penalty> mcp_grid(const Dataset& data, int count, double min_ratio, double gamma)
{
    std::vector<Penalty> grid;
    for (double l : log_grid(lambda_max(data), count, min_ratio)) grid.emplace_back(McpPenalty{l, gamma});
    return grid;
}

std::vector<Penalty> distance_sparse_grid(const std::vector<Index>& ks, double rho)
{
    std::vector<Penalty> grid;
    for (Index k : ks) grid.emplace_back(DistancePenalty{rho, std::nullopt, ConstraintSet::sparse(k)});
    return grid;
}

// ---------------------------------------------------------------------------
// Replicates

std::string method_name(Method m)
{
    switch (m) {
    case Method::mm: return "mm";
    case Method::pg: return "pg";
    case Method::ls: return "ls";
    case Method::lasso: return "lasso";
    case Method::mcp: return "mcp";
    case Method::distance: return "distance";
    }
    return "unknown";
}

std::optional<Method> parse_method(const std::string& name)
{
    for (Method m : {Method::mm, Method::pg, Method::ls, Method::lasso, Method::mcp, Method::distance})
        if (method_name(m) == name) return m;
    return std::nullopt;
}

bool method_applies(Method m, const Scenario& sc)
{
    const bool iso = std::holds_alternative<IsotonicScenario>(sc);
    switch (m) {
    case Method::mm:
    case Method::pg:
    case Method::ls: return iso;
    case Method::lasso:
    case Method::mcp:
    case Method::distance: return !iso;
    }
    return false;
}

void ExperimentConfig::validate() const
{
    std::visit([](const auto& s) { s.validate(); }, scenario);
    if (methods.empty()) throw InvalidArgument("experiment: no methods given");
    for (Method m : methods)
        if (!method_applies(m, scenario))
            throw InvalidArgument("experiment: method '" + method_name(m) + "' does not apply to this scenario");
    if (n_reps < 1) throw InvalidArgument("experiment: reps must be at least 1");
    if (jobs < 1) throw InvalidArgument("experiment: jobs must be at least 1");
    if (cv && cv_folds < 2) throw InvalidArgument("experiment: folds must be at least 2");
    if (cv && k_grid.empty()) throw InvalidArgument("experiment: empty k grid");
    if (lambda && !(*lambda >= 0.0)) throw InvalidArgument("experiment: lambda must be nonnegative");
    if (lambda_count < 1) throw InvalidArgument("experiment: lambda_count must be at least 1");
    if (!(lambda_min_ratio > 0.0 && lambda_min_ratio <= 1.0))
        throw InvalidArgument("experiment: lambda_min_ratio must be in (0, 1]");
    if (!(gamma > 1.0)) throw InvalidArgument("experiment: gamma must exceed 1");
    if (k < 1) throw InvalidArgument("experiment: k must be positive");
    if (!(rho > 0.0)) throw InvalidArgument("experiment: rho must be positive");
    fit.validate();
    pg.validate();
}

const MethodSummary& ExperimentSummary::of(Method m) const
{
    for (const MethodSummary& s : methods)
        if (s.method == m) return s;
    throw InvalidArgument("experiment summary has no method '" + method_name(m) + "'");
}

ReplicateResult run_method(const ExperimentConfig& cfg, Method method, const GeneratedData& gen, int rep,
                           std::uint64_t rep_seed)
{
    ReplicateResult out;
    out.rep = rep;
    out.method = method;
    out.seed = rep_seed;
    const auto start = std::chrono::steady_clock::now();
    try {
        const Dataset& data = gen.data;
        VectorXd beta;
        auto take = [&](const FitReport& r) {
            beta = r.beta;
            out.outer_iters = r.outer_iters;
            out.mean_inner_beta = r.mean_inner_beta();
            out.mean_inner_eta = r.mean_inner_eta();
            out.converged = r.converged;
        };
        const Fitter fitter = [&cfg](const Dataset& d, const Penalty& p) {
            return fit_l2e_auto(d, p, cfg.fit, cfg.rho_schedule);
        };
        const std::uint64_t cv_seed = mix_seed(rep_seed, 1);

        Penalty pen = NoPenalty{};
        switch (method) {
        case Method::mm:
            pen = IndicatorPenalty{ConstraintSet::isotonic()};
            take(fit_l2e(data, pen, cfg.fit));
            break;
        case Method::pg:
            pen = IndicatorPenalty{ConstraintSet::isotonic()};
            take(fit_pg(data, pen, cfg.pg));
            break;
        case Method::ls:
            beta = project_isotonic(data.y());
            out.converged = true;
            out.selected = "least-squares";
            break;
        case Method::lasso:
        case Method::mcp:
        case Method::distance: {
            if (cfg.cv) {
                std::vector<Penalty> grid;
                if (method == Method::lasso) grid = lasso_grid(data, cfg.lambda_count, cfg.lambda_min_ratio);
                else if (method == Method::mcp) grid = mcp_grid(data, cfg.lambda_count, cfg.lambda_min_ratio, cfg.gamma);
                else grid = distance_sparse_grid(cfg.k_grid, cfg.rho);
                pen = cross_validate(data, grid, cfg.cv_folds, cv_seed, fitter).best;
            } else {
                const double lam = cfg.lambda.value_or(0.1 * lambda_max(data));
                if (method == Method::lasso) pen = LassoPenalty{lam};
                else if (method == Method::mcp) pen = McpPenalty{lam, cfg.gamma};
                else pen = DistancePenalty{cfg.rho, std::nullopt, ConstraintSet::sparse(cfg.k)};
            }
            take(fitter(data, pen));
            break;
        }
        }
        if (out.selected.empty()) out.selected = describe_penalty(pen);
        out.metrics = compute_metrics(beta, gen.truth);
    } catch (const std::exception& e) {
        out.error = e.what();
        if (out.error.empty()) out.error = "unknown failure";
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out.metrics = Metrics{nan, nan, false, nan, 0, 0, 0};
    }
    out.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

namespace {

double mean_of(const std::vector<double>& v)
{
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    return pairwise_sum(std::span<const double>(v)) / static_cast<double>(v.size());
}

double median_of(const std::vector<double>& v)
{
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    return median(std::span<const double>(v));
}

std::vector<Method> canonical_methods(std::vector<Method> ms)
{
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    return ms;
}

} // namespace

MethodSummary summarize(Method m, const std::vector<ReplicateResult>& rows)
{
    MethodSummary s;
    s.method = m;
    std::vector<double> mse, rel, f1, tp, fp, outer, ib, ie, rt;
    for (const ReplicateResult& r : rows) {
        if (r.method != m) continue;
        if (!r.ok()) {
            ++s.failed;
            continue;
        }
        ++s.completed;
        mse.push_back(r.metrics.mse);
        if (r.metrics.relative_error_defined) rel.push_back(r.metrics.relative_error);
        f1.push_back(r.metrics.f1);
        tp.push_back(static_cast<double>(r.metrics.true_positives));
        fp.push_back(static_cast<double>(r.metrics.false_positives));
        outer.push_back(r.outer_iters);
        ib.push_back(r.mean_inner_beta);
        ie.push_back(r.mean_inner_eta);
        rt.push_back(r.runtime);
    }
    s.mean_mse = mean_of(mse);
    s.median_mse = median_of(mse);
    s.mean_relative_error = mean_of(rel);
    s.median_relative_error = median_of(rel);
    s.mean_f1 = mean_of(f1);
    s.median_f1 = median_of(f1);
    s.mean_tp = mean_of(tp);
    s.mean_fp = mean_of(fp);
    s.mean_outer_iters = mean_of(outer);
    s.mean_inner_beta = mean_of(ib);
    s.mean_inner_eta = mean_of(ie);
    s.mean_runtime = mean_of(rt);
    s.median_runtime = median_of(rt);
    return s;
}

ExperimentSummary run_replicates(const ExperimentConfig& cfg_in)
{
    ExperimentConfig cfg = cfg_in;
    cfg.methods = canonical_methods(cfg.methods);
    cfg.validate();

    const auto n_methods = cfg.methods.size();
    const auto n_reps = static_cast<std::size_t>(cfg.n_reps);
    std::vector<ReplicateResult> grid(n_methods * n_reps);

    auto run_rep = [&](std::size_t rep) {
        const std::uint64_t rep_seed = mix_seed(cfg.seed, rep);
        GeneratedData gen = std::visit(
            [rep_seed](auto sc) {
                sc.seed = rep_seed;
                if constexpr (std::is_same_v<decltype(sc), IsotonicScenario>) return gen_isotonic(sc);
                else return gen_sparse(sc);
            },
            cfg.scenario);
        for (std::size_t mi = 0; mi < n_methods; ++mi)
            grid[mi * n_reps + rep] = run_method(cfg, cfg.methods[mi], gen, static_cast<int>(rep), rep_seed);
    };

    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), n_reps);
    if (workers <= 1) {
        for (std::size_t rep = 0; rep < n_reps; ++rep) run_rep(rep);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t rep = next++; rep < n_reps; rep = next++) run_rep(rep);
            });
        }
    }

    ExperimentSummary out;
    out.replicates = std::move(grid);
    for (Method m : cfg.methods) out.methods.push_back(summarize(m, out.replicates));
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string fmt_double(double v)
{
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string csv_quote(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

nlohmann::json json_number(double v)
{
    if (!std::isfinite(v)) return nullptr;
    return v;
}

} // namespace

void write_replicates_csv(std::ostream& os, const ExperimentSummary& s)
{
    os << "method,rep,seed,mse,relative_error,f1,true_positives,false_positives,false_negatives,"
          "outer_iters,mean_inner_beta,mean_inner_eta,converged,selected,error\n";
    for (const ReplicateResult& r : s.replicates) {
        os << method_name(r.method) << ',' << r.rep << ',' << r.seed << ',' << fmt_double(r.metrics.mse) << ','
           << fmt_double(r.metrics.relative_error) << ',' << fmt_double(r.metrics.f1) << ','
           << r.metrics.true_positives << ',' << r.metrics.false_positives << ',' << r.metrics.false_negatives << ','
           << r.outer_iters << ',' << fmt_double(r.mean_inner_beta) << ',' << fmt_double(r.mean_inner_eta) << ','
           << (r.converged ? 1 : 0) << ',' << csv_quote(r.selected) << ',' << csv_quote(r.error) << '\n';
    }
}

void write_timing_csv(std::ostream& os, const ExperimentSummary& s)
{
    os << "method,rep,runtime_seconds\n";
    for (const ReplicateResult& r : s.replicates)
        os << method_name(r.method) << ',' << r.rep << ',' << fmt_double(r.runtime) << '\n';
}

void write_bench_csv(std::ostream& os, const ExperimentSummary& s)
{
    os << "method,rep,outer_iters,mean_inner_beta,mean_inner_eta,runtime_seconds\n";
    for (const ReplicateResult& r : s.replicates) {
        os << method_name(r.method) << ',' << r.rep << ',' << r.outer_iters << ',' << fmt_double(r.mean_inner_beta)
           << ',' << fmt_double(r.mean_inner_eta) << ',' << fmt_double(r.runtime) << '\n';
    }
}

std::string summary_to_json(const ExperimentSummary& s, const ExperimentConfig& cfg)
{
    nlohmann::json j;
    nlohmann::json sc;
    if (const auto* iso = std::get_if<IsotonicScenario>(&cfg.scenario)) {
        sc = {{"kind", "isotonic"}, {"n", iso->n}, {"m", iso->m}, {"shift", iso->shift}};
    } else {
        const auto& sp = std::get<SparseScenario>(cfg.scenario);
        sc = {{"kind", "sparse"}, {"n", sp.n},         {"p", sp.p},
              {"m", sp.m},        {"shift", sp.shift}, {"tau", sp.tau_true}};
    }
    j["scenario"] = sc;
    j["reps"] = cfg.n_reps;
    j["seed"] = cfg.seed;
    j["cv"] = cfg.cv;
    nlohmann::json methods = nlohmann::json::array();
    for (const MethodSummary& m : s.methods) {
        methods.push_back({
            {"method", method_name(m.method)},
            {"completed", m.completed},
            {"failed", m.failed},
            {"mean_mse", json_number(m.mean_mse)},
            {"median_mse", json_number(m.median_mse)},
            {"mean_relative_error", json_number(m.mean_relative_error)},
            {"median_relative_error", json_number(m.median_relative_error)},
            {"mean_f1", json_number(m.mean_f1)},
            {"median_f1", json_number(m.median_f1)},
            {"mean_true_positives", json_number(m.mean_tp)},
            {"mean_false_positives", json_number(m.mean_fp)},
            {"mean_outer_iters", json_number(m.mean_outer_iters)},
            {"mean_inner_beta", json_number(m.mean_inner_beta)},
            {"mean_inner_eta", json_number(m.mean_inner_eta)},
            {"mean_runtime_seconds", json_number(m.mean_runtime)},
            {"median_runtime_seconds", json_number(m.median_runtime)},
        });
    }
    j["methods"] = methods;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Config

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text)
{
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    std::from_chars_result res{};
    if constexpr (std::is_floating_point_v<T>) {
        try {
            std::size_t pos = 0;
            value = std::stod(text, &pos);
            if (pos != text.size()) throw InvalidArgument("");
            return value;
        } catch (const std::exception&) {
            throw InvalidArgument("config: '" + key + "' expects a number, got '" + text + "'");
        }
    } else {
        res = std::from_chars(first, last, value);
        if (res.ec != std::errc() || res.ptr != last)
            throw InvalidArgument("config: '" + key + "' expects an integer, got '" + text + "'");
        return value;
    }
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ',')) {
        const auto b = cur.find_first_not_of(" \t");
        const auto e = cur.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw InvalidArgument("config: '" + key + "' expects a boolean, got '" + v + "'");
}

} // namespace

void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv)
{
    if (auto it = kv.find("scenario"); it != kv.end()) {
        if (it->second == "isotonic") {
            if (!std::holds_alternative<IsotonicScenario>(cfg.scenario)) cfg.scenario = IsotonicScenario{};
        } else if (it->second == "sparse") {
            if (!std::holds_alternative<SparseScenario>(cfg.scenario)) cfg.scenario = SparseScenario{};
        } else {
            throw InvalidArgument("config: unknown scenario '" + it->second + "'");
        }
    }
    auto* iso = std::get_if<IsotonicScenario>(&cfg.scenario);
    auto* sp = std::get_if<SparseScenario>(&cfg.scenario);

    for (const auto& [key, value] : kv) {
        if (key == "scenario") continue;
        if (key == "n") {
            const auto n = parse_number<Index>(key, value);
            if (iso) iso->n = n;
            else sp->n = n;
        } else if (key == "m") {
            const auto m = parse_number<Index>(key, value);
            if (iso) iso->m = m;
            else sp->m = m;
        } else if (key == "shift") {
            const double s = parse_number<double>(key, value);
            if (iso) iso->shift = s;
            else sp->shift = s;
        } else if (key == "p") {
            if (!sp) throw InvalidArgument("config: 'p' only applies to the sparse scenario");
            sp->p = parse_number<Index>(key, value);
        } else if (key == "tau") {
            if (!sp) throw InvalidArgument("config: 'tau' only applies to the sparse scenario");
            sp->tau_true = parse_number<double>(key, value);
        } else if (key == "seed") {
            cfg.seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "reps") {
            cfg.n_reps = parse_number<int>(key, value);
        } else if (key == "jobs") {
            cfg.jobs = parse_number<int>(key, value);
        } else if (key == "methods") {
            cfg.methods.clear();
            for (const std::string& name : split_list(value)) {
                const auto m = parse_method(name);
                if (!m) throw InvalidArgument("config: unknown method '" + name + "'");
                cfg.methods.push_back(*m);
            }
        } else if (key == "cv") {
            cfg.cv = parse_bool(key, value);
        } else if (key == "folds") {
            cfg.cv_folds = parse_number<int>(key, value);
        } else if (key == "k") {
            cfg.k = parse_number<Index>(key, value);
        } else if (key == "k_grid") {
            cfg.k_grid.clear();
            for (const std::string& s : split_list(value)) cfg.k_grid.push_back(parse_number<Index>(key, s));
        } else if (key == "lambda") {
            cfg.lambda = parse_number<double>(key, value);
        } else if (key == "lambda_count") {
            cfg.lambda_count = parse_number<int>(key, value);
        } else if (key == "lambda_min_ratio") {
            cfg.lambda_min_ratio = parse_number<double>(key, value);
        } else if (key == "gamma") {
            cfg.gamma = parse_number<double>(key, value);
        } else if (key == "rho") {
            cfg.rho = parse_number<double>(key, value);
        } else if (key == "max_outer") {
            cfg.fit.max_outer = parse_number<int>(key, value);
        } else if (key == "tol") {
            cfg.fit.outer_tol = parse_number<double>(key, value);
        } else if (key == "pg_max_outer") {
            cfg.pg.max_outer = parse_number<int>(key, value);
        } else {
            throw InvalidArgument("config: unknown key '" + key + "'");
        }
    }
}

} // namespace l2e
