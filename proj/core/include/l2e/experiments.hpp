#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "l2e/block_descent.hpp"
#include "l2e/pg.hpp"

namespace l2e {

/// Cubic signal on an even grid over [-2.5, 2.5] with a block of m shifted responses.
struct IsotonicScenario {
    Index n = 1000;
    Index m = 0;
    double shift = 14.0;
    std::uint64_t seed = 0;

    void validate() const;
    /// 0-based index of the first outlier: 250 when n = 1000, scaled proportionally
    /// otherwise and pulled back so the block fits.
    Index outlier_start() const;
};

/// Gaussian design, beta = (1,1,1,1,1,0,...), noise sd 1/tau_true, the first m
/// responses and design rows shifted by `shift`.
struct SparseScenario {
    Index n = 200;
    Index p = 50;
    Index m = 20;
    double shift = 5.0;
    double tau_true = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

using Scenario = std::variant<IsotonicScenario, SparseScenario>;

struct GeneratedData {
    Dataset data;
    VectorXd truth;
};

GeneratedData gen_isotonic(const IsotonicScenario& sc);
GeneratedData gen_sparse(const SparseScenario& sc);

inline constexpr double kSupportTol = 1e-6;

struct Metrics {
    double mse = 0.0;
    double relative_error = 0.0;
    bool relative_error_defined = true; ///< false when ||truth|| = 0; relative_error is NaN then
    double f1 = 0.0;
    Index true_positives = 0;
    Index false_positives = 0;
    Index false_negatives = 0;
};

Metrics compute_metrics(const VectorXd& beta_hat, const VectorXd& truth, double support_tol = kSupportTol);

// ---------------------------------------------------------------------------
// Cross-validation

/// Fits one penalty on one dataset. The default is fit_l2e_auto with default options.
using Fitter = std::function<FitReport(const Dataset&, const Penalty&)>;

/// Fold label in [0, folds) for each case: a seeded Fisher-Yates permutation dealt
/// round-robin, so fold sizes differ by at most one.
std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed);

/// True when `a` penalizes more than `b` (larger lambda, or smaller k).
bool more_penalized(const Penalty& a, const Penalty& b);

struct CvResult {
    std::size_t best_index = 0;
    Penalty best;
    std::vector<double> scores; ///< mean held-out L2E loss per grid entry
};

/// K-fold selection. Each candidate is fit on every training split; the score is
/// the L2E loss of the held-out cases at the trained (beta, eta). Ties (within
/// 1e-12 relative) go to the more penalized candidate.
CvResult cross_validate(const Dataset& data, const std::vector<Penalty>& grid, int folds, std::uint64_t seed,
                        const Fitter& fitter = {});

/// ||grad_beta h(beta0, eta0)||_inf at the default start: the smallest lambda for
/// which beta = 0 is a fixed point of the first lasso MM step.
double lambda_max(const Dataset& data);

std::vector<Penalty> lasso_grid(const Dataset& data, int count, double min_ratio);
std::vector<Penalty> mcp_grid(const Dataset& data, int count, double min_ratio, double gamma);
std::vector<Penalty> distance_sparse_grid(const std::vector<Index>& ks, double rho);

// ---------------------------------------------------------------------------
// Replicate runner

enum class Method { mm, pg, ls, lasso, mcp, distance };

std::string method_name(Method m);
std::optional<Method> parse_method(const std::string& name);
bool method_applies(Method m, const Scenario& sc);

struct ExperimentConfig {
    Scenario scenario = IsotonicScenario{};
    std::vector<Method> methods;
    int n_reps = 20;
    std::uint64_t seed = 0;
    int jobs = 1;

    bool cv = false;
    int cv_folds = 5;
    std::vector<Index> k_grid{3, 5, 7, 9, 11, 13, 15};
    int lambda_count = 10;
    double lambda_min_ratio = 0.01;

    // Used when cv is off.
    std::optional<double> lambda; ///< default 0.1 * lambda_max
    double gamma = 3.0;
    Index k = 5;
    double rho = 1e8;

    FitOptions fit;
    PgOptions pg;
    RhoSchedule rho_schedule;

    void validate() const;
};

struct ReplicateResult {
    int rep = 0;
    Method method = Method::mm;
    std::uint64_t seed = 0;
    Metrics metrics;
    int outer_iters = 0;
    double mean_inner_beta = 0.0;
    double mean_inner_eta = 0.0;
    bool converged = false;
    double runtime = 0.0; ///< seconds; excluded from the deterministic CSV
    std::string selected;  ///< penalty actually fit
    std::string error;     ///< nonempty if the replicate failed

    bool ok() const { return error.empty(); }
};

struct MethodSummary {
    Method method = Method::mm;
    int completed = 0;
    int failed = 0;
    double mean_mse = 0.0, median_mse = 0.0;
    double mean_relative_error = 0.0, median_relative_error = 0.0;
    double mean_f1 = 0.0, median_f1 = 0.0;
    double mean_tp = 0.0, mean_fp = 0.0;
    double mean_outer_iters = 0.0;
    double mean_inner_beta = 0.0;
    double mean_inner_eta = 0.0;
    double mean_runtime = 0.0, median_runtime = 0.0;
};

struct ExperimentSummary {
    std::vector<ReplicateResult> replicates; ///< method-major, then replicate
    std::vector<MethodSummary> methods;      ///< canonical method order

    const MethodSummary& of(Method m) const;
};

/// Runs every method on n_reps datasets. Replicate r uses seed mix_seed(seed, r);
/// methods are deduplicated and put in canonical order. Results are identical for
/// any `jobs` value.
ExperimentSummary run_replicates(const ExperimentConfig& cfg);

/// Runs one method on one generated dataset.
ReplicateResult run_method(const ExperimentConfig& cfg, Method method, const GeneratedData& gen, int rep,
                           std::uint64_t rep_seed);

MethodSummary summarize(Method m, const std::vector<ReplicateResult>& rows);

// ---------------------------------------------------------------------------
// Serialization

/// One row per (method, replicate); no timing columns, so output is reproducible.
void write_replicates_csv(std::ostream& os, const ExperimentSummary& s);
/// method, rep, runtime_seconds.
void write_timing_csv(std::ostream& os, const ExperimentSummary& s);
/// method, rep, outer_iters, mean_inner_beta, mean_inner_eta, runtime_seconds.
void write_bench_csv(std::ostream& os, const ExperimentSummary& s);
std::string summary_to_json(const ExperimentSummary& s, const ExperimentConfig& cfg);

/// Applies key = value settings (n, m, shift, p, tau, seed, reps, jobs, methods,
/// cv, folds, k, k_grid, lambda, gamma, rho, max_outer, tol, ...). Unknown keys throw.
void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);

} // namespace l2e
