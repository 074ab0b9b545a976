#pragma once

#include <optional>

#include "l2e/block_descent.hpp"

namespace l2e {

/// Proximal gradient block descent on (beta, tau) with tau boxed to [tau_min, tau_max].
/// Each beta search starts at the Lipschitz step 1 / ((tau^3/n) sqrt(2/pi) ||X||_2^2)
/// for the current tau and halves on failure; each tau search starts at tau_step.
/// This is the comparison baseline; only none, lasso and isotonic-indicator penalties
/// are accepted.
struct PgOptions {
    std::optional<double> tau_min; ///< default 1e-3 * tau0
    std::optional<double> tau_max; ///< default 1e3 * tau0
    int max_outer = 1000;
    int n_beta_inner = 100;
    int n_tau_inner = 100;
    double shrink = 0.5;
    double sufficient_decrease = 1e-4;
    int max_backtracks = 60;
    double tau_step = 1.0; ///< first trial step of every tau search
    double outer_tol = 1e-8;
    double inner_tol = 1e-8; ///< relative objective change ending the beta inner loop
    double grad_tol = 1e-10; ///< tau inner loop ends when |tau * dh/dtau| falls below this
    std::optional<VectorXd> init_beta;
    std::optional<double> init_tau;

    void validate() const;
};

/// Per-iteration bookkeeping exposed for tests of the line search.
struct PgStepRecord {
    double step = 0.0;
    double f_before = 0.0;
    double f_after = 0.0;
    double move_sq = 0.0; ///< ||beta+ - beta||^2 or (tau+ - tau)^2
};

struct PgTrace {
    std::vector<PgStepRecord> beta_steps;
    std::vector<PgStepRecord> tau_steps;
    std::vector<double> taus;
};

/// Same report shape as fit_l2e. `trace`, when given, receives every accepted step.
FitReport fit_pg(const Dataset& data, const Penalty& pen, const PgOptions& opts = {}, PgTrace* trace = nullptr);

/// prox_{s phi}(v) for the penalties fit_pg supports.
VectorXd pg_prox(const Penalty& pen, const VectorXd& v, double step);

} // namespace l2e
