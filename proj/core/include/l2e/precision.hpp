#pragma once

#include "l2e/model.hpp"

namespace l2e {

struct NewtonOptions {
    int max_inner = 100;       ///< N_eta
    double armijo_sigma = 1e-4;
    double shrink = 0.5;
    int max_backtracks = 30;
    double grad_tol = 1e-10;

    void validate() const;
};

struct EtaUpdate {
    double eta = 0.0;
    int iterations = 0;        ///< accepted Newton steps
    int backtracks = 0;        ///< step halvings over all iterations
    int unit_steps = 0;        ///< steps accepted at t = 1
    bool hit_cap = false;      ///< stopped at +/- kEtaCap
    bool armijo_failed = false;
    bool gradient_converged = false;
};

/// Modified Newton on eta at fixed beta: step -t g/d with d the positive-part
/// curvature, t from Armijo backtracking starting at 1.
EtaUpdate eta_update(const Dataset& data, const VectorXd& beta, double eta0, const NewtonOptions& opts = {});

/// Same iteration with the residuals already in hand.
EtaUpdate eta_update_from_residuals(const VectorXd& residuals, double eta0, const NewtonOptions& opts = {});

} // namespace l2e
