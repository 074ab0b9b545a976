#pragma once

#include <optional>
#include <vector>

#include "l2e/majorize.hpp"
#include "l2e/model.hpp"
#include "l2e/precision.hpp"

namespace l2e {

struct FitOptions {
    int max_outer = 100;
    double outer_tol = 1e-8;
    int n_beta_inner = kDefaultInnerIterations; ///< N_beta
    double inner_tol = kDefaultInnerTol;
    NewtonOptions newton;                        ///< newton.max_inner is N_eta
    std::optional<VectorXd> init_beta;
    std::optional<double> init_eta;

    void validate() const;
};

struct FitReport {
    VectorXd beta;
    double eta = 0.0;
    VectorXd weights;                 ///< recomputed at the final (beta, eta)
    std::vector<double> loss_trace;   ///< penalized objective after each outer iteration
    int outer_iters = 0;
    std::vector<int> inner_beta_iters;
    std::vector<int> inner_eta_iters;
    bool converged = false;
    bool precision_diverged = false;
    bool init_warning = false;        ///< MAD(y) was zero; eta0 fell back to 0
    double constraint_distance = 0.0; ///< dist(D beta, C) for set-based penalties
    std::vector<int> stage_starts{0}; ///< loss_trace offsets where each rho stage begins
    double wall_time = 0.0;           ///< seconds

    double tau() const { return std::exp(eta); }
    double mean_inner_beta() const;
    double mean_inner_eta() const;
};

struct InitialValues {
    VectorXd beta;
    double eta = 0.0;
    bool mad_warning = false;
};

/// beta0 = y for identity designs, 0 otherwise; eta0 = -log MAD(y).
InitialValues init_default(const Dataset& data);

/// Block descent: MM on beta (eta fixed), then modified Newton on eta (beta fixed),
/// until the relative change in the penalized objective drops below outer_tol.
FitReport fit_l2e(const Dataset& data, const Penalty& pen, const FitOptions& opts = {});

/// rho schedule for distance penalties: rho_start, rho_start*growth, ... capped at the
/// penalty's own rho. Each stage is a full fit_l2e warm-started from the last kept
/// stage. A stage other than the final one that ends with precision_diverged is dropped.
struct RhoSchedule {
    double rho_start = 0.1;
    double growth = 10.0;
};

FitReport fit_l2e_distance_path(const Dataset& data, const DistancePenalty& pen, const FitOptions& opts = {},
                                const RhoSchedule& schedule = {});

/// fit_l2e, except distance penalties go through fit_l2e_distance_path.
FitReport fit_l2e_auto(const Dataset& data, const Penalty& pen, const FitOptions& opts = {},
                       const RhoSchedule& schedule = {});

/// dist(D beta, C) for indicator and distance penalties, 0 otherwise.
double constraint_distance(const Penalty& pen, const VectorXd& beta);

} // namespace l2e
