#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "l2e/model.hpp"
#include "l2e/projections.hpp"

namespace l2e {

struct NoPenalty {};

struct LassoPenalty {
    double lambda = 0.0;
};

struct McpPenalty {
    double lambda = 0.0;
    double gamma = 3.0;
};

/// 0/inf indicator of a constraint set.
struct IndicatorPenalty {
    ConstraintSet set;
};

/// (rho/2) dist(D beta, C)^2. An empty `fusion` means D = I.
struct DistancePenalty {
    double rho = 1e8;
    std::optional<FusionMatrix> fusion;
    ConstraintSet set;

    VectorXd apply_fusion(const VectorXd& beta) const
    {
        return fusion ? fusion->apply(beta) : beta;
    }
};

/// Penalty phi(beta). Lambda and rho are on the scale of the L2E loss h, so the
/// penalized objective h + phi is the quantity every solver descends on.
using Penalty = std::variant<NoPenalty, LassoPenalty, McpPenalty, IndicatorPenalty, DistancePenalty>;

void validate_penalty(const Penalty& pen);
std::string describe_penalty(const Penalty& pen);

/// phi(beta); +inf for an indicator at an infeasible point.
double penalty_value(const Penalty& pen, const VectorXd& beta);

/// h(beta, e^eta) + phi(beta).
double penalized_objective(const Dataset& data, const VectorXd& beta, double eta, const Penalty& pen);

/// Quadratic g(r) = offset + curvature * r^2 lying above f(r) = -exp(-a r^2) and
/// touching it at r = +-rk. The MM weights are its curvatures divided by a.
struct QuadraticMajorizer {
    double offset = 0.0;
    double curvature = 0.0;

    double operator()(double r) const { return offset + curvature * r * r; }
};

/// Sharp majorizer at anchor rk for a > 0: curvature a exp(-a rk^2).
QuadraticMajorizer sharp_majorizer(double rk, double a);

/// (tau^3 / n) sqrt(2/pi): the factor between the weighted least squares surrogate
/// and the L2E loss. Penalties are divided by it before the surrogate solve.
double surrogate_scale(Index n, double eta);

/// y~ = sqrt(W) y, X~ = sqrt(W) X. For identity designs X~ = diag(sqrt_w) is
/// left unmaterialized and `diagonal` is set.
struct WeightedSystem {
    VectorXd y_tilde;
    MatrixXd X_tilde;
    VectorXd sqrt_w;
    bool diagonal = false;

    Index rows() const { return y_tilde.size(); }
    Index cols() const { return diagonal ? sqrt_w.size() : X_tilde.cols(); }
    MatrixXd design() const;
    /// 0.5 ||y~ - X~ beta||^2
    double surrogate(const VectorXd& beta) const;
};

WeightedSystem build_weighted_system(const Dataset& data, const VectorXd& weights);

struct CoordinateDescentOptions {
    int max_sweeps = 10000;
    double tol = 1e-8;
};

/// Minimizes 0.5||y~ - X~ beta||^2; minimum-norm solution when rank deficient.
VectorXd solve_wls(const WeightedSystem& sys);

/// Cyclic coordinate descent for 0.5||y~ - X~ beta||^2 + lambda ||beta||_1.
VectorXd solve_wls_lasso(const WeightedSystem& sys, double lambda,
                         const std::optional<VectorXd>& warm_start = std::nullopt,
                         const CoordinateDescentOptions& opts = {});

/// Cyclic coordinate descent for 0.5||y~ - X~ beta||^2 + MCP(beta; lambda, gamma).
VectorXd solve_wls_mcp(const WeightedSystem& sys, double lambda, double gamma,
                       const std::optional<VectorXd>& warm_start = std::nullopt,
                       const CoordinateDescentOptions& opts = {});

/// Exact minimizer over `set`. Non-whole-space sets need a diagonal X~.
VectorXd solve_wls_indicator(const WeightedSystem& sys, const ConstraintSet& set);

/// Stacked least squares [y~; sqrt(rho) P_C(D beta_prev)] against [X~; sqrt(rho) D],
/// with rho taken as given (surrogate scale).
VectorXd solve_wls_distance(const WeightedSystem& sys, const DistancePenalty& pen,
                            const VectorXd& beta_prev);

/// Largest |x~_j^T (y~ - X~ beta) - s_j| over coordinates, where s_j is the
/// (sub)gradient of the penalty chosen closest to optimal. Zero at an exact solution.
double lasso_kkt_violation(const WeightedSystem& sys, const VectorXd& beta, double lambda);
double mcp_kkt_violation(const WeightedSystem& sys, const VectorXd& beta, double lambda, double gamma);

struct BetaUpdate {
    VectorXd beta;
    int iterations = 0;
    bool converged = false;
    bool stalled = false;                ///< a step was rejected for raising the objective
    std::vector<double> objective_trace; ///< penalized objective after each inner step
};

inline constexpr int kDefaultInnerIterations = 100;
inline constexpr double kDefaultInnerTol = 1e-8;

/// MM inner loop on beta at fixed eta: reweight, build the surrogate, solve, until
/// the relative change of h + phi drops below `tol` or `max_inner` steps run.
/// A step that would raise h + phi in floating point is discarded and ends the loop.
BetaUpdate mm_beta_update(const Dataset& data, const FitState& state, const Penalty& pen,
                          int max_inner = kDefaultInnerIterations, double tol = kDefaultInnerTol);

/// One surrogate minimization at the given weights, penalty already in surrogate units.
VectorXd solve_surrogate(const WeightedSystem& sys, const Penalty& scaled_pen, const VectorXd& beta_prev);

/// Penalty rescaled by 1/c for the surrogate solve.
Penalty scale_penalty(const Penalty& pen, double c);

} // namespace l2e
