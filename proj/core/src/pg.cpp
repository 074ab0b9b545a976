#include "l2e/pg.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "l2e/error.hpp"

namespace l2e {

void PgOptions::validate() const
{
    if (tau_min && !(*tau_min > 0.0)) throw InvalidArgument("PgOptions: tau_min must be positive");
    if (tau_max && !(*tau_max > 0.0)) throw InvalidArgument("PgOptions: tau_max must be positive");
    if (tau_min && tau_max && *tau_min > *tau_max) throw InvalidArgument("PgOptions: tau_min exceeds tau_max");
    if (max_outer < 1 || n_beta_inner < 1 || n_tau_inner < 1)
        throw InvalidArgument("PgOptions: iteration caps must be at least 1");
    if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidArgument("PgOptions: shrink must be in (0, 1)");
    if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0))
        throw InvalidArgument("PgOptions: sufficient_decrease must be in (0, 1)");
    if (!(outer_tol > 0.0) || !(inner_tol > 0.0)) throw InvalidArgument("PgOptions: tolerances must be positive");
    if (!(tau_step > 0.0)) throw InvalidArgument("PgOptions: tau_step must be positive");
    if (!(grad_tol >= 0.0)) throw InvalidArgument("PgOptions: grad_tol must be nonnegative");
}

namespace {

bool pg_supported(const Penalty& pen)
{
    if (std::holds_alternative<NoPenalty>(pen) || std::holds_alternative<LassoPenalty>(pen)) return true;
    if (const auto* ind = std::get_if<IndicatorPenalty>(&pen)) return ind->set.kind == SetKind::isotonic;
    return false;
}

double spectral_norm_sq(const MatrixXd& X)
{
    const Eigen::SelfAdjointEigenSolver<MatrixXd> es(X.transpose() * X, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

bool small_change(double prev, double cur, double tol)
{
    return std::abs(prev - cur) <= tol * std::max(std::abs(prev), std::numeric_limits<double>::min());
}

} // namespace

VectorXd pg_prox(const Penalty& pen, const VectorXd& v, double step)
{
    if (std::holds_alternative<NoPenalty>(pen)) return v;
    if (const auto* lasso = std::get_if<LassoPenalty>(&pen)) {
        const double t = step * lasso->lambda;
        return v.unaryExpr([t](double x) { return x > t ? x - t : (x < -t ? x + t : 0.0); });
    }
    if (const auto* ind = std::get_if<IndicatorPenalty>(&pen)) {
        if (ind->set.kind == SetKind::isotonic) return project_isotonic(v);
    }
    throw InvalidArgument("fit_pg: unsupported penalty " + describe_penalty(pen));
}

FitReport fit_pg(const Dataset& data, const Penalty& pen, const PgOptions& opts, PgTrace* trace)
{
    opts.validate();
    validate_penalty(pen);
    if (!pg_supported(pen)) throw InvalidArgument("fit_pg: unsupported penalty " + describe_penalty(pen));
    if (const auto* ind = std::get_if<IndicatorPenalty>(&pen); ind && !data.has_identity_design())
        throw InvalidArgument("fit_pg: the isotonic indicator baseline needs an identity design");
    const auto start = std::chrono::steady_clock::now();

    FitReport rep;
    const InitialValues init = init_default(data);
    VectorXd beta = opts.init_beta ? *opts.init_beta : init.beta;
    if (beta.size() != data.p()) throw InvalidArgument("fit_pg: init_beta has the wrong length");
    double tau = opts.init_tau ? *opts.init_tau : std::exp(init.eta);
    rep.init_warning = !opts.init_tau && init.mad_warning;
    const double tau_min = opts.tau_min.value_or(1e-3 * tau);
    const double tau_max = opts.tau_max.value_or(1e3 * tau);
    if (tau_min > tau_max) throw InvalidArgument("fit_pg: tau_min exceeds tau_max");
    tau = std::clamp(tau, tau_min, tau_max);
    if (trace) trace->taus.push_back(tau);

    const double sigma = opts.sufficient_decrease;
    auto objective = [&](const VectorXd& b, double t) {
        return l2e_loss_tau(residuals(data, b), t) + penalty_value(pen, b);
    };

    // grad_beta is (tau^3/n) sqrt(2/pi) ||X||_2^2 Lipschitz; every beta search starts there.
    const double x_norm2 = data.has_identity_design() ? 1.0 : spectral_norm_sq(data.X());

    double f_prev = objective(beta, tau);
    double f = f_prev;
    for (int k = 0; k < opts.max_outer; ++k) {
        int beta_iters = 0;
        f = objective(beta, tau);
        for (int i = 0; i < opts.n_beta_inner; ++i) {
            const VectorXd g = grad_beta(data, beta, std::log(tau));
            double s = 1.0 / (surrogate_scale(data.n(), std::log(tau)) * x_norm2);
            bool accepted = false;
            VectorXd cand;
            double f_cand = f;
            for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
                cand = pg_prox(pen, beta - s * g, s);
                f_cand = objective(cand, tau);
                const double move_sq = (cand - beta).squaredNorm();
                if (std::isfinite(f_cand) && f_cand <= f - sigma / (2.0 * s) * move_sq) {
                    accepted = true;
                    if (trace) trace->beta_steps.push_back({s, f, f_cand, move_sq});
                    break;
                }
                s *= opts.shrink;
            }
            if (!accepted) break;
            ++beta_iters;
            const bool done = small_change(f, f_cand, opts.inner_tol) || cand == beta;
            beta = std::move(cand);
            f = f_cand;
            if (done) break;
        }

        int tau_iters = 0;
        VectorXd r = residuals(data, beta);
        double h = l2e_loss_tau(r, tau);
        for (int i = 0; i < opts.n_tau_inner; ++i) {
            const double g = grad_tau_from_residuals(r, tau);
            // Same stopping rule as the Newton update: |dh/d eta| = tau |dh/d tau|.
            if (std::abs(tau * g) < opts.grad_tol) break;
            if ((tau == tau_min && g > 0.0) || (tau == tau_max && g < 0.0)) break;
            double s = opts.tau_step;
            bool accepted = false;
            double cand = tau;
            double h_cand = h;
            for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
                cand = std::clamp(tau - s * g, tau_min, tau_max);
                if (cand == tau) break;
                h_cand = l2e_loss_tau(r, cand);
                const double move_sq = (cand - tau) * (cand - tau);
                if (h_cand <= h - sigma / (2.0 * s) * move_sq) {
                    accepted = true;
                    if (trace) trace->tau_steps.push_back({s, h, h_cand, move_sq});
                    break;
                }
                s *= opts.shrink;
            }
            if (!accepted) break;
            ++tau_iters;
            tau = cand;
            h = h_cand;
            if (trace) trace->taus.push_back(tau);
        }

        f = h + penalty_value(pen, beta);
        rep.loss_trace.push_back(f);
        rep.inner_beta_iters.push_back(beta_iters);
        rep.inner_eta_iters.push_back(tau_iters);
        rep.outer_iters = k + 1;
        if (std::isfinite(f_prev) && small_change(f_prev, f, opts.outer_tol)) {
            rep.converged = true;
            break;
        }
        f_prev = f;
    }

    rep.eta = std::log(tau);
    rep.weights = case_weights(residuals(data, beta), rep.eta);
    rep.constraint_distance = constraint_distance(pen, beta);
    rep.beta = std::move(beta);
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

} // namespace l2e
