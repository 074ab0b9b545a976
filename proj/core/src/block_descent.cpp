#include "l2e/block_descent.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "l2e/error.hpp"
#include "l2e/numeric.hpp"

namespace l2e {

void FitOptions::validate() const
{
    if (max_outer < 1) throw InvalidArgument("FitOptions: max_outer must be at least 1");
    if (!(outer_tol > 0.0)) throw InvalidArgument("FitOptions: outer_tol must be positive");
    if (n_beta_inner < 1) throw InvalidArgument("FitOptions: n_beta_inner must be at least 1");
    if (!(inner_tol > 0.0)) throw InvalidArgument("FitOptions: inner_tol must be positive");
    newton.validate();
}

namespace {

double mean_of(const std::vector<int>& v)
{
    if (v.empty()) return 0.0;
    return static_cast<double>(std::accumulate(v.begin(), v.end(), 0LL)) / static_cast<double>(v.size());
}

bool relative_change_below(double prev, double cur, double tol)
{
    if (!std::isfinite(prev) || !std::isfinite(cur)) return false;
    return std::abs(prev - cur) <= tol * std::max(std::abs(prev), std::numeric_limits<double>::min());
}

} // namespace

double FitReport::mean_inner_beta() const
{
    return mean_of(inner_beta_iters);
}

double FitReport::mean_inner_eta() const
{
    return mean_of(inner_eta_iters);
}

InitialValues init_default(const Dataset& data)
{
    InitialValues init;
    init.beta = data.has_identity_design() ? VectorXd(data.y()) : VectorXd(VectorXd::Zero(data.p()));
    const VectorXd& y = data.y();
    const double mad = median_absolute_deviation(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
    if (mad > 0.0) {
        init.eta = clamp_eta(-std::log(mad));
    } else {
        init.eta = 0.0;
        init.mad_warning = true;
    }
    return init;
}

double constraint_distance(const Penalty& pen, const VectorXd& beta)
{
    if (const auto* ind = std::get_if<IndicatorPenalty>(&pen)) return distance_to_set(ind->set, beta);
    if (const auto* dist = std::get_if<DistancePenalty>(&pen))
        return distance_to_set(dist->set, dist->apply_fusion(beta));
    return 0.0;
}

FitReport fit_l2e(const Dataset& data, const Penalty& pen, const FitOptions& opts)
{
    opts.validate();
    validate_penalty(pen);
    const auto start = std::chrono::steady_clock::now();

    FitReport rep;
    const InitialValues init = init_default(data);
    VectorXd beta = opts.init_beta ? *opts.init_beta : init.beta;
    if (beta.size() != data.p()) throw InvalidArgument("fit_l2e: init_beta has the wrong length");
    double eta = opts.init_eta ? clamp_eta(*opts.init_eta) : init.eta;
    if (!std::isfinite(eta)) throw InvalidArgument("fit_l2e: init_eta must be finite");
    rep.init_warning = !opts.init_eta && init.mad_warning;

    double f_prev = penalized_objective(data, beta, eta, pen);

    for (int k = 0; k < opts.max_outer; ++k) {
        const BetaUpdate bu = mm_beta_update(data, FitState{beta, eta, {}}, pen, opts.n_beta_inner, opts.inner_tol);
        beta = bu.beta;
        const VectorXd r = residuals(data, beta);
        const EtaUpdate eu = eta_update_from_residuals(r, eta, opts.newton);
        eta = eu.eta;

        const double f = l2e_loss_from_residuals(r, eta).value + penalty_value(pen, beta);
        rep.loss_trace.push_back(f);
        rep.inner_beta_iters.push_back(bu.iterations);
        rep.inner_eta_iters.push_back(eu.iterations);
        rep.outer_iters = k + 1;

        if (eu.hit_cap) {
            rep.precision_diverged = true;
            break;
        }
        if (relative_change_below(f_prev, f, opts.outer_tol)) {
            rep.converged = true;
            break;
        }
        f_prev = f;
    }

    rep.weights = case_weights(residuals(data, beta), eta);
    rep.constraint_distance = constraint_distance(pen, beta);
    rep.beta = std::move(beta);
    rep.eta = eta;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

FitReport fit_l2e_distance_path(const Dataset& data, const DistancePenalty& pen, const FitOptions& opts,
                                const RhoSchedule& schedule)
{
    if (!(schedule.rho_start > 0.0)) throw InvalidArgument("RhoSchedule: rho_start must be positive");
    if (!(schedule.growth > 1.0)) throw InvalidArgument("RhoSchedule: growth must exceed 1");
    validate_penalty(pen);
    const auto start = std::chrono::steady_clock::now();

    std::vector<double> rhos;
    for (double rho = std::min(schedule.rho_start, pen.rho); ; rho *= schedule.growth) {
        if (rho >= pen.rho) {
            rhos.push_back(pen.rho);
            break;
        }
        rhos.push_back(rho);
    }

    FitReport combined;
    combined.stage_starts.clear();
    FitOptions stage_opts = opts;
    bool first = true;
    for (std::size_t s = 0; s < rhos.size(); ++s) {
        DistancePenalty stage_pen = pen;
        stage_pen.rho = rhos[s];
        FitReport rep = fit_l2e(data, stage_pen, stage_opts);
        if (first) combined.init_warning = rep.init_warning;
        // A weak stage can let eta run to the cap; drop it and retry with the next rho.
        if (rep.precision_diverged && s + 1 < rhos.size()) continue;
        first = false;

        combined.stage_starts.push_back(static_cast<int>(combined.loss_trace.size()));
        combined.loss_trace.insert(combined.loss_trace.end(), rep.loss_trace.begin(), rep.loss_trace.end());
        combined.inner_beta_iters.insert(combined.inner_beta_iters.end(), rep.inner_beta_iters.begin(),
                                         rep.inner_beta_iters.end());
        combined.inner_eta_iters.insert(combined.inner_eta_iters.end(), rep.inner_eta_iters.begin(),
                                        rep.inner_eta_iters.end());
        combined.outer_iters += rep.outer_iters;
        combined.converged = rep.converged;
        combined.precision_diverged = rep.precision_diverged;
        combined.beta = rep.beta;
        combined.eta = rep.eta;
        combined.weights = rep.weights;
        combined.constraint_distance = rep.constraint_distance;
        if (rep.precision_diverged) break;

        stage_opts.init_beta = rep.beta;
        stage_opts.init_eta = rep.eta;
    }
    combined.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return combined;
}

FitReport fit_l2e_auto(const Dataset& data, const Penalty& pen, const FitOptions& opts, const RhoSchedule& schedule)
{
    if (const auto* dist = std::get_if<DistancePenalty>(&pen)) return fit_l2e_distance_path(data, *dist, opts, schedule);
    return fit_l2e(data, pen, opts);
}

} // namespace l2e
