#include "l2e/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "l2e/error.hpp"
#include "l2e/numeric.hpp"

namespace l2e {

namespace {

const double kInvTwoSqrtPi = 0.5 / std::sqrt(std::numbers::pi);
const double kSqrtTwoOverPi = std::sqrt(2.0 / std::numbers::pi);

void check_finite(double v, const char* what)
{
    if (!std::isfinite(v)) throw NumericalError(std::string(what) + ": non-finite value");
}

// Sums shared by the eta derivatives: sum w_i and sum w_i r_i^2.
struct WeightSums {
    double w = 0.0;
    double wr2 = 0.0;
};

WeightSums weight_sums(const VectorXd& r, double eta)
{
    const VectorXd w = case_weights(r, eta);
    const VectorXd wr2 = w.cwiseProduct(r.cwiseAbs2());
    return {pairwise_sum(w), pairwise_sum(wr2)};
}

} // namespace

Dataset::Dataset(VectorXd y, MatrixXd X) : y_(std::move(y)), X_(std::move(X))
{
    if (y_.size() < 1) throw InvalidArgument("Dataset: need at least one case");
    if (X_.cols() < 1) throw InvalidArgument("Dataset: need at least one predictor");
    if (X_.rows() != y_.size())
        throw InvalidArgument("Dataset: X has " + std::to_string(X_.rows()) + " rows but y has "
                              + std::to_string(y_.size()) + " entries");
    if (!y_.allFinite() || !X_.allFinite()) throw InvalidArgument("Dataset: non-finite entry");
    identity_ = X_.rows() == X_.cols() && X_.isIdentity(0.0);
}

Dataset Dataset::with_identity_design(VectorXd y)
{
    const Index n = y.size();
    return Dataset(std::move(y), MatrixXd::Identity(n, n));
}

Dataset Dataset::subset(std::span<const Index> rows) const
{
    VectorXd ys(static_cast<Index>(rows.size()));
    MatrixXd Xs(static_cast<Index>(rows.size()), p());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Index r = rows[i];
        if (r < 0 || r >= n()) throw InvalidArgument("Dataset::subset: row out of range");
        ys[static_cast<Index>(i)] = y_[r];
        Xs.row(static_cast<Index>(i)) = X_.row(r);
    }
    return Dataset(std::move(ys), std::move(Xs));
}

VectorXd fitted_values(const Dataset& data, const VectorXd& beta)
{
    if (beta.size() != data.p())
        throw InvalidArgument("beta has length " + std::to_string(beta.size()) + ", expected "
                              + std::to_string(data.p()));
    if (data.has_identity_design()) return beta;
    return data.X() * beta;
}

VectorXd residuals(const Dataset& data, const VectorXd& beta)
{
    return data.y() - fitted_values(data, beta);
}

VectorXd case_weights(const VectorXd& residuals, double eta)
{
    const double tau2 = std::exp(2.0 * eta);
    VectorXd w(residuals.size());
    for (Index i = 0; i < residuals.size(); ++i) {
        const double r = residuals[i];
        w[i] = std::max(std::exp(-0.5 * tau2 * r * r), kWeightFloor);
    }
    return w;
}

FitState make_state(const Dataset& data, VectorXd beta, double eta)
{
    FitState s;
    s.weights = case_weights(residuals(data, beta), eta);
    s.beta = std::move(beta);
    s.eta = eta;
    return s;
}

LossValue l2e_loss_from_residuals(const VectorXd& residuals, double eta)
{
    const double tau = std::exp(eta);
    const double n = static_cast<double>(residuals.size());
    const double sum_w = pairwise_sum(case_weights(residuals, eta));
    const double h = tau * kInvTwoSqrtPi - (tau / n) * kSqrtTwoOverPi * sum_w;
    check_finite(h, "l2e_loss");
    return {h};
}

LossValue l2e_loss(const Dataset& data, const VectorXd& beta, double eta)
{
    return l2e_loss_from_residuals(residuals(data, beta), eta);
}

double l2e_loss_tau(const VectorXd& residuals, double tau)
{
    return l2e_loss_from_residuals(residuals, std::log(tau)).value;
}

VectorXd grad_beta(const Dataset& data, const VectorXd& beta, double eta)
{
    const VectorXd r = residuals(data, beta);
    const double tau = std::exp(eta);
    const double n = static_cast<double>(data.n());
    const VectorXd wr = case_weights(r, eta).cwiseProduct(r);
    const double scale = -(tau * tau * tau / n) * kSqrtTwoOverPi;
    VectorXd g = data.has_identity_design() ? VectorXd(wr) : pairwise_transpose_times(data.X(), wr);
    g *= scale;
    if (!g.allFinite()) throw NumericalError("grad_beta: non-finite value");
    return g;
}

double grad_eta_from_residuals(const VectorXd& residuals, double eta)
{
    const double e1 = std::exp(eta);
    const double e3 = std::exp(3.0 * eta);
    const double n = static_cast<double>(residuals.size());
    const WeightSums s = weight_sums(residuals, eta);
    const double g = e1 * kInvTwoSqrtPi - (e1 / n) * kSqrtTwoOverPi * s.w
                     + (e3 / n) * kSqrtTwoOverPi * s.wr2;
    check_finite(g, "grad_eta");
    return g;
}

double grad_eta(const Dataset& data, const VectorXd& beta, double eta)
{
    return grad_eta_from_residuals(residuals(data, beta), eta);
}

double hess_eta_approx_from_residuals(const VectorXd& residuals, double eta)
{
    const double e1 = std::exp(eta);
    const double e3 = std::exp(3.0 * eta);
    const double n = static_cast<double>(residuals.size());
    const WeightSums s = weight_sums(residuals, eta);
    return e1 * kInvTwoSqrtPi + (4.0 * e3 / n) * kSqrtTwoOverPi * s.wr2;
}

double hess_eta_approx(const Dataset& data, const VectorXd& beta, double eta)
{
    return hess_eta_approx_from_residuals(residuals(data, beta), eta);
}

double grad_tau_from_residuals(const VectorXd& residuals, double tau)
{
    // d/dtau [tau e^{-tau^2 r^2/2}] = e^{-tau^2 r^2/2} (1 - tau^2 r^2)
    const double n = static_cast<double>(residuals.size());
    VectorXd terms(residuals.size());
    for (Index i = 0; i < residuals.size(); ++i) {
        const double tr2 = tau * tau * residuals[i] * residuals[i];
        const double e = std::exp(-0.5 * tr2);
        terms[i] = e > 0.0 ? e * (1.0 - tr2) : 0.0;
    }
    const double g = kInvTwoSqrtPi - kSqrtTwoOverPi / n * pairwise_sum(terms);
    check_finite(g, "grad_tau");
    return g;
}

double clamp_eta(double eta)
{
    return std::clamp(eta, -kEtaCap, kEtaCap);
}

} // namespace l2e
