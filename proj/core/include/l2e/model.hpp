#pragma once

#include <span>

#include <Eigen/Dense>

namespace l2e {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Index = Eigen::Index;

/// |eta| never exceeds this; e^{5 * 50} is still comfortably finite.
inline constexpr double kEtaCap = 50.0;

/// Lower clamp applied to every case weight.
inline constexpr double kWeightFloor = 1e-300;

/// Responses y (length n) and design X (n x p). All entries finite.
class Dataset {
public:
    Dataset(VectorXd y, MatrixXd X);

    /// y with X = I_n. Residual and weighting kernels take an O(n) path.
    static Dataset with_identity_design(VectorXd y);

    const VectorXd& y() const noexcept { return y_; }
    const MatrixXd& X() const noexcept { return X_; }
    Index n() const noexcept { return y_.size(); }
    Index p() const noexcept { return X_.cols(); }
    bool has_identity_design() const noexcept { return identity_; }

    /// Rows selected by `rows`, in the given order.
    Dataset subset(std::span<const Index> rows) const;

private:
    VectorXd y_;
    MatrixXd X_;
    bool identity_ = false;
};

/// Coefficients, log-precision (tau = e^eta), and the case weights at (beta, eta).
struct FitState {
    VectorXd beta;
    double eta = 0.0;
    VectorXd weights;

    double tau() const { return std::exp(eta); }
};

struct LossValue {
    double value = 0.0;
};

/// X beta, using the identity shortcut when available.
VectorXd fitted_values(const Dataset& data, const VectorXd& beta);

/// r_i = y_i - x_i^T beta.
VectorXd residuals(const Dataset& data, const VectorXd& beta);

/// w_i = exp(-e^{2 eta} r_i^2 / 2), clamped below at kWeightFloor.
VectorXd case_weights(const VectorXd& residuals, double eta);

/// FitState at (beta, eta) with weights recomputed.
FitState make_state(const Dataset& data, VectorXd beta, double eta);

/// h = tau/(2 sqrt(pi)) - (tau/n) sqrt(2/pi) sum_i exp(-tau^2 r_i^2 / 2), tau = e^eta.
LossValue l2e_loss(const Dataset& data, const VectorXd& beta, double eta);
LossValue l2e_loss_from_residuals(const VectorXd& residuals, double eta);

/// Gradient of h in beta: -(tau^3/n) sqrt(2/pi) sum_i w_i r_i x_i.
VectorXd grad_beta(const Dataset& data, const VectorXd& beta, double eta);

/// dh/deta.
double grad_eta(const Dataset& data, const VectorXd& beta, double eta);
double grad_eta_from_residuals(const VectorXd& residuals, double eta);

/// Positive part of d^2h/deta^2: e^eta/(2 sqrt(pi)) + (4 e^{3 eta}/n) sqrt(2/pi) sum_i w_i r_i^2.
/// Never smaller than the exact second derivative.
double hess_eta_approx(const Dataset& data, const VectorXd& beta, double eta);
double hess_eta_approx_from_residuals(const VectorXd& residuals, double eta);

/// dh/dtau in the original parameterization (used by the proximal gradient baseline).
double grad_tau_from_residuals(const VectorXd& residuals, double tau);

/// h evaluated directly in tau.
double l2e_loss_tau(const VectorXd& residuals, double tau);

/// Clamp to [-kEtaCap, kEtaCap].
double clamp_eta(double eta);

} // namespace l2e
