#include "l2e/precision.hpp"

#include <cmath>

#include "l2e/error.hpp"

namespace l2e {

void NewtonOptions::validate() const
{
    if (max_inner < 1) throw InvalidArgument("NewtonOptions: max_inner must be at least 1");
    if (!(armijo_sigma > 0.0 && armijo_sigma < 1.0)) throw InvalidArgument("NewtonOptions: armijo_sigma must be in (0, 1)");
    if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidArgument("NewtonOptions: shrink must be in (0, 1)");
    if (max_backtracks < 0) throw InvalidArgument("NewtonOptions: max_backtracks must be nonnegative");
    if (!(grad_tol >= 0.0)) throw InvalidArgument("NewtonOptions: grad_tol must be nonnegative");
}

EtaUpdate eta_update_from_residuals(const VectorXd& r, double eta0, const NewtonOptions& opts)
{
    opts.validate();
    if (!std::isfinite(eta0)) throw InvalidArgument("eta_update: eta0 must be finite");

    EtaUpdate out;
    double eta = clamp_eta(eta0);
    double h = l2e_loss_from_residuals(r, eta).value;

    for (int it = 0; it < opts.max_inner; ++it) {
        const double g = grad_eta_from_residuals(r, eta);
        if (std::abs(g) < opts.grad_tol) {
            out.gradient_converged = true;
            break;
        }
        const double d = hess_eta_approx_from_residuals(r, eta);
        const double step = -g / d;

        double t = 1.0;
        bool accepted = false;
        double eta_new = eta;
        double h_new = h;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
            eta_new = clamp_eta(eta + t * step);
            // Armijo on the realized displacement, which differs from t*step at the cap.
            const double moved = eta_new - eta;
            if (moved == 0.0) break;
            h_new = l2e_loss_from_residuals(r, eta_new).value;
            if (h_new <= h + opts.armijo_sigma * g * moved) {
                accepted = true;
                if (bt == 0) ++out.unit_steps;
                break;
            }
            ++out.backtracks;
            t *= opts.shrink;
        }
        if (!accepted) {
            if (std::abs(eta) >= kEtaCap) out.hit_cap = true;
            else out.armijo_failed = true;
            break;
        }
        eta = eta_new;
        h = h_new;
        ++out.iterations;
        if (std::abs(eta) >= kEtaCap) {
            out.hit_cap = true;
            break;
        }
    }
    out.eta = eta;
    return out;
}

EtaUpdate eta_update(const Dataset& data, const VectorXd& beta, double eta0, const NewtonOptions& opts)
{
    return eta_update_from_residuals(residuals(data, beta), eta0, opts);
}

} // namespace l2e
