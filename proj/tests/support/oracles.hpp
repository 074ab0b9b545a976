#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library routine it is used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "l2e/model.hpp"
#include "l2e/random.hpp"

namespace l2e::testing {

inline Eigen::VectorXd random_normal(Rng& rng, Index n, double sd = 1.0)
{
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = sd * rng.normal();
    return v;
}

inline Eigen::MatrixXd random_matrix(Rng& rng, Index n, Index p)
{
    Eigen::MatrixXd X(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) X(i, j) = rng.normal();
    return X;
}

struct Instance {
    Dataset data;
    Eigen::VectorXd beta;
    double eta;
};

/// n in [2, 50], p in [1, 10], |eta| <= 2, residuals of moderate size.
inline Instance random_instance(Rng& rng)
{
    const Index n = 2 + static_cast<Index>(rng.below(49));
    const Index p = 1 + static_cast<Index>(rng.below(10));
    Eigen::MatrixXd X = random_matrix(rng, n, p);
    Eigen::VectorXd beta = random_normal(rng, p);
    Eigen::VectorXd y = X * beta + random_normal(rng, n, 0.5 + rng.uniform());
    const double eta = -2.0 + 4.0 * rng.uniform();
    return {Dataset(std::move(y), std::move(X)), random_normal(rng, p, 0.1) + beta, eta};
}

/// h(beta, e^eta) by a plain long double loop.
inline double loss_oracle(const Dataset& d, const Eigen::VectorXd& beta, double eta)
{
    const long double tau = std::exp(static_cast<long double>(eta));
    long double s = 0.0L;
    for (Index i = 0; i < d.n(); ++i) {
        long double fit = 0.0L;
        for (Index j = 0; j < d.p(); ++j) fit += static_cast<long double>(d.X()(i, j)) * beta[j];
        const long double r = d.y()[i] - fit;
        s += std::exp(-tau * tau * r * r / 2.0L);
    }
    const long double pi = std::numbers::pi_v<long double>;
    return static_cast<double>(tau / (2.0L * std::sqrt(pi)) - tau / d.n() * std::sqrt(2.0L / pi) * s);
}

inline Eigen::VectorXd fd_grad_beta(const Dataset& d, const Eigen::VectorXd& beta, double eta)
{
    Eigen::VectorXd g(beta.size());
    for (Index j = 0; j < beta.size(); ++j) {
        const double h = 1e-6 * (1.0 + std::abs(beta[j]));
        Eigen::VectorXd up = beta, dn = beta;
        up[j] += h;
        dn[j] -= h;
        g[j] = (loss_oracle(d, up, eta) - loss_oracle(d, dn, eta)) / (2.0 * h);
    }
    return g;
}

inline double fd_grad_eta(const Dataset& d, const Eigen::VectorXd& beta, double eta)
{
    const double h = 1e-6 * (1.0 + std::abs(eta));
    return (loss_oracle(d, beta, eta + h) - loss_oracle(d, beta, eta - h)) / (2.0 * h);
}

/// Second derivative in eta as a central difference of the exact first derivative.
template <class GradEta>
double fd_hess_eta(GradEta grad, double eta)
{
    const double h = 1e-5 * (1.0 + std::abs(eta));
    return (grad(eta + h) - grad(eta - h)) / (2.0 * h);
}

inline double rel_err(double a, double b)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

/// Weighted isotonic regression by enumerating every partition of 0..n-1 into
/// consecutive blocks, fitting each block by its weighted mean and keeping the
/// cheapest monotone candidate. Exponential in n; meant for n <= 10.
inline Eigen::VectorXd isotonic_brute_force(const Eigen::VectorXd& v, const Eigen::VectorXd& w)
{
    const auto n = static_cast<int>(v.size());
    double best_cost = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best(n);
    for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
        Eigen::VectorXd cand(n);
        int start = 0;
        for (int i = 0; i < n; ++i) {
            const bool cut = i == n - 1 || (mask >> i) & 1u;
            if (!cut) continue;
            long double sw = 0.0L, swv = 0.0L;
            for (int t = start; t <= i; ++t) {
                sw += w[t];
                swv += static_cast<long double>(w[t]) * v[t];
            }
            for (int t = start; t <= i; ++t) cand[t] = static_cast<double>(swv / sw);
            start = i + 1;
        }
        bool monotone = true;
        for (int i = 0; i + 1 < n; ++i) monotone = monotone && cand[i] <= cand[i + 1];
        if (!monotone) continue;
        double cost = 0.0;
        for (int i = 0; i < n; ++i) cost += w[i] * (v[i] - cand[i]) * (v[i] - cand[i]);
        if (cost < best_cost) {
            best_cost = cost;
            best = cand;
        }
    }
    return best;
}

/// Weighted least squares through the normal equations (XᵀWX) beta = XᵀWy.
inline Eigen::VectorXd wls_normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                            const Eigen::VectorXd& w)
{
    const Eigen::MatrixXd A = X.transpose() * w.asDiagonal() * X;
    const Eigen::VectorXd b = X.transpose() * w.asDiagonal() * y;
    return A.ldlt().solve(b);
}

/// Random matrix with orthonormal columns.
inline Eigen::MatrixXd orthonormal_columns(Rng& rng, Index n, Index p)
{
    const Eigen::MatrixXd A = random_matrix(rng, n, p);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    return qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
}

inline double soft(double z, double t)
{
    return z > t ? z - t : (z < -t ? z + t : 0.0);
}

/// MCP solution for one standardized coordinate (unit curvature, gamma > 1).
inline double firm(double z, double lambda, double gamma)
{
    if (std::abs(z) > gamma * lambda) return z;
    return soft(z, lambda) / (1.0 - 1.0 / gamma);
}

/// Minimizer of h over a grid of eta values with fixed residuals.
inline double grid_search_eta(const Eigen::VectorXd& r, double lo, double hi, double step)
{
    double best_eta = lo;
    double best = std::numeric_limits<double>::infinity();
    const auto count = static_cast<long>(std::llround((hi - lo) / step));
    for (long i = 0; i <= count; ++i) {
        const double eta = lo + step * static_cast<double>(i);
        const double tau = std::exp(eta);
        double s = 0.0;
        for (Index k = 0; k < r.size(); ++k) s += std::exp(-tau * tau * r[k] * r[k] / 2.0);
        const double h = tau / (2.0 * std::sqrt(std::numbers::pi))
                         - tau / static_cast<double>(r.size()) * std::sqrt(2.0 / std::numbers::pi) * s;
        if (h < best) {
            best = h;
            best_eta = eta;
        }
    }
    return best_eta;
}

/// Largest increase between consecutive entries of a trace (<= 0 when monotone).
inline double max_increase(const std::vector<double>& trace, std::size_t from = 0, std::size_t to = SIZE_MAX)
{
    double worst = -std::numeric_limits<double>::infinity();
    to = std::min(to, trace.size());
    for (std::size_t i = from + 1; i < to; ++i) worst = std::max(worst, trace[i] - trace[i - 1]);
    return worst;
}

} // namespace l2e::testing
