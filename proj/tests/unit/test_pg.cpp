#include "doctest.h"

#include <algorithm>

#include "l2e/block_descent.hpp"
#include "l2e/error.hpp"
#include "l2e/pg.hpp"
#include "oracles.hpp"

using namespace l2e;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> xs)
{
    VectorXd v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

Dataset isotonic_data(std::uint64_t seed, Index n, Index m, double shift)
{
    Rng rng(seed);
    VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
        const double x = -2.5 + 5.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        y[i] = x * x * x + rng.normal() + (i >= n / 4 && i < n / 4 + m ? shift : 0.0);
    }
    return Dataset::with_identity_design(y);
}

} // namespace

TEST_SUITE("pg")
{
    TEST_CASE("unsupported configurations")
    {
        const Dataset d(vec({1, 2, 3}), MatrixXd::Ones(3, 1));
        CHECK_THROWS_AS(fit_pg(d, McpPenalty{0.1, 3.0}), InvalidArgument);
        CHECK_THROWS_AS(fit_pg(d, DistancePenalty{1.0, std::nullopt, ConstraintSet::sparse(1)}), InvalidArgument);
        CHECK_THROWS_AS(fit_pg(d, IndicatorPenalty{ConstraintSet::nonnegative()}), InvalidArgument);
        CHECK_THROWS_AS(fit_pg(d, IndicatorPenalty{ConstraintSet::isotonic()}), InvalidArgument);
        CHECK_THROWS_AS(pg_prox(McpPenalty{0.1, 3.0}, vec({1}), 1.0), InvalidArgument);

        PgOptions bad;
        bad.tau_min = 2.0;
        bad.tau_max = 1.0;
        CHECK_THROWS_AS(fit_pg(d, NoPenalty{}, bad), InvalidArgument);
        bad = {};
        bad.tau_min = 0.0;
        CHECK_THROWS_AS(fit_pg(d, NoPenalty{}, bad), InvalidArgument);
        bad = {};
        bad.max_outer = 0;
        CHECK_THROWS_AS(fit_pg(d, NoPenalty{}, bad), InvalidArgument);
        bad = {};
        bad.tau_step = 0.0;
        CHECK_THROWS_AS(fit_pg(d, NoPenalty{}, bad), InvalidArgument);
        bad = {};
        bad.shrink = 1.0;
        CHECK_THROWS_AS(fit_pg(d, NoPenalty{}, bad), InvalidArgument);
    }

    TEST_CASE("prox operators")
    {
        CHECK(pg_prox(NoPenalty{}, vec({1, -2}), 0.5) == vec({1, -2}));
        CHECK(pg_prox(LassoPenalty{2.0}, vec({3, -0.5, -4}), 0.5) == vec({2, 0, -3}));
        CHECK(pg_prox(IndicatorPenalty{ConstraintSet::isotonic()}, vec({3, 1, 2}), 7.0) == vec({2, 2, 2}));
    }

    TEST_CASE("loss trace is non-increasing")
    {
        Rng rng(51);
        for (int t = 0; t < 60; ++t) {
            const testing::Instance inst = testing::random_instance(rng);
            const double lmax =
                grad_beta(inst.data, VectorXd::Zero(inst.data.p()), inst.eta).lpNorm<Eigen::Infinity>();
            const Penalty pen = t % 2 == 0 ? Penalty{NoPenalty{}} : Penalty{LassoPenalty{0.1 * lmax}};
            PgOptions opts;
            opts.max_outer = 200;
            const FitReport rep = fit_pg(inst.data, pen, opts);
            const double tol = 1e-10 * std::max(1.0, std::abs(rep.loss_trace.front()));
            CHECK(testing::max_increase(rep.loss_trace) <= tol);
        }
    }

    TEST_CASE("tau stays in the box and steps satisfy sufficient decrease")
    {
        Rng rng(52);
        for (int t = 0; t < 30; ++t) {
            const testing::Instance inst = testing::random_instance(rng);
            PgOptions opts;
            opts.max_outer = 100;
            opts.tau_min = 0.5;
            opts.tau_max = 2.0;
            PgTrace trace;
            const FitReport rep = fit_pg(inst.data, NoPenalty{}, opts, &trace);
            for (double tau : trace.taus) {
                CHECK(tau >= 0.5);
                CHECK(tau <= 2.0);
            }
            CHECK(rep.tau() >= 0.5 * (1.0 - 1e-12));
            CHECK(rep.tau() <= 2.0 * (1.0 + 1e-12));
            for (const PgStepRecord& s : trace.beta_steps)
                CHECK(s.f_after <= s.f_before - opts.sufficient_decrease / (2.0 * s.step) * s.move_sq);
            for (const PgStepRecord& s : trace.tau_steps)
                CHECK(s.f_after <= s.f_before - opts.sufficient_decrease / (2.0 * s.step) * s.move_sq);
            // Beta searches start at the Lipschitz step, which is largest at the smallest tau.
            const MatrixXd& X = inst.data.X();
            const double x_norm2 = Eigen::JacobiSVD<MatrixXd>(X).singularValues()(0);
            const double tau_lo = *std::min_element(trace.taus.begin(), trace.taus.end());
            const double lipschitz_step = 1.0 / (surrogate_scale(inst.data.n(), std::log(tau_lo)) * x_norm2 * x_norm2);
            for (const PgStepRecord& s : trace.beta_steps) {
                CHECK(s.step > 0.0);
                CHECK(s.step <= lipschitz_step * (1.0 + 1e-9));
            }
            for (const PgStepRecord& s : trace.tau_steps) CHECK(s.step <= opts.tau_step);
        }
    }

    TEST_CASE("agrees with block descent on a clean instance")
    {
        Rng rng(53);
        const MatrixXd X = testing::random_matrix(rng, 50, 3);
        const Dataset d(X * vec({1, -1, 0.5}) + testing::random_normal(rng, 50, 0.5), X);

        FitOptions mm_opts;
        mm_opts.outer_tol = 1e-14;
        mm_opts.max_outer = 1000;
        const FitReport mm = fit_l2e(d, NoPenalty{}, mm_opts);

        PgOptions pg_opts;
        pg_opts.outer_tol = 1e-14;
        pg_opts.inner_tol = 1e-14;
        pg_opts.max_outer = 20000;
        const FitReport pg = fit_pg(d, NoPenalty{}, pg_opts);

        CHECK(std::abs(pg.loss_trace.back() - mm.loss_trace.back()) < 1e-6);
        CHECK((pg.beta - mm.beta).norm() < 1e-2);
    }

    TEST_CASE("tiny steps follow the gradient flow")
    {
        Rng rng(54);
        for (int t = 0; t < 50; ++t) {
            const testing::Instance inst = testing::random_instance(rng);
            PgOptions opts;
            opts.max_outer = 1;
            opts.n_beta_inner = 1;
            opts.n_tau_inner = 1;
            opts.init_beta = inst.beta;
            opts.init_tau = std::exp(inst.eta);
            const FitReport rep = fit_pg(inst.data, NoPenalty{}, opts);
            const VectorXd move = rep.beta - inst.beta;
            const VectorXd flow = -testing::fd_grad_beta(inst.data, inst.beta, inst.eta);
            if (move.norm() == 0.0 || flow.norm() < 1e-8) continue;
            CHECK(move.dot(flow) / (move.norm() * flow.norm()) > 0.99);
        }
    }

    TEST_CASE("isotonic baseline needs more outer iterations than block descent")
    {
        const Dataset d = isotonic_data(55, 1000, 100, 14.0);
        const Penalty pen = IndicatorPenalty{ConstraintSet::isotonic()};
        const FitReport mm = fit_l2e(d, pen);
        const FitReport pg = fit_pg(d, pen);
        MESSAGE("outer MM " << mm.outer_iters << ", PG " << pg.outer_iters);
        CHECK(pg.outer_iters > mm.outer_iters);
        CHECK(testing::max_increase(pg.loss_trace) <= 1e-10);
        for (Index i = 0; i + 1 < pg.beta.size(); ++i) CHECK(pg.beta[i] <= pg.beta[i + 1]);
    }

    TEST_CASE("report shape")
    {
        Rng rng(56);
        const testing::Instance inst = testing::random_instance(rng);
        const FitReport rep = fit_pg(inst.data, NoPenalty{});
        CHECK(rep.outer_iters == static_cast<int>(rep.loss_trace.size()));
        CHECK(rep.inner_beta_iters.size() == rep.loss_trace.size());
        CHECK(rep.inner_eta_iters.size() == rep.loss_trace.size());
        CHECK((rep.weights - case_weights(residuals(inst.data, rep.beta), rep.eta)).norm() == 0.0);
        const FitReport again = fit_pg(inst.data, NoPenalty{});
        CHECK(again.beta == rep.beta);
        CHECK(again.loss_trace == rep.loss_trace);
    }
}
