#include "doctest.h"

#include "l2e/error.hpp"
#include "l2e/model.hpp"
#include "l2e/precision.hpp"
#include "oracles.hpp"

using namespace l2e;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> xs)
{
    VectorXd v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

// Residuals with a clear interior minimizer in eta.
VectorXd noisy_residuals(Rng& rng, Index n)
{
    return testing::random_normal(rng, n, 0.3 + 2.0 * rng.uniform());
}

} // namespace

TEST_SUITE("precision")
{
    TEST_CASE("zero residuals drive eta to the cap")
    {
        const EtaUpdate up = eta_update_from_residuals(VectorXd::Zero(5), 0.0, NewtonOptions{.max_inner = 1000});
        CHECK(up.hit_cap);
        CHECK(up.eta == kEtaCap);

        const EtaUpdate few = eta_update_from_residuals(VectorXd::Zero(5), 0.0, NewtonOptions{.max_inner = 3});
        CHECK(few.iterations == 3);
        CHECK(few.eta > 0.0);
        CHECK(few.eta <= kEtaCap);
    }

    TEST_CASE("matches grid search")
    {
        const VectorXd r = vec({-1, 1});
        const double oracle = testing::grid_search_eta(r, -5.0, 5.0, 1e-4);
        const EtaUpdate up = eta_update_from_residuals(r, 0.0);
        CHECK(std::abs(up.eta - oracle) < 1e-3);
        // Ends either on the gradient test or on a numerically flat Armijo failure.
        CHECK((up.gradient_converged || up.armijo_failed));
        CHECK(std::abs(grad_eta_from_residuals(r, up.eta)) < 1e-8);

        Rng rng(31);
        for (int t = 0; t < 20; ++t) {
            const VectorXd res = noisy_residuals(rng, 30);
            const double g = testing::grid_search_eta(res, -5.0, 5.0, 1e-3);
            // Only compare where the grid minimizer is interior and h is locally convex.
            if (g <= -4.9 || g >= 4.9) continue;
            const EtaUpdate u = eta_update_from_residuals(res, g);
            CHECK(std::abs(u.eta - g) < 2e-3);
        }
    }

    TEST_CASE("fixed point")
    {
        const VectorXd r = vec({-1, 1});
        const EtaUpdate first = eta_update_from_residuals(r, 0.0);
        NewtonOptions one;
        one.max_inner = 1;
        const EtaUpdate again = eta_update_from_residuals(r, first.eta, one);
        CHECK(again.eta == first.eta);
        CHECK(again.iterations == 0);
        CHECK(!again.hit_cap);
    }

    TEST_CASE("monotone descent and Armijo condition")
    {
        Rng rng(32);
        for (int t = 0; t < 200; ++t) {
            const VectorXd r = noisy_residuals(rng, 2 + static_cast<Index>(rng.below(40)));
            double eta = -3.0 + 6.0 * rng.uniform();
            NewtonOptions single;
            single.max_inner = 1;
            for (int k = 0; k < 30; ++k) {
                const double h0 = l2e_loss_from_residuals(r, eta).value;
                const double g = grad_eta_from_residuals(r, eta);
                const double d = hess_eta_approx_from_residuals(r, eta);
                const EtaUpdate up = eta_update_from_residuals(r, eta, single);
                const double h1 = l2e_loss_from_residuals(r, up.eta).value;
                CHECK(h1 <= h0);
                if (up.iterations == 1 && !up.hit_cap) {
                    const double step = -g / d;
                    const double tstep = up.eta - eta;
                    const double t_used = tstep / step;
                    CHECK(h1 <= h0 + 1e-4 * t_used * g * step + 1e-15 * std::abs(h0));
                }
                if (up.iterations == 0) break;
                eta = up.eta;
            }
        }
    }

    TEST_CASE("full update never increases h")
    {
        Rng rng(33);
        for (int t = 0; t < 100; ++t) {
            const testing::Instance inst = testing::random_instance(rng);
            const EtaUpdate up = eta_update(inst.data, inst.beta, inst.eta);
            CHECK(l2e_loss(inst.data, inst.beta, up.eta).value <= l2e_loss(inst.data, inst.beta, inst.eta).value);
        }
    }

    TEST_CASE("unit steps dominate near the optimum")
    {
        Rng rng(34);
        int instances = 0, unit = 0;
        NewtonOptions single;
        single.max_inner = 1;
        for (int t = 0; t < 200; ++t) {
            const VectorXd r = noisy_residuals(rng, 50);
            const double opt = eta_update_from_residuals(r, 0.0, NewtonOptions{.max_inner = 1000}).eta;
            if (std::abs(opt) >= kEtaCap) continue;
            const double start = opt + (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.01 + 0.1 * rng.uniform());
            const EtaUpdate up = eta_update_from_residuals(r, start, single);
            ++instances;
            unit += up.unit_steps;
        }
        REQUIRE(instances > 100);
        MESSAGE("unit-step fraction " << static_cast<double>(unit) / instances);
        CHECK(static_cast<double>(unit) >= 0.9 * instances);
    }

    TEST_CASE("inner iteration budget is not binding")
    {
        Rng rng(35);
        for (int t = 0; t < 50; ++t) {
            const VectorXd r = noisy_residuals(rng, 40);
            const double eta0 = -2.0 + 4.0 * rng.uniform();
            const EtaUpdate a = eta_update_from_residuals(r, eta0, NewtonOptions{.max_inner = 100});
            const EtaUpdate b = eta_update_from_residuals(r, eta0, NewtonOptions{.max_inner = 1000});
            CHECK(std::abs(a.eta - b.eta) < 1e-6);
        }
    }

    TEST_CASE("dataset and residual entry points agree")
    {
        Rng rng(36);
        for (int t = 0; t < 20; ++t) {
            const testing::Instance inst = testing::random_instance(rng);
            const EtaUpdate a = eta_update(inst.data, inst.beta, inst.eta);
            const EtaUpdate b = eta_update_from_residuals(residuals(inst.data, inst.beta), inst.eta);
            CHECK(a.eta == b.eta);
            CHECK(a.iterations == b.iterations);
        }
    }

    TEST_CASE("options validation")
    {
        const VectorXd r = vec({-1, 1});
        CHECK_THROWS_AS(eta_update_from_residuals(r, 0.0, NewtonOptions{.max_inner = 0}), InvalidArgument);
        CHECK_THROWS_AS(eta_update_from_residuals(r, 0.0, NewtonOptions{.armijo_sigma = 0.0}), InvalidArgument);
        CHECK_THROWS_AS(eta_update_from_residuals(r, 0.0, NewtonOptions{.armijo_sigma = 1.0}), InvalidArgument);
        CHECK_THROWS_AS(eta_update_from_residuals(r, 0.0, NewtonOptions{.shrink = 1.0}), InvalidArgument);
        CHECK_THROWS_AS(eta_update_from_residuals(r, 0.0, NewtonOptions{.shrink = 0.0}), InvalidArgument);
        CHECK_THROWS_AS(eta_update_from_residuals(r, std::nan(""), NewtonOptions{}), InvalidArgument);
        CHECK_NOTHROW(NewtonOptions{}.validate());
    }
}
