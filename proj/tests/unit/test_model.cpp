#include "doctest.h"

#include <numbers>
#include <numeric>

#include "l2e/error.hpp"
#include "l2e/model.hpp"
#include "oracles.hpp"

using namespace l2e;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);
const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

VectorXd vec(std::initializer_list<double> xs)
{
    VectorXd v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

} // namespace

TEST_SUITE("model")
{
    TEST_CASE("dataset validation")
    {
        CHECK_THROWS_AS(Dataset(VectorXd(0), MatrixXd(0, 1)), InvalidArgument);
        CHECK_THROWS_AS(Dataset(vec({1, 2}), MatrixXd::Ones(3, 1)), InvalidArgument);
        CHECK_THROWS_AS(Dataset(vec({1, 2}), MatrixXd::Ones(2, 0)), InvalidArgument);
        CHECK_THROWS_AS(Dataset(vec({1, std::nan("")}), MatrixXd::Ones(2, 1)), InvalidArgument);
        MatrixXd X = MatrixXd::Ones(2, 1);
        X(1, 0) = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(Dataset(vec({1, 2}), X), InvalidArgument);
        const Dataset d = Dataset::with_identity_design(vec({3, 1, 2}));
        CHECK(d.has_identity_design());
        CHECK(d.p() == 3);
        CHECK(Dataset(vec({1, 2}), MatrixXd::Identity(2, 2)).has_identity_design());
    }

    TEST_CASE("residuals")
    {
        const Dataset d(vec({1, 2}), MatrixXd::Ones(2, 1));
        CHECK(residuals(d, vec({1})) == vec({0, 1}));
        CHECK(residuals(d, vec({0})) == d.y());
        CHECK_THROWS_AS(residuals(d, vec({1, 2})), InvalidArgument);

        Rng rng(3);
        const MatrixXd X = testing::random_matrix(rng, 5, 3);
        const VectorXd y = testing::random_normal(rng, 5);
        const VectorXd b = testing::random_normal(rng, 3);
        const VectorXd r = residuals(Dataset(y, X), b);
        for (Index i = 0; i < 5; ++i) {
            double fit = 0.0;
            for (Index j = 0; j < 3; ++j) fit += X(i, j) * b[j];
            CHECK(r[i] == doctest::Approx(y[i] - fit).epsilon(1e-14));
        }
    }

    TEST_CASE("case weights")
    {
        CHECK(case_weights(vec({0}), 1.7)[0] == 1.0);
        CHECK(case_weights(vec({1}), 0.0)[0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
        const double w = case_weights(vec({10}), 2.0)[0];
        CHECK(w >= kWeightFloor);
        CHECK(std::exp(-std::exp(4.0) * 100.0 / 2.0) < 1e-12);
        CHECK(w < 1e-12);
        const VectorXd ws = case_weights(vec({0, 0.5, -3, 1e3}), 0.3);
        CHECK((ws.array() > 0.0).all());
        CHECK((ws.array() <= 1.0).all());
    }

    TEST_CASE("loss closed forms")
    {
        const Dataset d(vec({1, 2, 3}), MatrixXd::Identity(3, 3));
        CHECK(l2e_loss(d, d.y(), 0.0).value == doctest::Approx(1.0 / (2.0 * kSqrtPi) - kSqrt2OverPi).epsilon(1e-14));
        CHECK(l2e_loss(d, d.y(), 0.0).value == doctest::Approx(-0.515790).epsilon(1e-6));
        const Dataset one(vec({1}), MatrixXd::Ones(1, 1));
        CHECK(l2e_loss(one, vec({0}), 0.0).value
              == doctest::Approx(1.0 / (2.0 * kSqrtPi) - kSqrt2OverPi * std::exp(-0.5)).epsilon(1e-14));
    }

    TEST_CASE("loss equals a direct summation oracle")
    {
        Rng rng(4);
        for (int t = 0; t < 20; ++t) {
            const MatrixXd X = testing::random_matrix(rng, 20, 3);
            const VectorXd y = testing::random_normal(rng, 20, 2.0);
            const Dataset d(y, X);
            const VectorXd b = testing::random_normal(rng, 3);
            const double eta = rng.uniform() * 2.0 - 1.0;
            CHECK(testing::rel_err(l2e_loss(d, b, eta).value, testing::loss_oracle(d, b, eta)) < 1e-12);
        }
    }

    TEST_CASE("loss lower bound and permutation invariance")
    {
        Rng rng(5);
        for (int t = 0; t < 20; ++t) {
            const auto inst = testing::random_instance(rng);
            const double bound = std::exp(inst.eta) * (1.0 / (2.0 * kSqrtPi) - kSqrt2OverPi);
            CHECK(l2e_loss(inst.data, inst.beta, inst.eta).value > bound);

            std::vector<Index> perm(static_cast<std::size_t>(inst.data.n()));
            std::iota(perm.begin(), perm.end(), Index{0});
            for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
            const Dataset shuffled = inst.data.subset(perm);
            CHECK(l2e_loss(shuffled, inst.beta, inst.eta).value
                  == doctest::Approx(l2e_loss(inst.data, inst.beta, inst.eta).value).epsilon(1e-13));
        }
    }

    TEST_CASE("gradients at closed-form points")
    {
        const Dataset d(vec({1, 2}), MatrixXd::Identity(2, 2));
        CHECK(grad_beta(d, d.y(), 0.3).norm() == 0.0);
        CHECK(grad_eta(d, d.y(), 0.0) == doctest::Approx(1.0 / (2.0 * kSqrtPi) - kSqrt2OverPi).epsilon(1e-14));
        CHECK(hess_eta_approx(d, d.y(), 0.0) == doctest::Approx(1.0 / (2.0 * kSqrtPi)).epsilon(1e-14));

        const Dataset one(vec({1}), MatrixXd::Ones(1, 1));
        CHECK(grad_beta(one, vec({0}), 0.0)[0] == doctest::Approx(-kSqrt2OverPi * std::exp(-0.5)).epsilon(1e-14));
        CHECK(grad_beta(one, vec({0}), 0.0)[0] == doctest::Approx(-0.483941).epsilon(1e-6));

        const double g = grad_eta(one, vec({0}), -30.0);
        CHECK(g < 0.0);
        CHECK(g == doctest::Approx(std::exp(-30.0) * (1.0 / (2.0 * kSqrtPi) - kSqrt2OverPi)).epsilon(1e-6));
    }

    TEST_CASE("gradients match finite differences on random instances")
    {
        Rng rng(6);
        for (int t = 0; t < 100; ++t) {
            const auto inst = testing::random_instance(rng);
            const VectorXd g = grad_beta(inst.data, inst.beta, inst.eta);
            const VectorXd fd = testing::fd_grad_beta(inst.data, inst.beta, inst.eta);
            CHECK((g - fd).norm() / std::max(fd.norm(), 1e-8) < 1e-6);
            CHECK(testing::rel_err(grad_eta(inst.data, inst.beta, inst.eta),
                                   testing::fd_grad_eta(inst.data, inst.beta, inst.eta))
                  < 1e-6);
        }
    }

    TEST_CASE("approximate curvature dominates the exact second derivative")
    {
        Rng rng(7);
        for (int t = 0; t < 100; ++t) {
            const auto inst = testing::random_instance(rng);
            const VectorXd r = residuals(inst.data, inst.beta);
            const double d = hess_eta_approx_from_residuals(r, inst.eta);
            const double exact = testing::fd_hess_eta([&](double e) { return grad_eta_from_residuals(r, e); }, inst.eta);
            CHECK(d > 0.0);
            CHECK(d - exact >= -1e-8);
        }
    }

    TEST_CASE("tau-scale helpers agree with the eta-scale ones")
    {
        Rng rng(8);
        const VectorXd r = testing::random_normal(rng, 30);
        const double eta = 0.4;
        CHECK(l2e_loss_tau(r, std::exp(eta)) == doctest::Approx(l2e_loss_from_residuals(r, eta).value).epsilon(1e-14));
        CHECK(std::exp(eta) * grad_tau_from_residuals(r, std::exp(eta))
              == doctest::Approx(grad_eta_from_residuals(r, eta)).epsilon(1e-12));
    }

    TEST_CASE("eta clamping")
    {
        CHECK(clamp_eta(1e6) == kEtaCap);
        CHECK(clamp_eta(-1e6) == -kEtaCap);
        CHECK(clamp_eta(0.5) == 0.5);
        CHECK(std::isfinite(l2e_loss(Dataset(vec({1}), MatrixXd::Ones(1, 1)), vec({1}), kEtaCap).value));
    }
}
