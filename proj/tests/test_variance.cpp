#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spectral/chains.hpp"
#include "spectral/norms.hpp"
#include "spectral/variance.hpp"

using namespace spectral;

TEST_CASE("iid variance is the plain variance") {
    Pcg64 rng(41);
    const int n = 6;
    const auto nu = oracles::random_probability_vector(rng, n);
    const FiniteKernel iid = theta_lazy(nu, 1.0);
    const auto phi = oracles::random_observable(rng, n);

    double mean = 0.0, second = 0.0;
    for (int i = 0; i < n; ++i) {
        mean += nu[i] * phi[i];
        second += nu[i] * phi[i] * phi[i];
    }
    const double expected = second - mean * mean;
    CHECK(dynamical_variance_exact(iid, phi).sigma2 ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("constants have zero variance") {
    const FiniteKernel k = FiniteKernel::from_dense({{0.75, 0.25}, {0.25, 0.75}});
    const VarianceResult r = dynamical_variance_exact(k, std::vector<double>{3.0, 3.0});
    CHECK(r.sigma2 == 0.0);
}

TEST_CASE("theta-lazy closed form") {
    // mu0(phibar L0^k phibar) = (1-theta)^k Var(phi), so the series is
    // geometric and sigma^2 = Var(phi) (2/theta - 1).
    Pcg64 rng(43);
    for (double theta : {0.3, 0.5, 0.8}) {
        const int n = 5;
        const auto nu = oracles::random_probability_vector(rng, n);
        const FiniteKernel k = theta_lazy(nu, theta);
        const auto phi = oracles::random_observable(rng, n);
        double mean = 0.0, second = 0.0;
        for (int i = 0; i < n; ++i) {
            mean += nu[i] * phi[i];
            second += nu[i] * phi[i] * phi[i];
        }
        const double var = second - mean * mean;
        const double expected = var * (2.0 / theta - 1.0);
        CHECK(dynamical_variance_exact(k, phi).sigma2 ==
              doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("truncated sum against the exact solve") {
    Pcg64 rng(47);
    const FunctionSpace space = FunctionSpace::sup_osc();

    // K = 0 for an i.i.d. chain: plain variance with zero tail at delta0 = 1
    {
        const auto nu = oracles::random_probability_vector(rng, 4);
        const FiniteKernel iid = theta_lazy(nu, 1.0);
        const auto phi = oracles::random_observable(rng, 4);
        const auto gap = GapCertificate::analytic(1.0);
        const VarianceResult r = dynamical_variance_truncated(iid, space, phi, 0, gap);
        CHECK(*r.tail_bound == 0.0);
        CHECK(r.sigma2 ==
              doctest::Approx(dynamical_variance_exact(iid, phi).sigma2).epsilon(1e-12));
    }

    // theta = 0.5, K = 40: tail <= 4 ||phibar||^2 2^{-41}
    {
        const auto nu = oracles::random_probability_vector(rng, 6);
        const FiniteKernel k = theta_lazy(nu, 0.5);
        const auto phi = oracles::random_observable(rng, 6);
        const auto gap = GapCertificate::analytic(0.5);
        const VarianceResult trunc = dynamical_variance_truncated(k, space, phi, 40, gap);
        const double exact = dynamical_variance_exact(k, phi).sigma2;
        CHECK(std::abs(trunc.sigma2 - exact) <= *trunc.tail_bound);
        CHECK(*trunc.tail_bound <= 4.0 * std::pow(norm(space, phi) + 1.0, 2) * std::pow(2.0, -41));
    }

    // random 20-state chains, K = 200
    for (int t = 0; t < 10; ++t) {
        const int n = 20;
        const double theta = 0.3 + 0.7 * rng.uniform();
        const auto nu = oracles::random_probability_vector(rng, n);
        const FiniteKernel k = theta_lazy(nu, theta);
        const auto phi = oracles::random_observable(rng, n);
        const auto gap = GapCertificate::analytic(theta);
        const VarianceResult trunc = dynamical_variance_truncated(k, space, phi, 200, gap);
        const double exact = dynamical_variance_exact(k, phi).sigma2;
        CHECK(std::abs(trunc.sigma2 - exact) <= *trunc.tail_bound + 1e-14);
    }
}

TEST_CASE("sigma2 invariances") {
    Pcg64 rng(53);
    for (int t = 0; t < 20; ++t) {
        const int n = 3 + static_cast<int>(rng.below(10));
        const double theta = 0.2 + 0.8 * rng.uniform();
        const auto nu = oracles::random_probability_vector(rng, n);
        const FiniteKernel k = theta_lazy(nu, theta);
        const auto phi = oracles::random_observable(rng, n);
        const double base = dynamical_variance_exact(k, phi).sigma2;

        std::vector<double> scaled(phi), shifted(phi);
        for (int i = 0; i < n; ++i) {
            scaled[i] *= -2.5;
            shifted[i] += 11.0;
        }
        CHECK(dynamical_variance_exact(k, scaled).sigma2 ==
              doctest::Approx(6.25 * base).epsilon(1e-10));
        CHECK(dynamical_variance_exact(k, shifted).sigma2 ==
              doctest::Approx(base).epsilon(1e-10));
    }
}

TEST_CASE("normalized observable has unit variance") {
    Pcg64 rng(59);
    const FunctionSpace space = FunctionSpace::sup_osc();
    for (int t = 0; t < 10; ++t) {
        const int n = 4 + static_cast<int>(rng.below(6));
        const double theta = 0.3 + 0.7 * rng.uniform();
        const auto nu = oracles::random_probability_vector(rng, n);
        const FiniteKernel k = theta_lazy(nu, theta);
        const auto phi = oracles::random_observable(rng, n);
        const double sigma2 = dynamical_variance_exact(k, phi).sigma2;
        if (sigma2 <= 0.0) continue;
        const StationaryMeasure mu = stationary_measure(k);
        const Observable tilde = normalize_observable(
            space, Observable::from_values(space, phi), mu.weights, sigma2);
        CHECK(dynamical_variance_exact(k, tilde.values).sigma2 ==
              doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("two-state normalization example") {
    // p = q = 1/2 is i.i.d.: sigma^2(phi) = 1/4 for phi = (0,1), and the
    // normalized version (-1, 1) has SupOsc norm 3.
    const FiniteKernel k = FiniteKernel::from_dense({{0.5, 0.5}, {0.5, 0.5}});
    const std::vector<double> phi{0.0, 1.0};
    const double sigma2 = dynamical_variance_exact(k, phi).sigma2;
    CHECK(sigma2 == doctest::Approx(0.25).epsilon(1e-12));
    const StationaryMeasure mu = stationary_measure(k);
    const FunctionSpace space = FunctionSpace::sup_osc();
    const Observable tilde =
        normalize_observable(space, Observable::from_values(space, phi), mu.weights, sigma2);
    CHECK(tilde.norm_value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(norm_lower_bound_check(tilde.norm_value, 1.0));  // 3 >= sqrt(1/2)
}

TEST_CASE("norm lower bound check") {
    CHECK(norm_lower_bound_check(0.7072, 1.0));
    CHECK_FALSE(norm_lower_bound_check(0.7070, 1.0));
    CHECK(norm_lower_bound_check(1e-4, 1e-9));  // threshold ~ 2.2e-5 tends to zero
    CHECK_THROWS_AS(norm_lower_bound_check(1.0, 0.0), std::invalid_argument);

    // holds on every exact-gap chain for normalized observables
    Pcg64 rng(61);
    const FunctionSpace space = FunctionSpace::sup_osc();
    for (int t = 0; t < 20; ++t) {
        const int n = 3 + static_cast<int>(rng.below(8));
        const double theta = 0.2 + 0.8 * rng.uniform();
        const auto nu = oracles::random_probability_vector(rng, n);
        const FiniteKernel k = theta_lazy(nu, theta);
        const auto phi = oracles::random_observable(rng, n);
        const double sigma2 = dynamical_variance_exact(k, phi).sigma2;
        if (sigma2 < 1e-12) continue;
        const StationaryMeasure mu = stationary_measure(k);
        const Observable tilde = normalize_observable(
            space, Observable::from_values(space, phi), mu.weights, sigma2);
        CHECK(norm_lower_bound_check(tilde.norm_value, theta));
    }
}

TEST_CASE("degenerate chains are rejected") {
    const FiniteKernel identity = FiniteKernel::from_dense({{1.0, 0.0}, {0.0, 1.0}});
    CHECK_THROWS_AS(dynamical_variance_exact(identity, std::vector<double>{0.0, 1.0}),
                    std::runtime_error);
}
