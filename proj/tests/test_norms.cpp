#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "spectral/norms.hpp"
#include "spectral/rng.hpp"

using namespace spectral;

namespace {

std::vector<double> polarization3() {
    std::vector<double> v(8);
    for (int x = 0; x < 8; ++x)
        v[x] = ((x & 1) + ((x >> 1) & 1) + ((x >> 2) & 1)) / 3.0;
    return v;
}

std::vector<std::vector<double>> hamming3() {
    std::vector<std::vector<double>> d(8, std::vector<double>(8, 0.0));
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y) {
            int diff = x ^ y, c = 0;
            while (diff) {
                c += diff & 1;
                diff >>= 1;
            }
            d[x][y] = c;
        }
    return d;
}

std::vector<std::vector<int>> cube_adjacency3() {
    std::vector<std::vector<int>> adj(8);
    for (int x = 0; x < 8; ++x)
        for (int i = 0; i < 3; ++i) adj[x].push_back(x ^ (1 << i));
    return adj;
}

}  // namespace

TEST_CASE("sup norm basics") {
    CHECK(sup_norm(std::vector<double>{0, 0, 0}) == 0.0);
    CHECK(sup_norm(std::vector<double>{1, -3, 2}) == 3.0);
    CHECK(sup_norm(polarization3()) == 1.0);  // max proportion of ones over 8 vertices
    CHECK_THROWS_AS(sup_norm(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(sup_norm(std::vector<double>{1.0, NAN}), std::invalid_argument);
}

TEST_CASE("seminorms per kind") {
    CHECK(seminorm(FunctionSpace::sup_osc(), std::vector<double>{1, -3, 2}) == 5.0);

    // Lip(rho) = 1/3 exactly: enumerate every pair as the oracle.
    const auto rho = polarization3();
    const auto metric = hamming3();
    double lip = 0.0;
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y)
            if (x != y) lip = std::max(lip, std::abs(rho[x] - rho[y]) / metric[x][y]);
    CHECK(lip == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const auto lip_space = FunctionSpace::weighted_lipschitz(metric, 3.0);
    CHECK(seminorm(lip_space, rho) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(norm(lip_space, rho) == doctest::Approx(2.0).epsilon(1e-15));

    // 1_{[0]}: each vertex has exactly one neighbor across the half-cube cut.
    std::vector<double> half(8);
    for (int x = 0; x < 8; ++x) half[x] = (x & 1) == 0 ? 1.0 : 0.0;
    const auto w_space = FunctionSpace::local_tv(cube_adjacency3());
    CHECK(seminorm(w_space, half) == 1.0);
    CHECK(norm(w_space, half) == 2.0);

    const auto pc = PiecewiseConstant::indicator(0.2, 0.7);
    CHECK(total_variation(pc) == 2.0);
    CHECK(bv_norm(pc) == 3.0);

    // BVInterval on a finite state vector follows the position order.
    FunctionSpace bv = FunctionSpace::bv_interval({0.0, 1.0, 2.0});
    CHECK(seminorm(bv, std::vector<double>{1, -3, 2}) == 9.0);
    FunctionSpace bv_shuffled = FunctionSpace::bv_interval({2.0, 0.0, 1.0});
    CHECK(seminorm(bv_shuffled, std::vector<double>{1, -3, 2}) == 6.0);  // order -3, 2, 1

    CHECK_THROWS_WITH_AS(seminorm(FunctionSpace::weighted_lipschitz({}, 1.0),
                                  std::vector<double>{1.0, 2.0}),
                         doctest::Contains("space/kind mismatch"), std::invalid_argument);
    FunctionSpace no_adj;
    no_adj.kind = SpaceKind::LocalTV;
    CHECK_THROWS_AS(seminorm(no_adj, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("norm axioms on random data") {
    Pcg64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 10;
        const FunctionSpace space = oracles::random_space(rng, n, trial);
        const auto f = oracles::random_observable(rng, n);
        const auto g = oracles::random_observable(rng, n);

        // ||1|| = 1 and V(c 1) = 0
        CHECK(norm(space, std::vector<double>(n, 1.0)) == 1.0);
        CHECK(seminorm(space, std::vector<double>(n, 7.25)) == 0.0);

        // norm decomposition and domination of the sup norm
        CHECK(norm(space, f) == sup_norm(f) + seminorm(space, f));
        CHECK(norm(space, f) >= sup_norm(f));

        // homogeneity and triangle inequality
        std::vector<double> f3(f), fg(f);
        for (int i = 0; i < n; ++i) {
            f3[i] *= -3.5;
            fg[i] += g[i];
        }
        CHECK(norm(space, f3) == doctest::Approx(3.5 * norm(space, f)).epsilon(1e-12));
        CHECK(norm(space, fg) <= (norm(space, f) + norm(space, g)) * (1 + 1e-12));

        // seminorm invariance under constants
        std::vector<double> shifted(f);
        for (double& v : shifted) v += 4.0;
        CHECK(seminorm(space, shifted) ==
              doctest::Approx(seminorm(space, f)).epsilon(1e-12));

        // Banach algebra submultiplicativity
        CHECK(check_algebra(space, f, g));
    }
}

TEST_CASE("algebra check corner cases") {
    const FunctionSpace space = FunctionSpace::sup_osc();
    CHECK(check_algebra(space, std::vector<double>{1, 1}, std::vector<double>{1, 1}));
    CHECK(check_algebra(space, std::vector<double>{1, 0}, std::vector<double>{0, 1}));

    Pcg64 rng(77);
    for (int t = 0; t < 50; ++t) {
        PiecewiseConstant f, g;
        const int nf = 3 + static_cast<int>(rng.below(5));
        for (int i = 0; i < nf; ++i) f.breakpoints.push_back(i + rng.uniform());
        for (int i = 0; i <= nf; ++i) f.values.push_back(rng.uniform(-2.0, 2.0));
        const int ng = 3 + static_cast<int>(rng.below(5));
        for (int i = 0; i < ng; ++i) g.breakpoints.push_back(i + rng.uniform());
        for (int i = 0; i <= ng; ++i) g.values.push_back(rng.uniform(-2.0, 2.0));
        CHECK(check_algebra(f, g));
    }
}

TEST_CASE("piecewise constant evaluation and products") {
    const auto ind = PiecewiseConstant::indicator(-1.0, 1.0);
    CHECK(ind.evaluate(-2.0) == 0.0);
    CHECK(ind.evaluate(0.0) == 1.0);
    CHECK(ind.evaluate(2.0) == 0.0);

    const auto sq = pc_multiply(ind, ind);
    CHECK(sq.evaluate(0.0) == 1.0);
    CHECK(sq.evaluate(3.0) == 0.0);
    CHECK(total_variation(sq) == 2.0);
}

TEST_CASE("observable construction") {
    const FunctionSpace space = FunctionSpace::sup_osc();
    const Observable obs = Observable::from_values(space, {1, -3, 2});
    CHECK(obs.norm_value == 8.0);
    CHECK(obs.seminorm_value == 5.0);
    CHECK(obs.norm_value >= sup_norm(obs.values));

    const Observable asserted = Observable::asserted(2.0, 1.0);
    CHECK(asserted.values.empty());
    CHECK_THROWS_AS(Observable::asserted(1.0, 2.0), std::invalid_argument);
}

TEST_CASE("normalize_observable") {
    const FunctionSpace space = FunctionSpace::sup_osc();
    const std::vector<double> mu0{0.5, 0.5};

    // already centered with unit variance: unchanged
    const Observable centered = Observable::from_values(space, {-1.0, 1.0});
    const Observable same = normalize_observable(space, centered, mu0, 1.0);
    CHECK(same.values[0] == -1.0);
    CHECK(same.values[1] == 1.0);
    CHECK(*same.mean_under == 0.0);

    // constants are rejected upstream by sigma2 <= 0
    const Observable constant = Observable::from_values(space, {3.0, 3.0});
    CHECK_THROWS_WITH_AS(normalize_observable(space, constant, mu0, 0.0),
                         doctest::Contains("degenerate variance"), std::invalid_argument);

    // mean is removed to machine precision
    Pcg64 rng(5);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> vals = oracles::random_observable(rng, 6);
        std::vector<double> w = oracles::random_probability_vector(rng, 6);
        const Observable obs = Observable::from_values(space, vals);
        const Observable tilde = normalize_observable(space, obs, w, 0.37);
        double mean = 0.0;
        for (int i = 0; i < 6; ++i) mean += w[i] * tilde.values[i];
        CHECK(std::abs(mean) <= 1e-12);
    }
}
