// Independent oracles for the test suites. Everything here recomputes
// expected values by a route different from the library implementation:
// dense eigensolvers, closed forms, exhaustive enumeration.
#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "spectral/kernel.hpp"
#include "spectral/norms.hpp"
#include "spectral/rng.hpp"

namespace oracles {

/// Leading eigenvalue (largest modulus) of a dense complex matrix by QR.
inline std::complex<double> dense_leading_eigenvalue(
    const std::vector<std::vector<std::complex<double>>>& m) {
    const int n = static_cast<int>(m.size());
    Eigen::MatrixXcd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = m[i][j];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(A, false);
    std::complex<double> best = 0.0;
    for (int i = 0; i < n; ++i)
        if (std::abs(solver.eigenvalues()(i)) > std::abs(best)) best = solver.eigenvalues()(i);
    return best;
}

inline std::complex<double> dense_leading_eigenvalue_kernel(const spectral::FiniteKernel& k,
                                                            std::span<const double> phi,
                                                            std::complex<double> scale) {
    const int n = k.size();
    std::vector<std::vector<std::complex<double>>> m(n,
                                                     std::vector<std::complex<double>>(n, 0.0));
    for (int x = 0; x < n; ++x)
        for (const auto& [y, p] : k.rows[x]) m[x][y] = p * std::exp(scale * phi[y]);
    return dense_leading_eigenvalue(m);
}

/// Leading eigenvalue of the two-state weighted operator by the quadratic
/// formula.
inline double two_state_transfer_eigenvalue(double p, double q, double w0, double w1) {
    const double tr = (1.0 - p) * w0 + (1.0 - q) * w1;
    const double det = w0 * w1 * ((1.0 - p) * (1.0 - q) - p * q);
    return 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
}

/// Leading eigenvalue of a theta-lazy transfer operator via the secular
/// equation 1 = theta sum_y nu_y w_y / (lambda - (1-theta) w_y), solved by
/// bisection above (1-theta) max w.
inline double theta_lazy_transfer_eigenvalue(std::span<const double> nu, double theta,
                                             std::span<const double> weights) {
    if (theta == 1.0) {
        double s = 0.0;
        for (std::size_t i = 0; i < nu.size(); ++i) s += nu[i] * weights[i];
        return s;
    }
    double wmax = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        wmax = std::max(wmax, weights[i]);
        wsum += nu[i] * weights[i];
    }
    auto secular = [&](double lambda) {
        double s = 0.0;
        for (std::size_t i = 0; i < nu.size(); ++i)
            s += nu[i] * weights[i] / (lambda - (1.0 - theta) * weights[i]);
        return theta * s - 1.0;
    };
    double lo = (1.0 - theta) * wmax * (1.0 + 1e-15), hi = (1.0 - theta) * wmax + theta * wsum;
    hi = std::max(hi, lo * (1.0 + 1e-12)) + 1e-30;
    while (secular(lo) < 0.0) lo *= 1.0 - 1e-12;  // guard against rounding at the pole
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (secular(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Exact law of sum phi(X_k), k = 1..n, by exhaustive path enumeration.
/// Exponential in n; for tiny cross-checks only.
inline std::vector<std::pair<double, double>> brute_force_sum_law(
    const spectral::FiniteKernel& k, std::span<const double> phi, std::span<const double> mu,
    long n) {
    std::vector<std::pair<double, double>> atoms;  // (sum, prob), unsorted
    struct Frame {
        int state;
        long depth;
        double sum;
        double prob;
    };
    std::vector<Frame> stack;
    for (int x = 0; x < k.size(); ++x)
        if (mu[x] != 0.0) stack.push_back({x, 0, 0.0, mu[x]});
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        if (f.depth == n) {
            atoms.emplace_back(f.sum, f.prob);
            continue;
        }
        for (const auto& [y, p] : k.rows[f.state])
            stack.push_back({y, f.depth + 1, f.sum + phi[y], f.prob * p});
    }
    std::sort(atoms.begin(), atoms.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& [v, p] : atoms) {
        if (!merged.empty() && merged.back().first == v)
            merged.back().second += p;
        else
            merged.emplace_back(v, p);
    }
    return merged;
}

/// P(|K/n - 1/2| >= a) for K ~ Binomial(n, 1/2), by exact log-space summation.
inline double binomial_symmetric_tail(long n, double a) {
    auto log_choose = [&](long k) {
        return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    };
    double total = 0.0;
    for (long k = 0; k <= n; ++k) {
        const double dev = std::abs(static_cast<double>(k) / n - 0.5);
        if (dev >= a) total += std::exp(log_choose(k) - n * std::log(2.0));
    }
    return total;
}

// ---- random generators -------------------------------------------------

inline std::vector<double> random_probability_vector(spectral::Pcg64& rng, int n) {
    std::vector<double> v(n);
    double sum = 0.0;
    for (double& x : v) {
        x = 0.05 + rng.uniform();
        sum += x;
    }
    for (double& x : v) x /= sum;
    // kill the rounding drift in the row sum
    double s2 = 0.0;
    for (double x : v) s2 += x;
    v[0] += 1.0 - s2;
    return v;
}

/// Metric from a random 1-d embedding (triangle inequality for free).
inline std::vector<std::vector<double>> random_metric(spectral::Pcg64& rng, int n) {
    std::vector<double> pos(n);
    for (int i = 0; i < n; ++i) pos[i] = rng.uniform(0.0, 10.0) + 0.3 * i;
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) d[i][j] = std::abs(pos[i] - pos[j]) + 0.1;
    return d;
}

/// Connected random graph: a path plus random chords.
inline std::vector<std::vector<int>> random_adjacency(spectral::Pcg64& rng, int n) {
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i + 1 < n; ++i) {
        adj[i].push_back(i + 1);
        adj[i + 1].push_back(i);
    }
    const int extra = n / 2;
    for (int e = 0; e < extra; ++e) {
        const int a = static_cast<int>(rng.below(n));
        const int b = static_cast<int>(rng.below(n));
        if (a == b) continue;
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return adj;
}

inline spectral::FunctionSpace random_space(spectral::Pcg64& rng, int n, int kind_index) {
    using spectral::FunctionSpace;
    switch (kind_index % 4) {
        case 0: return FunctionSpace::sup_osc();
        case 1: return FunctionSpace::weighted_lipschitz(random_metric(rng, n),
                                                         0.5 + 3.0 * rng.uniform());
        case 2: return FunctionSpace::local_tv(random_adjacency(rng, n));
        default: return FunctionSpace::bv_interval();
    }
}

inline std::vector<double> random_observable(spectral::Pcg64& rng, int n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

/// Rescale to a target norm in the given space.
inline std::vector<double> scaled_to_norm(const spectral::FunctionSpace& space,
                                          std::vector<double> v, double target) {
    const double current = spectral::norm(space, v);
    for (double& x : v) x *= target / current;
    return v;
}

}  // namespace oracles
