#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "spectral/bounds.hpp"
#include "spectral/kernel.hpp"
#include "spectral/norms.hpp"
#include "spectral/rng.hpp"

namespace spectral {

/// Lazy random walk on {0,1}^N: pick a slot uniformly and replace it with a
/// fair coin toss, so each neighbor has probability 1/(2N) and staying put
/// has probability 1/2. States are bitmasks, coordinate i = bit i.
struct HypercubeChain {
    int N = 0;
    FiniteKernel kernel;      // empty when sampler-only
    bool explicit_kernel = false;

    FunctionSpace lip_space;  // ||.||_L = sup + N Lip (Hamming metric)
    bool has_lip_space = false;
    FunctionSpace w_space;    // ||.||_W = sup + local total variation
    bool has_w_space = false;

    /// One transition of the sampler (valid for any N).
    std::uint32_t step(std::uint32_t x, Pcg64& rng) const;

    /// rho(x) = fraction of ones; ||rho||_L = 2 for every N.
    Observable polarization() const;
    /// 1_{[0]}(x) = [coordinate 1 is 0]; ||.||_W norm = 2 for every N.
    Observable halfcube_indicator() const;

    std::vector<double> polarization_values() const;
    std::vector<double> halfcube_values() const;
};

/// Explicit kernel for N <= 20, spaces for moderate N (the Hamming metric is
/// stored densely); larger N still gets the sampler.
HypercubeChain hypercube(int N);

/// Indicator of a "scrambled" set: every vertex must have the same number of
/// neighbors with the same indicator value. The constructor verifies that
/// property exhaustively (N <= 20) instead of generating such sets.
struct ScrambledSet {
    Observable indicator;
    double p = 0.0;  // same-value neighbor count = 2 p N
};
ScrambledSet scrambled_indicator(const HypercubeChain& chain,
                                 const std::function<bool(std::uint32_t)>& member);

/// The two-map affine IFS whose stationary law is the Bernoulli convolution:
/// x -> lambda x - lambda or lambda x + lambda with fair coin signs. The
/// chain of interest is the ell-fold iterate Y_k = X_{k ell}.
struct BernoulliChain {
    double lambda = 0.0;
    int ell = 0;
    double x_min = 0.0, x_max = 0.0;  // invariant interval [-lambda/(1-lambda), +...]

    double map(double x, bool positive_sign) const {
        return lambda * x + (positive_sign ? lambda : -lambda);
    }
    double raw_step(double x, Pcg64& rng) const { return map(x, (rng.next() >> 63) != 0); }
    /// One step of the iterated chain Y (ell raw steps).
    double step(double x, Pcg64& rng) const {
        for (int i = 0; i < ell; ++i) x = raw_step(x, rng);
        return x;
    }
};

/// Requires lambda in (0.5, 0.99]: below 0.5 is outside the regime of
/// interest, above 0.99 the iterate count becomes impractical.
BernoulliChain bernoulli(double lambda);

/// The explicit concentration inequality for BV observables of the iterated
/// Bernoulli chain: 2.488 exp(-n a^2 / (||phi||_BV^2 (16.65 2^ell + 5.12)))
/// under a < ||phi||_BV / (3 (2^{ell+1} - 1)) and n >= 120 2^ell. Agrees with
/// Theorem A at delta0 = 1/(2^{ell+1} - 1) to within 0.1%.
BoundReport bernoulli_bound(double lambda, double phi_bv_norm, double a, long n);

/// rows = (1 - theta) e_x + theta nu: the analytic-gap test family with
/// delta0 = theta exactly in every admissible norm.
FiniteKernel theta_lazy(std::span<const double> nu, double theta);

/// Chain preset addressable by CLI name: "hypercube:N", "bernoulli:lambda",
/// "theta-lazy:k,theta", "file:path".
struct ResolvedChain {
    std::string id;
    std::optional<FiniteKernel> kernel;
    std::optional<HypercubeChain> cube;
    std::optional<BernoulliChain> ifs;
    std::optional<GapCertificate> analytic_gap;
};
ResolvedChain resolve_chain(const std::string& spec);

}  // namespace spectral
