#pragma once

#include <optional>
#include <span>

#include "spectral/kernel.hpp"

namespace spectral {

enum class VarianceMethod { ExactSolve, Truncated };

/// Dynamical (asymptotic) variance of the observable:
/// sigma^2(phi) = mu0(phibar^2) + 2 sum_{k>=1} mu0(phibar L0^k phibar),
/// the variance of the CLT for Birkhoff sums.
struct VarianceResult {
    double sigma2 = 0.0;
    VarianceMethod method = VarianceMethod::ExactSolve;
    std::optional<int> truncation_K;
    std::optional<double> tail_bound;
};

/// Exact value on a finite chain with a spectral gap: solves the Poisson-type
/// system (I - L0) g = L0 phibar on ker mu0 and returns
/// mu0(phibar^2) + 2 mu0(phibar g). Tiny negative results (>= -1e-10) are
/// clamped to 0; anything more negative is an error.
VarianceResult dynamical_variance_exact(const FiniteKernel& kernel, std::span<const double> phi);

/// Partial autocovariance sum through lag K plus the geometric tail bound
/// 2 ||phibar||^2 (1-delta0)^{K+1} / delta0 implied by the contraction gap.
VarianceResult dynamical_variance_truncated(const FiniteKernel& kernel,
                                            const FunctionSpace& space,
                                            std::span<const double> phi, int K,
                                            const GapCertificate& gap);

/// True iff the normalized observable's norm respects the lower bound
/// ||phi_tilde|| >= sqrt(delta0 / 2) that every admissible space forces on
/// unit-variance observables.
bool norm_lower_bound_check(double phi_tilde_norm, double delta0);

/// sum_{k>=1} mu0(phibar L0^k phibar), by the same Poisson solve as the
/// exact variance. Shared with the perturbation checks.
double autocovariance_series(const FiniteKernel& kernel, std::span<const double> phi);

}  // namespace spectral
