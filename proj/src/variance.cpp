#include "spectral/variance.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace spectral {

namespace {

// g with (I - L0) g = L0 phibar and mu0(g) = 0, through the rank-one-corrected
// system (I - L0 + 1 mu0^T) g = L0 phibar, which is nonsingular exactly when
// the chain has a spectral gap.
std::vector<double> poisson_solve(const FiniteKernel& kernel, const StationaryMeasure& mu,
                                  std::span<const double> phibar) {
    const int n = kernel.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    for (int x = 0; x < n; ++x)
        for (const auto& [y, p] : kernel.rows[x]) A(x, y) -= p;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) A(x, y) += mu.weights[y];

    const std::vector<double> rhs = apply_averaging(kernel, phibar);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = rhs[i];

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::VectorXd g = lu.solve(b);
    const double relerr = (A * g - b).norm() / std::max(1e-300, b.norm());
    if (!g.allFinite() || relerr > 1e-8)
        throw std::runtime_error("variance solve is singular: chain has no usable spectral gap");

    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = g(i);
    // Re-center; mu0(g) = 0 holds analytically, this kills rounding drift.
    double m = 0.0;
    for (int i = 0; i < n; ++i) m += mu.weights[i] * out[i];
    for (double& v : out) v -= m;
    return out;
}

std::vector<double> centered(std::span<const double> phi, const StationaryMeasure& mu) {
    double mean = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) mean += mu.weights[i] * phi[i];
    std::vector<double> phibar(phi.begin(), phi.end());
    for (double& v : phibar) v -= mean;
    return phibar;
}

}  // namespace

VarianceResult dynamical_variance_exact(const FiniteKernel& kernel, std::span<const double> phi) {
    kernel.validate();
    if (static_cast<int>(phi.size()) != kernel.size())
        throw std::invalid_argument("dimension mismatch");
    const StationaryMeasure mu = stationary_measure(kernel);
    const std::vector<double> phibar = centered(phi, mu);
    const std::vector<double> g = poisson_solve(kernel, mu, phibar);

    double var0 = 0.0, cross = 0.0;
    for (int i = 0; i < kernel.size(); ++i) {
        var0 += mu.weights[i] * phibar[i] * phibar[i];
        cross += mu.weights[i] * phibar[i] * g[i];
    }
    double sigma2 = var0 + 2.0 * cross;
    if (sigma2 < 0.0) {
        if (sigma2 < -1e-10)
            throw std::runtime_error("dynamical variance came out negative beyond tolerance");
        sigma2 = 0.0;
    }
    VarianceResult out;
    out.sigma2 = sigma2;
    out.method = VarianceMethod::ExactSolve;
    return out;
}

VarianceResult dynamical_variance_truncated(const FiniteKernel& kernel,
                                            const FunctionSpace& space,
                                            std::span<const double> phi, int K,
                                            const GapCertificate& gap) {
    kernel.validate();
    if (K < 0) throw std::invalid_argument("truncation K must be >= 0");
    const StationaryMeasure mu = stationary_measure(kernel);
    const std::vector<double> phibar = centered(phi, mu);

    double sum = 0.0;
    for (int i = 0; i < kernel.size(); ++i) sum += mu.weights[i] * phibar[i] * phibar[i];

    std::vector<double> iter(phibar);
    for (int k = 1; k <= K; ++k) {
        iter = apply_averaging(kernel, iter);
        double term = 0.0;
        for (int i = 0; i < kernel.size(); ++i) term += mu.weights[i] * phibar[i] * iter[i];
        sum += 2.0 * term;
    }

    const double phibar_norm = norm(space, phibar);
    const double d0 = gap.delta0;
    VarianceResult out;
    out.sigma2 = sum;
    out.method = VarianceMethod::Truncated;
    out.truncation_K = K;
    out.tail_bound = 2.0 * phibar_norm * phibar_norm * std::pow(1.0 - d0, K + 1) / d0;
    return out;
}

bool norm_lower_bound_check(double phi_tilde_norm, double delta0) {
    if (!(delta0 > 0.0) || delta0 > 1.0)
        throw std::invalid_argument("delta0 must lie in (0,1]");
    return phi_tilde_norm >= std::sqrt(delta0 / 2.0);
}

double autocovariance_series(const FiniteKernel& kernel, std::span<const double> phi) {
    const StationaryMeasure mu = stationary_measure(kernel);
    const std::vector<double> phibar = centered(phi, mu);
    const std::vector<double> g = poisson_solve(kernel, mu, phibar);
    double s = 0.0;
    for (int i = 0; i < kernel.size(); ++i) s += mu.weights[i] * phibar[i] * g[i];
    return s;
}

}  // namespace spectral
