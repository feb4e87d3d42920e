#include "spectral/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "spectral/bounds.hpp"
#include "spectral/rng.hpp"
#include "spectral/variance.hpp"

namespace spectral {

namespace {
constexpr double kHoldsSlack = 1e-9;

std::vector<double> real_part(const std::vector<std::complex<double>>& v, double imag_tol,
                              const char* what) {
    double worst = 0.0;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        worst = std::max(worst, std::abs(v[i].imag()));
        out[i] = v[i].real();
    }
    if (worst > imag_tol)
        throw std::runtime_error(std::string(what) + ": unexpected imaginary component");
    return out;
}
}  // namespace

bool TransferOperator::is_real() const {
    for (const auto& w : weights)
        if (w.imag() != 0.0) return false;
    return true;
}

std::vector<std::complex<double>> TransferOperator::apply(
    std::span<const std::complex<double>> f) const {
    if (static_cast<int>(f.size()) != size()) throw std::invalid_argument("dimension mismatch");
    std::vector<std::complex<double>> weighted(size());
    for (int i = 0; i < size(); ++i) weighted[i] = weights[i] * f[i];
    return apply_averaging(base, weighted);
}

std::vector<double> TransferOperator::apply_real(std::span<const double> f) const {
    if (static_cast<int>(f.size()) != size()) throw std::invalid_argument("dimension mismatch");
    std::vector<double> weighted(size());
    for (int i = 0; i < size(); ++i) weighted[i] = weights[i].real() * f[i];
    return apply_averaging(base, weighted);
}

DenseMatrix TransferOperator::dense_real() const {
    if (!is_real()) throw std::logic_error("transfer operator has complex weights");
    DenseMatrix m = DenseMatrix::zero(size());
    for (int x = 0; x < size(); ++x)
        for (const auto& [y, p] : base.rows[x]) m.at(x, y) = p * weights[y].real();
    return m;
}

DenseComplexMatrix TransferOperator::dense_complex() const {
    DenseComplexMatrix m = DenseComplexMatrix::zero(size());
    for (int x = 0; x < size(); ++x)
        for (const auto& [y, p] : base.rows[x]) m.at(x, y) = p * weights[y];
    return m;
}

TransferOperator build_transfer(const FiniteKernel& kernel, std::span<const double> phi,
                                std::complex<double> scale) {
    kernel.validate();
    if (static_cast<int>(phi.size()) != kernel.size())
        throw std::invalid_argument("dimension mismatch");
    TransferOperator op;
    op.base = kernel;
    op.weights.resize(kernel.size());
    for (int i = 0; i < kernel.size(); ++i) {
        const std::complex<double> e = scale * phi[i];
        if (e.real() > 700.0)
            throw std::invalid_argument(
                "exp(phi) overflows in double precision; rescale the potential");
        op.weights[i] = std::exp(e);
    }
    return op;
}

EigenData leading_eigen(const TransferOperator& op, double tol, int max_iter) {
    const int n = op.size();
    if (n == 0) throw std::invalid_argument("empty operator");

    // Column structure of the base kernel for transposed applications:
    // (L^T v)_y = w_y sum_x m_xy v_x.
    std::vector<std::vector<std::pair<int, double>>> cols(n);
    for (int x = 0; x < n; ++x)
        for (const auto& [y, p] : op.base.rows[x]) cols[y].emplace_back(x, p);

    auto apply_left = [&](const std::vector<std::complex<double>>& v) {
        std::vector<std::complex<double>> out(n);
        for (int y = 0; y < n; ++y) {
            std::complex<double> s = 0.0;
            for (const auto& [x, p] : cols[y]) s += p * v[x];
            out[y] = op.weights[y] * s;
        }
        return out;
    };

    auto pivot_index = [&](const std::vector<std::complex<double>>& v) {
        int idx = 0;
        double best = std::abs(v[0]);
        for (int i = 1; i < n; ++i) {
            const double m = std::abs(v[i]);
            if (m > best) {
                best = m;
                idx = i;
            }
        }
        return idx;
    };

    auto iterate = [&](auto&& step, std::vector<std::complex<double>>& u,
                       std::complex<double>& lambda_out, double& resid_out, int& iters_out,
                       std::vector<double>& history) {
        for (int it = 0; it < max_iter; ++it) {
            std::vector<std::complex<double>> w = step(u);
            const int piv = pivot_index(w);
            if (std::abs(w[piv]) == 0.0)
                throw std::runtime_error("power iteration collapsed to zero vector");
            const std::complex<double> lambda = w[piv] / u[piv];
            double resid = 0.0;
            for (int i = 0; i < n; ++i) resid = std::max(resid, std::abs(w[i] - lambda * u[i]));
            const std::complex<double> scale = w[piv];
            for (int i = 0; i < n; ++i) u[i] = w[i] / scale;
            history.push_back(resid);
            if (resid <= tol) {
                lambda_out = lambda;
                resid_out = resid;
                iters_out = it + 1;
                return;
            }
        }
        std::ostringstream msg;
        msg << "power iteration did not converge after " << max_iter << " iterations; residuals:";
        const std::size_t tail = std::min<std::size_t>(5, history.size());
        msg << std::setprecision(3);
        for (std::size_t i = history.size() - tail; i < history.size(); ++i)
            msg << ' ' << history[i];
        throw std::runtime_error(msg.str());
    };

    EigenData data;
    std::vector<double> history;

    std::vector<std::complex<double>> u(n, 1.0);
    iterate([&](const std::vector<std::complex<double>>& v) { return op.apply(v); }, u,
            data.lambda, data.residual, data.iterations, history);
    data.right_vector = u;

    std::vector<std::complex<double>> v(n, 1.0);
    std::complex<double> lambda_left;
    double resid_left = 0.0;
    int iters_left = 0;
    history.clear();
    iterate(apply_left, v, lambda_left, resid_left, iters_left, history);
    data.left_form = v;
    data.residual = std::max(data.residual, resid_left);
    data.iterations = std::max(data.iterations, iters_left);

    if (std::abs(lambda_left - data.lambda) > 1e3 * tol * (1.0 + std::abs(data.lambda)))
        throw std::runtime_error("left/right leading eigenvalues disagree; no spectral dominance");

    std::complex<double> pairing = 0.0;
    for (int i = 0; i < n; ++i) pairing += v[i] * u[i];
    if (std::abs(pairing) < 1e-10)
        throw std::runtime_error("leading eigenvalue is not simple (degenerate pairing)");
    data.pairing = pairing;
    return data;
}

double smallness_threshold(double delta0) {
    if (!(delta0 > 0.0) || delta0 > 1.0)
        throw std::invalid_argument("delta0 must lie in (0,1]");
    return std::log1p(delta0 * delta0 / (13.0 + 12.0 * delta0));
}

bool smallness_condition(double delta0, double phi_norm) {
    return phi_norm <= smallness_threshold(delta0);
}

bool LemmaReport::all_hold() const {
    for (const auto& r : records)
        if (!r.holds) return false;
    return true;
}

void LemmaReport::add(std::string lemma, std::string inequality, double lhs, double rhs) {
    InequalityRecord rec;
    rec.lemma_id = std::move(lemma);
    rec.inequality_id = std::move(inequality);
    rec.lhs = lhs;
    rec.rhs = rhs;
    rec.margin = rhs - lhs;
    rec.holds = lhs <= rhs * (1.0 + kHoldsSlack);
    records.push_back(std::move(rec));
}

void write_lemma_csv(const LemmaReport& report, std::ostream& out) {
    out << "lemma_id,inequality_id,lhs,rhs,margin,holds\n";
    out << std::setprecision(17);
    for (const auto& r : report.records) {
        out << r.lemma_id << ',' << r.inequality_id << ',' << r.lhs << ',' << r.rhs << ','
            << r.margin << ',' << (r.holds ? 1 : 0) << '\n';
    }
}

LemmaReport parse_lemma_csv(std::istream& in) {
    LemmaReport report;
    std::string line;
    if (!std::getline(in, line) || line.rfind("lemma_id,", 0) != 0)
        throw std::invalid_argument("not a lemma-report CSV");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        InequalityRecord rec;
        std::string field;
        std::getline(row, rec.lemma_id, ',');
        std::getline(row, rec.inequality_id, ',');
        std::getline(row, field, ',');
        rec.lhs = std::stod(field);
        std::getline(row, field, ',');
        rec.rhs = std::stod(field);
        std::getline(row, field, ',');
        rec.margin = std::stod(field);
        std::getline(row, field, ',');
        rec.holds = field == "1";
        report.records.push_back(std::move(rec));
    }
    return report;
}

namespace {

struct EigenReal {
    double lambda;
    std::vector<double> u;
    std::vector<double> v;
    double vu;
};

EigenReal real_eigen(const TransferOperator& op) {
    const EigenData d = leading_eigen(op);
    EigenReal out;
    const double scale = 1e-8;  // power-iteration residual leaves tiny imaginary dust
    out.u = real_part(d.right_vector, scale, "leading eigenvector");
    out.v = real_part(d.left_form, scale, "leading eigenform");
    if (std::abs(d.lambda.imag()) > scale)
        throw std::runtime_error("leading eigenvalue unexpectedly complex");
    out.lambda = d.lambda.real();
    out.vu = 0.0;
    for (std::size_t i = 0; i < out.u.size(); ++i) out.vu += out.v[i] * out.u[i];
    return out;
}

// pi_phi = I - u v^T / (v.u): projection onto the stable complement along
// the perturbed eigendirection.
DenseMatrix projection_complement(const EigenReal& e) {
    const int n = static_cast<int>(e.u.size());
    DenseMatrix m = DenseMatrix::identity(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.at(i, j) -= e.u[i] * e.v[j] / e.vu;
    return m;
}

std::vector<double> apply_projection_complement(const EigenReal& e, std::span<const double> f) {
    double vf = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) vf += e.v[i] * f[i];
    std::vector<double> out(f.begin(), f.end());
    const double c = vf / e.vu;
    for (std::size_t i = 0; i < f.size(); ++i) out[i] -= c * e.u[i];
    return out;
}

void require_certified_smallness(const GapCertificate& gap, double phi_norm) {
    if (!smallness_condition(gap.delta0, phi_norm)) {
        std::ostringstream msg;
        msg << "potential norm " << phi_norm << " exceeds the smallness radius "
            << smallness_threshold(gap.delta0) << " for delta0 = " << gap.delta0;
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

LemmaReport verify_lemma_estimates(const FiniteKernel& kernel, const GapCertificate& gap,
                                   std::span<const double> phi, const FunctionSpace& space,
                                   const LemmaCheckOptions& opts) {
    kernel.validate();
    const double phi_norm = norm(space, phi);
    require_certified_smallness(gap, phi_norm);
    const double d0 = gap.delta0;
    const int n = kernel.size();

    LemmaReport report;
    report.advisory_only = !gap.certified();

    const TransferOperator op = build_transfer(kernel, phi, 1.0);
    const DenseMatrix L0 = kernel.to_dense();
    const DenseMatrix Lphi = op.dense_real();

    // Difference operators share the kernel's sparsity: row entries are
    // m_xy (e^{phi_y} - taylor_y).
    auto difference_matrix = [&](auto&& correction) {
        DenseMatrix m = DenseMatrix::zero(n);
        for (int x = 0; x < n; ++x)
            for (const auto& [y, p] : kernel.rows[x])
                m.at(x, y) = p * (op.weights[y].real() - correction(phi[y]));
        return m;
    };

    const DenseMatrix d_exp = difference_matrix([](double) { return 1.0; });
    const DenseMatrix d_lin = difference_matrix([](double t) { return 1.0 + t; });
    const DenseMatrix d_quad = difference_matrix([](double t) { return 1.0 + t + 0.5 * t * t; });

    const double op_d0 = max_norm_ratio(d_exp, space, nullptr, opts.ascent).ratio;
    report.add("5.1", "opnorm_exp", op_d0, std::expm1(phi_norm));
    report.add("5.1", "opnorm_radius", op_d0, d0 * d0 / (13.0 + 12.0 * d0));
    report.add("5.1", "taylor0", op_d0, 1.02 * phi_norm);
    report.add("5.1", "taylor1", max_norm_ratio(d_lin, space, nullptr, opts.ascent).ratio,
               0.507 * phi_norm * phi_norm);
    report.add("5.1", "taylor2", max_norm_ratio(d_quad, space, nullptr, opts.ascent).ratio,
               0.169 * phi_norm * phi_norm * phi_norm);

    const EigenReal eig = real_eigen(op);
    const DenseMatrix pi_phi = projection_complement(eig);
    report.add("5.1", "pi_norm", max_norm_ratio(pi_phi, space, nullptr, opts.ascent).ratio,
               2.053);

    const StationaryMeasure mu = stationary_measure(kernel);
    double mu_phi = 0.0, mu_phi2 = 0.0;
    for (int i = 0; i < n; ++i) {
        mu_phi += mu.weights[i] * phi[i];
        mu_phi2 += mu.weights[i] * phi[i] * phi[i];
    }
    const double series = autocovariance_series(kernel, phi);

    report.add("5.2", "lambda_radius", std::abs(eig.lambda - 1.0), 0.0524);
    report.add("5.2", "lambda_lip", std::abs(eig.lambda - 1.0), 1.334 * phi_norm);
    report.add("5.2", "lambda_taylor1", std::abs(eig.lambda - 1.0 - mu_phi),
               (2.43 + 2.081 / d0) * phi_norm * phi_norm);
    report.add("5.2", "lambda_taylor2",
               std::abs(eig.lambda - 1.0 - mu_phi - 0.5 * mu_phi2 - series),
               (7.41 + 17.75 / d0 + 8.49 / d0 / d0) * phi_norm * phi_norm * phi_norm);

    // || (R_phi / lambda)^n 1 ||: R_phi^n = L_phi^n pi_phi, so push pi_phi 1
    // through the normalized operator.
    std::vector<double> w = apply_projection_complement(eig, std::vector<double>(n, 1.0));
    const double decay = 1.0 - d0 / 13.0;
    const double front = 6.388 + 4.08 / d0;
    for (int k = 1; k <= opts.r_decay_probe; ++k) {
        w = op.apply_real(w);
        for (double& x : w) x /= eig.lambda;
        report.add("5.3", "r_decay_n" + std::to_string(k), norm(space, w),
                   front * std::pow(decay, k - 1) * phi_norm);
    }

    std::vector<double> p_one(n);
    {
        double v_one = 0.0;
        for (int i = 0; i < n; ++i) v_one += eig.v[i];
        for (int i = 0; i < n; ++i) p_one[i] = eig.u[i] * v_one / eig.vu - 1.0;
    }
    report.add("5.3", "projection_one", norm(space, p_one), (3.77 + 4.08 / d0) * phi_norm);

    return report;
}

LemmaReport verify_corollary_L(const FiniteKernel& kernel, const GapCertificate& gap,
                               std::span<const double> phi, const FunctionSpace& space,
                               long n, const LemmaCheckOptions& opts) {
    (void)opts;
    kernel.validate();
    const double phi_norm = norm(space, phi);
    require_certified_smallness(gap, phi_norm);
    const double d0 = gap.delta0;
    if (n < threshold_n(d0)) {
        std::ostringstream msg;
        msg << "n = " << n << " is below the mixing threshold n_min(delta0) = " << threshold_n(d0)
            << " = ceil(1 + log 100 / -log(1 - delta0/13))";
        throw std::invalid_argument(msg.str());
    }

    LemmaReport report;
    report.advisory_only = !gap.certified();

    const TransferOperator op = build_transfer(kernel, phi, 1.0);
    const EigenReal eig = real_eigen(op);

    // lambda^{-n} L_phi^n 1 accumulated with per-step normalization to avoid
    // overflow for large n.
    std::vector<double> w(kernel.size(), 1.0);
    for (long k = 0; k < n; ++k) {
        w = op.apply_real(w);
        for (double& x : w) x /= eig.lambda;
    }
    std::vector<double> dev(w);
    for (double& x : dev) x -= 1.0;
    report.add("cor5.4", "transfer_power", norm(space, dev),
               (3.834 + 4.121 / d0) * phi_norm);

    const StationaryMeasure mu = stationary_measure(kernel);
    double mu_phi = 0.0;
    for (int i = 0; i < kernel.size(); ++i) mu_phi += mu.weights[i] * phi[i];
    const double log_lambda = std::log(eig.lambda);

    report.add("cor5.4", "lambda_exp1", std::abs(log_lambda - mu_phi),
               (3.36 + 2.081 / d0) * phi_norm * phi_norm);

    const double sigma2 = dynamical_variance_exact(kernel, phi).sigma2;
    report.add("cor5.4", "lambda_exp2", std::abs(log_lambda - mu_phi - 0.5 * sigma2),
               (10.89 + 20.04 / d0 + 8.577 / d0 / d0) * phi_norm * phi_norm * phi_norm);
    return report;
}

LemmaReport verify_gap_persistence(const FiniteKernel& kernel, const GapCertificate& gap,
                                   std::span<const double> phi, const FunctionSpace& space,
                                   double delta, int n_probe, int batch, std::uint64_t seed) {
    kernel.validate();
    const double d0 = gap.delta0;
    if (!(delta > 0.0) || delta > d0)
        throw std::invalid_argument("gap persistence needs 0 < delta <= delta0");

    // Radius from the perturbation theorem with tau0 = 1, ||pi0|| <= 2.
    const double radius = d0 * (d0 - delta) / (12.0 * (1.0 + d0 - delta));
    const double phi_norm = norm(space, phi);
    const double diff_upper = std::expm1(phi_norm);  // ||L_phi - L_0|| <= e^{||phi||} - 1
    if (diff_upper > radius) {
        std::ostringstream msg;
        msg << "perturbation bound " << diff_upper << " exceeds the gap-persistence radius "
            << radius;
        throw std::invalid_argument(msg.str());
    }

    LemmaReport report;
    report.advisory_only = !gap.certified();

    const TransferOperator op = build_transfer(kernel, phi, 1.0);
    const EigenReal eig = real_eigen(op);
    const int n = kernel.size();

    std::vector<std::vector<double>> probes;
    Pcg64 rng(seed);
    for (int b = 0; b < batch; ++b) {
        std::vector<double> f(n);
        for (double& x : f) x = rng.normal();
        f = apply_projection_complement(eig, f);
        const double nf = norm(space, f);
        if (nf > 1e-12) {
            for (double& x : f) x /= nf;
            probes.push_back(std::move(f));
        }
    }
    if (probes.empty()) throw std::runtime_error("no usable probe directions");

    const double lam = std::abs(eig.lambda);
    for (int k = 1; k <= n_probe; ++k) {
        double worst = 0.0;
        for (auto& f : probes) {
            f = op.apply_real(f);
            worst = std::max(worst, norm(space, f));
        }
        report.add("gap_persist", "n" + std::to_string(k), worst,
                   std::pow(lam * (1.0 - delta), k));
    }
    return report;
}

std::complex<double> characteristic_function_exact(const FiniteKernel& kernel,
                                                   std::span<const double> phi_tilde,
                                                   std::span<const double> mu, long n,
                                                   double t) {
    kernel.validate();
    if (static_cast<int>(mu.size()) != kernel.size())
        throw std::invalid_argument("dimension mismatch");
    if (n < 0) throw std::invalid_argument("n must be >= 0");
    if (n == 0) return 1.0;

    const std::complex<double> scale(0.0, t / std::sqrt(static_cast<double>(n)));
    const TransferOperator op = build_transfer(kernel, phi_tilde, scale);
    std::vector<std::complex<double>> v(kernel.size(), 1.0);
    for (long k = 0; k < n; ++k) v = op.apply(v);
    std::complex<double> out = 0.0;
    for (int i = 0; i < kernel.size(); ++i) out += mu[i] * v[i];
    return out;
}

LemmaReport verify_characteristic_bounds(const FiniteKernel& kernel, const GapCertificate& gap,
                                         std::span<const double> phi_tilde,
                                         const FunctionSpace& space, long n, int t_points,
                                         double alpha, int initial_state) {
    kernel.validate();
    if (n < 10000)
        throw std::invalid_argument("characteristic-function estimates need n >= 10000");
    if (!(alpha > 0.0) || !(alpha < 0.5))
        throw std::invalid_argument("alpha must lie in (0, 0.5)");
    if (initial_state < 0 || initial_state >= kernel.size())
        throw std::invalid_argument("initial state out of range");

    const double d0 = gap.delta0;
    const double tnorm = norm(space, phi_tilde);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const double big_c = 10.89 + 20.04 / d0 + 8.577 / (d0 * d0);
    const double t_small = sqrt_n * smallness_threshold(d0) / tnorm;
    const double t_be = sqrt_n * (0.5 - alpha) / (big_c * tnorm * tnorm * tnorm);
    const double t_max = std::min(t_small, t_be);

    const double f_const = 7.41 + 17.75 / d0 + 8.49 / (d0 * d0);
    const double g_const = 4.036 + 4.338 / d0;

    std::vector<double> mu(kernel.size(), 0.0);
    mu[initial_state] = 1.0;

    LemmaReport report;
    report.advisory_only = !gap.certified();
    for (int j = 1; j <= t_points; ++j) {
        const double t = t_max * j / t_points;
        const std::complex<double> phi_n =
            characteristic_function_exact(kernel, phi_tilde, mu, n, t);
        const std::complex<double> root = std::pow(phi_n, 1.0 / static_cast<double>(n));
        const double inv_n = 1.0 / static_cast<double>(n);

        std::ostringstream tag;
        tag << "t" << j;
        report.add("7.4", "envelope_" + tag.str(), std::abs(root),
                   std::pow(1.32, inv_n) * std::exp(-alpha * t * t * inv_n));

        const double gauss_root = std::exp(-t * t / (2.0 * static_cast<double>(n)));
        const double tphi = t * tnorm;
        const double rhs = (f_const * tphi * tphi * tphi + g_const * tphi) /
                               (static_cast<double>(n) * sqrt_n) +
                           std::pow(t, 4) / (8.0 * static_cast<double>(n) * static_cast<double>(n));
        report.add("7.5", "expansion_" + tag.str(), std::abs(root - gauss_root), rhs);
    }
    return report;
}

}  // namespace spectral
