#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spectral/kernel.hpp"
#include "spectral/norms.hpp"

namespace spectral {

/// Weighted averaging operator (L_phi f)(x) = sum_y m_xy e^{phi(y)} f(y),
/// stored as the base kernel plus the complex weight vector e^{scale phi}.
/// scale = 0 reproduces the averaging operator exactly; purely imaginary
/// scale = it/sqrt(n) gives the characteristic-function operator.
struct TransferOperator {
    FiniteKernel base;
    std::vector<std::complex<double>> weights;

    int size() const { return base.size(); }
    bool is_real() const;

    std::vector<std::complex<double>> apply(std::span<const std::complex<double>> f) const;
    std::vector<double> apply_real(std::span<const double> f) const;  // requires is_real()

    DenseMatrix dense_real() const;          // requires is_real()
    DenseComplexMatrix dense_complex() const;
};

TransferOperator build_transfer(const FiniteKernel& kernel, std::span<const double> phi,
                                std::complex<double> scale);

/// Leading eigen-data of a transfer operator from complex power iteration,
/// normalized by the entry of largest modulus (lowest index on ties).
/// At phi = 0: lambda = 1 exactly, u = 1, and the left form is mu0.
struct EigenData {
    std::complex<double> lambda;
    std::vector<std::complex<double>> right_vector;
    std::vector<std::complex<double>> left_form;
    std::complex<double> pairing = 0.0;  // left_form . right_vector
    double residual = 0.0;
    int iterations = 0;
};

EigenData leading_eigen(const TransferOperator& op, double tol = 1e-13, int max_iter = 50000);

/// log(1 + delta0^2 / (13 + 12 delta0)): the potential-norm radius under
/// which every estimate in this module is proved. The variant constant
/// 12 + 13 delta0 belongs to the second-order bound's own admissibility cap
/// (bounds module); this module keeps the smaller radius everywhere.
double smallness_threshold(double delta0);
bool smallness_condition(double delta0, double phi_norm);

struct InequalityRecord {
    std::string lemma_id;
    std::string inequality_id;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs - lhs
    bool holds = false;   // lhs <= rhs (1 + 1e-9)
};

struct LemmaReport {
    std::vector<InequalityRecord> records;
    bool advisory_only = false;  // set when the gap certificate is estimated

    bool all_hold() const;
    void add(std::string lemma, std::string inequality, double lhs, double rhs);
};

void write_lemma_csv(const LemmaReport& report, std::ostream& out);
LemmaReport parse_lemma_csv(std::istream& in);

struct LemmaCheckOptions {
    AscentOptions ascent;  // operator-norm lower bounds
    int r_decay_probe = 10;
};

/// First-tier perturbation estimates: operator-norm Taylor bounds for
/// L_phi - L_0, the projection norm, the eigenvalue expansion through second
/// order, and the remainder/projection controls. Operator norms on the LHS
/// are ascent lower bounds, which can only make the checks easier to fail
/// the wrong way round -- i.e. they keep the falsification sound.
LemmaReport verify_lemma_estimates(const FiniteKernel& kernel, const GapCertificate& gap,
                                   std::span<const double> phi, const FunctionSpace& space,
                                   const LemmaCheckOptions& opts = {});

/// Power-level consequences: L_phi^n 1 = lambda^n (1 + O(||phi||)) and the
/// two exponential expansions of lambda^n (first order, and second order
/// with the dynamical variance).
LemmaReport verify_corollary_L(const FiniteKernel& kernel, const GapCertificate& gap,
                               std::span<const double> phi, const FunctionSpace& space,
                               long n, const LemmaCheckOptions& opts = {});

/// Probes the persistence of the spectral gap at the perturbed operator:
/// ||L_phi^n f|| <= |lambda_phi|^n (1-delta)^n ||f|| for a batch of f in the
/// perturbed stable hyperplane. Requires e^{||phi||} - 1 within the radius
/// delta0 (delta0-delta) / (12 (1+delta0-delta)).
LemmaReport verify_gap_persistence(const FiniteKernel& kernel, const GapCertificate& gap,
                                   std::span<const double> phi, const FunctionSpace& space,
                                   double delta, int n_probe, int batch = 16,
                                   std::uint64_t seed = 0xbeefULL);

/// Exact characteristic function of (1/sqrt(n)) sum_{k=1..n} phi_tilde(X_k)
/// under the cold-start law mu, by n applications of the weighted operator
/// to the constant function 1.
std::complex<double> characteristic_function_exact(const FiniteKernel& kernel,
                                                   std::span<const double> phi_tilde,
                                                   std::span<const double> mu, long n,
                                                   double t);

/// Checks the per-root characteristic-function controls on a grid of t
/// inside their validity range (alpha = 0.195 unless overridden):
///   - envelope: |phi_n(t)|^{1/n} <= 1.32^{1/n} e^{-alpha t^2 / n},
///   - expansion: |phi_n(t)^{1/n} - e^{-t^2/(2n)}|
///       <= (f ||t phi_tilde||^3 + g ||t phi_tilde||) / n^{3/2} + t^4/(8n^2)
///     with f = 7.41 + 17.75/delta0 + 8.49/delta0^2 and
///          g = 4.036 + 4.338/delta0.
/// phi_tilde must be variance-normalized; n >= 10000 is a precondition of
/// these estimates.
LemmaReport verify_characteristic_bounds(const FiniteKernel& kernel, const GapCertificate& gap,
                                         std::span<const double> phi_tilde,
                                         const FunctionSpace& space, long n, int t_points = 12,
                                         double alpha = 0.195, int initial_state = 0);

}  // namespace spectral
