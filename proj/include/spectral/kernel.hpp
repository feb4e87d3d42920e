#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spectral/linalg.hpp"
#include "spectral/norms.hpp"

namespace spectral {

/// Explicit row-stochastic transition kernel on a finite state set.
/// Rows are stored sparsely as (column, probability) pairs sorted by column.
/// Optional metric/adjacency/position annotations are shared with the
/// function spaces that need them.
struct FiniteKernel {
    std::vector<std::string> states;
    std::vector<std::vector<std::pair<int, double>>> rows;

    std::vector<std::vector<double>> metric;
    std::vector<std::vector<int>> adjacency;
    std::vector<double> positions;

    int size() const { return static_cast<int>(rows.size()); }

    /// Checks row sums within 1e-12, entries >= 0, indices in range.
    void validate() const;

    static FiniteKernel from_dense(const std::vector<std::vector<double>>& rows,
                                   std::vector<std::string> states = {});
    DenseMatrix to_dense() const;
    double entry(int from, int to) const;
};

/// (L0 f)(x) = sum_y rows[x][y] f(y).
std::vector<double> apply_averaging(const FiniteKernel& kernel, std::span<const double> f);
std::vector<std::complex<double>> apply_averaging(const FiniteKernel& kernel,
                                                  std::span<const std::complex<double>> f);

struct StationaryMeasure {
    std::vector<double> weights;
    double residual = 0.0;  // ||mu L0 - mu||_1 at acceptance
};

/// Left fixed vector by damped power iteration from the uniform vector.
/// Damping by (I+L0)/2 keeps the same fixed points and converges even for
/// periodic kernels with a unique stationary law.
StationaryMeasure stationary_measure(const FiniteKernel& kernel, double tol = 1e-12,
                                     int max_iter = 100000);

enum class GapProvenance { Analytic, User, Estimated };

std::string provenance_name(GapProvenance p);
GapProvenance provenance_from_name(const std::string& name);

/// A contraction gap delta0 with provenance. Estimated certificates are
/// flagged non-certified in every downstream report; degenerate gaps
/// (delta0 <= 0) are rejected here, not at kernel construction, so that
/// periodic kernels remain representable as negative test cases.
struct GapCertificate {
    double delta0 = 0.0;
    std::string space = "any";
    GapProvenance provenance = GapProvenance::User;
    double safety_factor = 1.0;

    bool certified() const { return provenance != GapProvenance::Estimated; }
    bool operator==(const GapCertificate&) const = default;

    static GapCertificate analytic(double delta0, std::string space = "any");
    static GapCertificate user(double delta0, std::string space = "any");
    static GapCertificate estimated(double delta0, std::string space, double safety_factor);
};

/// Exact contraction factor for the two analytic families:
///   - theta-lazy-i.i.d. rows (1-theta) e_x + theta nu: delta0 = theta in any
///     admissible norm (L0 acts as (1-theta) I on ker nu);
///   - two-state kernels: delta0 = 1 - |1-p-q| (ker mu0 is the eigenline of
///     the second eigenvalue).
/// Returns nothing when the kernel is not recognized.
std::optional<double> contraction_factor_exact_rank1(const FiniteKernel& kernel);

struct AscentOptions {
    int restarts = 6;
    int sweeps = 48;
    std::uint64_t seed = 0x5eedULL;
};

struct RatioMaximum {
    double ratio = 0.0;
    std::vector<double> witness;
};

/// Lower bound on the operator norm of A in the given space, by random
/// restarts plus coordinate ascent on ||A f|| / ||f||. When mu0 is non-null
/// the search is restricted to ker mu0 (ascent directions are projected).
RatioMaximum max_norm_ratio(const DenseMatrix& A, const FunctionSpace& space,
                            const double* mu0, const AscentOptions& opts);

struct GapEstimate {
    GapCertificate certificate;
    double max_ratio = 0.0;          // best ||L0 f|| / ||f|| found on ker mu0
    std::vector<double> witness;     // maximizing f
};

/// Heuristic gap estimate: delta0_hat = safety * (1 - max ratio found).
/// The maximization only lower-bounds the true operator norm, so the raw
/// estimate could overstate the gap; the safety factor and the Estimated
/// provenance keep downstream reports honest.
GapEstimate estimate_gap(const FiniteKernel& kernel, const FunctionSpace& space,
                         const AscentOptions& opts = {}, double safety_factor = 0.9);

/// k-step kernel (matrix power); rows renormalized to kill 1e-15 drift.
/// k = 0 is rejected.
FiniteKernel iterate_kernel(const FiniteKernel& kernel, int k);

/// Chain-spec file wire format (JSON): {"states": [...],
/// "rows": [{"from": i, "to": j, "p": x}, ...], "metric": ...,
/// "adjacency": ..., "positions": ...}. Probabilities parse as decimal
/// doubles; bit-exactness is not required.
FiniteKernel load_chain_spec(const std::string& path);
FiniteKernel parse_chain_spec(const std::string& json_text);
std::string chain_spec_json(const FiniteKernel& kernel);

}  // namespace spectral
