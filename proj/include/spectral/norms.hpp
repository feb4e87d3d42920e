#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spectral {

/// The four Banach-algebra function spaces supported by the library. Every
/// norm has the shape ||f|| = ||f||_inf + V(f) with a seminorm V that
/// vanishes on constants, dominates nothing, and satisfies
/// V(fg) <= ||f||_inf V(g) + V(f) ||g||_inf, so ||1|| = 1 and
/// ||fg|| <= ||f|| ||g|| hold by construction.
enum class SpaceKind {
    SupOsc,             ///< V(f) = sup f - inf f (diameter for complex f)
    WeightedLipschitz,  ///< V(f) = weight * max |f(x)-f(y)| / d(x,y)
    LocalTV,            ///< V(f) = max_x sum_{y ~ x} |f(y)-f(x)|
    BVInterval,         ///< V(f) = total variation along the state order
};

/// Norm descriptor. Annotations are only consulted for the kind that needs
/// them; a missing annotation is a "space/kind mismatch" error at evaluation.
struct FunctionSpace {
    SpaceKind kind = SpaceKind::SupOsc;

    /// Pairwise distances, indexed [x][y] (WeightedLipschitz).
    std::vector<std::vector<double>> metric;
    /// Positive multiplier on the Lipschitz seminorm (e.g. N for the hypercube).
    double weight = 1.0;
    /// Neighbor lists (LocalTV).
    std::vector<std::vector<int>> adjacency;
    /// Optional state coordinates for BVInterval; index order when absent.
    std::vector<double> positions;

    static FunctionSpace sup_osc();
    static FunctionSpace weighted_lipschitz(std::vector<std::vector<double>> metric,
                                            double weight);
    static FunctionSpace local_tv(std::vector<std::vector<int>> adjacency);
    static FunctionSpace bv_interval(std::vector<double> positions = {});

    /// Short id used in reports and CLI specs: suposc | lip | localtv | bv.
    std::string name() const;
};

double sup_norm(std::span<const double> f);
double sup_norm(std::span<const std::complex<double>> f);

double seminorm(const FunctionSpace& space, std::span<const double> f);
double seminorm(const FunctionSpace& space, std::span<const std::complex<double>> f);

/// ||f|| = sup_norm(f) + seminorm(f).
double norm(const FunctionSpace& space, std::span<const double> f);
double norm(const FunctionSpace& space, std::span<const std::complex<double>> f);

/// Banach-algebra check ||fg|| <= ||f|| ||g||, with a small relative slack for
/// floating-point noise.
bool check_algebra(const FunctionSpace& space, std::span<const double> f,
                   std::span<const double> g, double rel_slack = 1e-12);

/// Piecewise-constant function on an interval: values[i] on
/// (breakpoints[i-1], breakpoints[i]); values has one more entry than
/// breakpoints. This representation is exact, closed under products and
/// under affine maps of the line, and covers indicator observables.
struct PiecewiseConstant {
    std::vector<double> breakpoints;  // strictly increasing
    std::vector<double> values;

    double evaluate(double x) const;
    static PiecewiseConstant indicator(double lo, double hi);
};

double sup_norm(const PiecewiseConstant& f);
double total_variation(const PiecewiseConstant& f);
/// ||f||_BV = sup|f| + TV(f).
double bv_norm(const PiecewiseConstant& f);
PiecewiseConstant pc_multiply(const PiecewiseConstant& f, const PiecewiseConstant& g);
bool check_algebra(const PiecewiseConstant& f, const PiecewiseConstant& g,
                   double rel_slack = 1e-12);

/// A real observable on a finite state set, together with its norm data in a
/// fixed space. For samplable (non-finite) chains `values` stays empty and the
/// norm data is user-asserted; the library never estimates a norm it cannot
/// certify.
struct Observable {
    std::vector<double> values;
    double norm_value = 0.0;
    double seminorm_value = 0.0;
    std::optional<double> mean_under;  // cached mu0(phi)

    static Observable from_values(const FunctionSpace& space, std::vector<double> values);
    static Observable asserted(double norm_value, double seminorm_value);
};

/// Reduced centered version (phi - mu0(phi)) / sigma(phi) with recomputed
/// norm data; requires sigma2 > 0. The result has mu0-mean 0 to within
/// machine precision and caches it.
Observable normalize_observable(const FunctionSpace& space, const Observable& phi,
                                std::span<const double> mu0, double sigma2);

}  // namespace spectral
