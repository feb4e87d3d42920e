#include "spectral/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace spectral {

namespace {

void require_finite(std::span<const double> f) {
    for (double v : f) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite observable value");
    }
}

void require_finite(std::span<const std::complex<double>> f) {
    for (const auto& v : f) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("non-finite observable value");
    }
}

// Order of states for the BVInterval seminorm: by coordinate when positions
// are given, by index otherwise.
std::vector<int> bv_order(const FunctionSpace& space, std::size_t n) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (!space.positions.empty()) {
        if (space.positions.size() != n)
            throw std::invalid_argument("space/kind mismatch: positions size");
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return space.positions[a] < space.positions[b];
        });
    }
    return order;
}

template <typename T>
double seminorm_impl(const FunctionSpace& space, std::span<const T> f) {
    if (f.empty()) throw std::invalid_argument("empty observable");
    require_finite(f);
    const std::size_t n = f.size();
    switch (space.kind) {
        case SpaceKind::SupOsc: {
            // Diameter sup_{x,y} |f(x)-f(y)|; equals sup f - inf f for real f.
            if constexpr (std::is_same_v<T, double>) {
                auto [lo, hi] = std::minmax_element(f.begin(), f.end());
                return *hi - *lo;
            } else {
                double best = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = i + 1; j < n; ++j)
                        best = std::max(best, std::abs(f[i] - f[j]));
                return best;
            }
        }
        case SpaceKind::WeightedLipschitz: {
            if (space.metric.size() != n)
                throw std::invalid_argument("space/kind mismatch: metric missing or wrong size");
            if (!(space.weight > 0))
                throw std::invalid_argument("space/kind mismatch: non-positive weight");
            double lip = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (space.metric[i].size() != n)
                    throw std::invalid_argument("space/kind mismatch: metric row size");
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double d = space.metric[i][j];
                    if (!(d > 0)) throw std::invalid_argument("metric must be positive off-diagonal");
                    lip = std::max(lip, std::abs(f[i] - f[j]) / d);
                }
            }
            return space.weight * lip;
        }
        case SpaceKind::LocalTV: {
            if (space.adjacency.size() != n)
                throw std::invalid_argument("space/kind mismatch: adjacency missing or wrong size");
            double best = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (int j : space.adjacency[i]) {
                    if (j < 0 || static_cast<std::size_t>(j) >= n)
                        throw std::invalid_argument("adjacency index out of range");
                    s += std::abs(f[j] - f[i]);
                }
                best = std::max(best, s);
            }
            return best;
        }
        case SpaceKind::BVInterval: {
            const auto order = bv_order(space, n);
            double tv = 0.0;
            for (std::size_t k = 1; k < n; ++k)
                tv += std::abs(f[order[k]] - f[order[k - 1]]);
            return tv;
        }
    }
    throw std::logic_error("unknown space kind");
}

}  // namespace

FunctionSpace FunctionSpace::sup_osc() { return FunctionSpace{SpaceKind::SupOsc, {}, 1.0, {}, {}}; }

FunctionSpace FunctionSpace::weighted_lipschitz(std::vector<std::vector<double>> metric,
                                                double weight) {
    FunctionSpace s;
    s.kind = SpaceKind::WeightedLipschitz;
    s.metric = std::move(metric);
    s.weight = weight;
    return s;
}

FunctionSpace FunctionSpace::local_tv(std::vector<std::vector<int>> adjacency) {
    FunctionSpace s;
    s.kind = SpaceKind::LocalTV;
    s.adjacency = std::move(adjacency);
    return s;
}

FunctionSpace FunctionSpace::bv_interval(std::vector<double> positions) {
    FunctionSpace s;
    s.kind = SpaceKind::BVInterval;
    s.positions = std::move(positions);
    return s;
}

std::string FunctionSpace::name() const {
    switch (kind) {
        case SpaceKind::SupOsc: return "suposc";
        case SpaceKind::WeightedLipschitz: return "lip";
        case SpaceKind::LocalTV: return "localtv";
        case SpaceKind::BVInterval: return "bv";
    }
    return "?";
}

double sup_norm(std::span<const double> f) {
    if (f.empty()) throw std::invalid_argument("empty observable");
    require_finite(f);
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

double sup_norm(std::span<const std::complex<double>> f) {
    if (f.empty()) throw std::invalid_argument("empty observable");
    require_finite(f);
    double m = 0.0;
    for (const auto& v : f) m = std::max(m, std::abs(v));
    return m;
}

double seminorm(const FunctionSpace& space, std::span<const double> f) {
    return seminorm_impl<double>(space, f);
}

double seminorm(const FunctionSpace& space, std::span<const std::complex<double>> f) {
    return seminorm_impl<std::complex<double>>(space, f);
}

double norm(const FunctionSpace& space, std::span<const double> f) {
    return sup_norm(f) + seminorm(space, f);
}

double norm(const FunctionSpace& space, std::span<const std::complex<double>> f) {
    return sup_norm(f) + seminorm(space, f);
}

bool check_algebra(const FunctionSpace& space, std::span<const double> f,
                   std::span<const double> g, double rel_slack) {
    if (f.size() != g.size()) throw std::invalid_argument("check_algebra: size mismatch");
    std::vector<double> fg(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) fg[i] = f[i] * g[i];
    const double lhs = norm(space, fg);
    const double rhs = norm(space, f) * norm(space, g);
    return lhs <= rhs * (1.0 + rel_slack) + std::numeric_limits<double>::min();
}

double PiecewiseConstant::evaluate(double x) const {
    std::size_t i = std::upper_bound(breakpoints.begin(), breakpoints.end(), x) -
                    breakpoints.begin();
    return values[i];
}

PiecewiseConstant PiecewiseConstant::indicator(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("indicator: need lo < hi");
    return PiecewiseConstant{{lo, hi}, {0.0, 1.0, 0.0}};
}

double sup_norm(const PiecewiseConstant& f) {
    if (f.values.empty()) throw std::invalid_argument("empty observable");
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

double total_variation(const PiecewiseConstant& f) {
    double tv = 0.0;
    for (std::size_t i = 1; i < f.values.size(); ++i)
        tv += std::abs(f.values[i] - f.values[i - 1]);
    return tv;
}

double bv_norm(const PiecewiseConstant& f) { return sup_norm(f) + total_variation(f); }

PiecewiseConstant pc_multiply(const PiecewiseConstant& f, const PiecewiseConstant& g) {
    PiecewiseConstant out;
    out.breakpoints.reserve(f.breakpoints.size() + g.breakpoints.size());
    std::merge(f.breakpoints.begin(), f.breakpoints.end(), g.breakpoints.begin(),
               g.breakpoints.end(), std::back_inserter(out.breakpoints));
    out.breakpoints.erase(std::unique(out.breakpoints.begin(), out.breakpoints.end()),
                          out.breakpoints.end());
    std::size_t fi = 0, gi = 0;
    out.values.resize(out.breakpoints.size() + 1);
    for (std::size_t k = 0; k <= out.breakpoints.size(); ++k) {
        out.values[k] = f.values[fi] * g.values[gi];
        if (k < out.breakpoints.size()) {
            const double b = out.breakpoints[k];
            if (fi < f.breakpoints.size() && f.breakpoints[fi] == b) ++fi;
            if (gi < g.breakpoints.size() && g.breakpoints[gi] == b) ++gi;
        }
    }
    return out;
}

bool check_algebra(const PiecewiseConstant& f, const PiecewiseConstant& g, double rel_slack) {
    const double lhs = bv_norm(pc_multiply(f, g));
    const double rhs = bv_norm(f) * bv_norm(g);
    return lhs <= rhs * (1.0 + rel_slack) + std::numeric_limits<double>::min();
}

Observable Observable::from_values(const FunctionSpace& space, std::vector<double> values) {
    Observable obs;
    obs.seminorm_value = seminorm(space, values);
    obs.norm_value = sup_norm(values) + obs.seminorm_value;
    obs.values = std::move(values);
    return obs;
}

Observable Observable::asserted(double norm_value, double seminorm_value) {
    if (!(norm_value >= 0) || !(seminorm_value >= 0) || seminorm_value > norm_value)
        throw std::invalid_argument("asserted norm data must satisfy 0 <= V <= ||.||");
    Observable obs;
    obs.norm_value = norm_value;
    obs.seminorm_value = seminorm_value;
    return obs;
}

Observable normalize_observable(const FunctionSpace& space, const Observable& phi,
                                std::span<const double> mu0, double sigma2) {
    if (!(sigma2 > 0))
        throw std::invalid_argument("degenerate variance; Berry-Esseen inapplicable");
    if (phi.values.empty())
        throw std::invalid_argument("normalize_observable needs explicit values");
    if (phi.values.size() != mu0.size())
        throw std::invalid_argument("normalize_observable: dimension mismatch");

    const double sigma = std::sqrt(sigma2);
    double mean = 0.0;
    for (std::size_t i = 0; i < mu0.size(); ++i) mean += mu0[i] * phi.values[i];

    std::vector<double> tilde(phi.values.size());
    for (std::size_t i = 0; i < tilde.size(); ++i)
        tilde[i] = (phi.values[i] - mean) / sigma;
    // One compensation pass to cancel the rounding of the first centering.
    double drift = 0.0;
    for (std::size_t i = 0; i < mu0.size(); ++i) drift += mu0[i] * tilde[i];
    for (double& v : tilde) v -= drift;

    Observable out = Observable::from_values(space, std::move(tilde));
    out.mean_under = 0.0;
    return out;
}

}  // namespace spectral
