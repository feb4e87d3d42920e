#include "spectral/chains.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace spectral {

namespace {
constexpr int kMaxExplicitN = 20;   // 2^20 sparse rows is the practical ceiling
constexpr int kMaxLipMetricN = 10;  // dense 2^N x 2^N Hamming metric
constexpr int kMaxAdjacencyN = 14;
}  // namespace

std::uint32_t HypercubeChain::step(std::uint32_t x, Pcg64& rng) const {
    const std::uint32_t slot = static_cast<std::uint32_t>(rng.below(static_cast<std::uint64_t>(N)));
    const std::uint32_t coin = static_cast<std::uint32_t>(rng.next() >> 63);
    return (x & ~(1u << slot)) | (coin << slot);
}

std::vector<double> HypercubeChain::polarization_values() const {
    const std::size_t size = std::size_t(1) << N;
    std::vector<double> v(size);
    for (std::size_t x = 0; x < size; ++x)
        v[x] = static_cast<double>(std::popcount(static_cast<std::uint32_t>(x))) / N;
    return v;
}

std::vector<double> HypercubeChain::halfcube_values() const {
    const std::size_t size = std::size_t(1) << N;
    std::vector<double> v(size);
    for (std::size_t x = 0; x < size; ++x) v[x] = (x & 1u) == 0 ? 1.0 : 0.0;
    return v;
}

Observable HypercubeChain::polarization() const {
    if (explicit_kernel && has_lip_space)
        return Observable::from_values(lip_space, polarization_values());
    // Lip(rho) = 1/N exactly (adjacent vertices differ by one coordinate), so
    // ||rho||_L = 1 + N (1/N) = 2 for every N.
    Observable obs = Observable::asserted(2.0, 1.0);
    if (explicit_kernel) obs.values = polarization_values();
    return obs;
}

Observable HypercubeChain::halfcube_indicator() const {
    if (explicit_kernel && has_w_space)
        return Observable::from_values(w_space, halfcube_values());
    // Exactly one neighbor (flipping coordinate 1) crosses the boundary, so
    // the local total variation is 1 at every vertex and the norm is 2.
    Observable obs = Observable::asserted(2.0, 1.0);
    if (explicit_kernel) obs.values = halfcube_values();
    return obs;
}

HypercubeChain hypercube(int N) {
    if (N < 1 || N > 31) throw std::invalid_argument("hypercube dimension must be in [1,31]");
    HypercubeChain chain;
    chain.N = N;

    if (N <= kMaxExplicitN) {
        const std::size_t size = std::size_t(1) << N;
        FiniteKernel k;
        k.rows.resize(size);
        k.states.resize(size);
        for (std::size_t x = 0; x < size; ++x) {
            k.states[x] = std::to_string(x);
            auto& row = k.rows[x];
            row.reserve(N + 1);
            const double flip = 1.0 / (2.0 * N);
            row.emplace_back(static_cast<int>(x), 0.5);
            for (int i = 0; i < N; ++i)
                row.emplace_back(static_cast<int>(x ^ (std::size_t(1) << i)), flip);
            std::sort(row.begin(), row.end());
        }
        k.validate();
        chain.kernel = std::move(k);
        chain.explicit_kernel = true;

        if (N <= kMaxAdjacencyN) {
            std::vector<std::vector<int>> adj(size);
            for (std::size_t x = 0; x < size; ++x)
                for (int i = 0; i < N; ++i)
                    adj[x].push_back(static_cast<int>(x ^ (std::size_t(1) << i)));
            chain.kernel.adjacency = adj;
            chain.w_space = FunctionSpace::local_tv(std::move(adj));
            chain.has_w_space = true;
        }
        if (N <= kMaxLipMetricN) {
            std::vector<std::vector<double>> metric(size, std::vector<double>(size));
            for (std::size_t x = 0; x < size; ++x)
                for (std::size_t y = 0; y < size; ++y)
                    metric[x][y] = static_cast<double>(
                        std::popcount(static_cast<std::uint32_t>(x ^ y)));
            chain.kernel.metric = metric;
            chain.lip_space = FunctionSpace::weighted_lipschitz(std::move(metric),
                                                                static_cast<double>(N));
            chain.has_lip_space = true;
        }
    }
    return chain;
}

ScrambledSet scrambled_indicator(const HypercubeChain& chain,
                                 const std::function<bool(std::uint32_t)>& member) {
    if (!chain.explicit_kernel)
        throw std::invalid_argument("scrambled-set verification needs an explicit hypercube");
    const int N = chain.N;
    const std::size_t size = std::size_t(1) << N;
    std::vector<double> values(size);
    for (std::size_t x = 0; x < size; ++x)
        values[x] = member(static_cast<std::uint32_t>(x)) ? 1.0 : 0.0;

    int common = -1;
    for (std::size_t x = 0; x < size; ++x) {
        int same = 0;
        for (int i = 0; i < N; ++i)
            if (values[x ^ (std::size_t(1) << i)] == values[x]) ++same;
        if (common < 0)
            common = same;
        else if (same != common)
            throw std::invalid_argument(
                "set is not scrambled: same-value neighbor count varies across vertices");
    }

    ScrambledSet out;
    out.p = static_cast<double>(common) / (2.0 * N);
    out.indicator = chain.has_w_space ? Observable::from_values(chain.w_space, std::move(values))
                                      : Observable::from_values(FunctionSpace::sup_osc(),
                                                                std::move(values));
    return out;
}

BernoulliChain bernoulli(double lambda) {
    if (!(lambda > 0.5) || !(lambda < 1.0))
        throw std::invalid_argument("bernoulli chain needs lambda in (0.5, 1)");
    if (lambda > 0.99)
        throw std::invalid_argument("iterate count impractical for lambda > 0.99");
    BernoulliChain chain;
    chain.lambda = lambda;
    chain.ell = static_cast<int>(std::floor(1.0 + std::log(2.0) / std::log(1.0 / lambda)));
    chain.x_max = lambda / (1.0 - lambda);
    chain.x_min = -chain.x_max;
    return chain;
}

BoundReport bernoulli_bound(double lambda, double phi_bv_norm, double a, long n) {
    if (!(phi_bv_norm > 0.0)) throw std::invalid_argument("phi BV norm must be positive");
    if (!(a > 0.0)) throw std::invalid_argument("deviation a must be positive");
    const BernoulliChain chain = bernoulli(lambda);
    const double pow2 = std::pow(2.0, chain.ell);
    const double m = 2.0 * pow2 - 1.0;  // 2^{ell+1} - 1

    BoundQuery q;
    q.gap = GapCertificate::analytic(1.0 / m, "bv");
    q.phi_norm = phi_bv_norm;
    q.a = a;
    q.n = n;

    BoundReport r;
    r.theorem = Theorem::AGauss;
    r.regime = "gaussian";
    r.certified = true;
    r.echo = q;

    const double denom = phi_bv_norm * phi_bv_norm * (16.65 * pow2 + 5.12);
    r.raw_value = 2.488 * std::exp(-static_cast<double>(n) * a * a / denom);
    r.value = std::min(r.raw_value, 1.0);

    const double cap = phi_bv_norm / (3.0 * m);
    const double n_min = 120.0 * pow2;
    r.conditions.push_back({"deviation_cap", a < cap, a, cap});
    r.conditions.push_back({"n_min", static_cast<double>(n) >= n_min, static_cast<double>(n), n_min});
    for (const auto& c : r.conditions) {
        if (!c.satisfied) {
            r.applicable = false;
            r.reason = "condition violated: " + c.name;
            r.value = 1.0;
            break;
        }
    }
    return r;
}

FiniteKernel theta_lazy(std::span<const double> nu, double theta) {
    if (!(theta > 0.0) || theta > 1.0)
        throw std::invalid_argument("theta must lie in (0,1]");
    const int n = static_cast<int>(nu.size());
    if (n == 0) throw std::invalid_argument("invalid nu: empty");
    double sum = 0.0;
    for (double v : nu) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("invalid nu: entries");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("invalid nu: does not sum to 1");

    FiniteKernel k;
    k.rows.resize(n);
    k.states.resize(n);
    for (int x = 0; x < n; ++x) {
        k.states[x] = std::to_string(x);
        for (int y = 0; y < n; ++y) {
            double p = theta * nu[y];
            if (y == x) p += 1.0 - theta;
            if (p != 0.0) k.rows[x].emplace_back(y, p);
        }
    }
    k.validate();
    return k;
}

ResolvedChain resolve_chain(const std::string& spec) {
    ResolvedChain out;
    out.id = spec;
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);

    if (head == "hypercube") {
        const int N = std::stoi(rest);
        out.cube = hypercube(N);
        if (out.cube->explicit_kernel) out.kernel = out.cube->kernel;
        return out;
    }
    if (head == "bernoulli") {
        out.ifs = bernoulli(std::stod(rest));
        return out;
    }
    if (head == "theta-lazy") {
        const auto comma = rest.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("theta-lazy spec is theta-lazy:k,theta");
        const int k = std::stoi(rest.substr(0, comma));
        const double theta = std::stod(rest.substr(comma + 1));
        if (k < 1) throw std::invalid_argument("theta-lazy needs k >= 1 states");
        std::vector<double> nu(k, 1.0 / k);
        out.kernel = theta_lazy(nu, theta);
        out.analytic_gap = GapCertificate::analytic(theta, "any");
        return out;
    }
    if (head == "file") {
        out.kernel = load_chain_spec(rest);
        return out;
    }
    throw std::invalid_argument("unknown chain spec: " + spec);
}

}  // namespace spectral
