#include "spectral/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "spectral/rng.hpp"

namespace spectral {

namespace {
constexpr double kRowSumTol = 1e-12;
}

void FiniteKernel::validate() const {
    const int n = size();
    if (n == 0) throw std::invalid_argument("kernel has no states");
    if (!states.empty() && static_cast<int>(states.size()) != n)
        throw std::invalid_argument("kernel state labels do not match row count");
    for (int x = 0; x < n; ++x) {
        double sum = 0.0;
        int prev = -1;
        for (const auto& [y, p] : rows[x]) {
            if (y < 0 || y >= n) throw std::invalid_argument("kernel column index out of range");
            if (y <= prev) throw std::invalid_argument("kernel row entries must be sorted by column");
            prev = y;
            if (!(p >= 0.0) || !std::isfinite(p))
                throw std::invalid_argument("kernel probabilities must be non-negative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw std::invalid_argument("kernel row does not sum to 1 within 1e-12");
    }
}

FiniteKernel FiniteKernel::from_dense(const std::vector<std::vector<double>>& dense,
                                      std::vector<std::string> states) {
    FiniteKernel k;
    const int n = static_cast<int>(dense.size());
    k.rows.resize(n);
    for (int x = 0; x < n; ++x) {
        if (static_cast<int>(dense[x].size()) != n)
            throw std::invalid_argument("dense kernel must be square");
        for (int y = 0; y < n; ++y)
            if (dense[x][y] != 0.0) k.rows[x].emplace_back(y, dense[x][y]);
    }
    if (states.empty()) {
        for (int i = 0; i < n; ++i) k.states.push_back(std::to_string(i));
    } else {
        k.states = std::move(states);
    }
    k.validate();
    return k;
}

DenseMatrix FiniteKernel::to_dense() const {
    DenseMatrix m = DenseMatrix::zero(size());
    for (int x = 0; x < size(); ++x)
        for (const auto& [y, p] : rows[x]) m.at(x, y) = p;
    return m;
}

double FiniteKernel::entry(int from, int to) const {
    for (const auto& [y, p] : rows[from])
        if (y == to) return p;
    return 0.0;
}

std::vector<double> apply_averaging(const FiniteKernel& kernel, std::span<const double> f) {
    if (static_cast<int>(f.size()) != kernel.size())
        throw std::invalid_argument("dimension mismatch");
    std::vector<double> out(kernel.size(), 0.0);
    for (int x = 0; x < kernel.size(); ++x) {
        double s = 0.0;
        for (const auto& [y, p] : kernel.rows[x]) s += p * f[y];
        out[x] = s;
    }
    return out;
}

std::vector<std::complex<double>> apply_averaging(const FiniteKernel& kernel,
                                                  std::span<const std::complex<double>> f) {
    if (static_cast<int>(f.size()) != kernel.size())
        throw std::invalid_argument("dimension mismatch");
    std::vector<std::complex<double>> out(kernel.size());
    for (int x = 0; x < kernel.size(); ++x) {
        std::complex<double> s = 0.0;
        for (const auto& [y, p] : kernel.rows[x]) s += p * f[y];
        out[x] = s;
    }
    return out;
}

StationaryMeasure stationary_measure(const FiniteKernel& kernel, double tol, int max_iter) {
    kernel.validate();
    const int n = kernel.size();
    std::vector<double> mu(n, 1.0 / n), next(n), image(n);

    auto left_apply = [&](const std::vector<double>& v, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (int x = 0; x < n; ++x)
            for (const auto& [y, p] : kernel.rows[x]) out[y] += v[x] * p;
    };

    double residual = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        left_apply(mu, image);
        residual = 0.0;
        for (int i = 0; i < n; ++i) residual += std::abs(image[i] - mu[i]);
        if (residual <= tol) {
            StationaryMeasure out;
            out.weights = std::move(mu);
            out.residual = residual;
            return out;
        }
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            next[i] = 0.5 * (image[i] + mu[i]);
            sum += next[i];
        }
        for (int i = 0; i < n; ++i) mu[i] = next[i] / sum;
    }
    std::ostringstream msg;
    msg << "stationary measure did not converge after " << max_iter
        << " iterations; residual " << residual;
    throw std::runtime_error(msg.str());
}

std::string provenance_name(GapProvenance p) {
    switch (p) {
        case GapProvenance::Analytic: return "analytic";
        case GapProvenance::User: return "user";
        case GapProvenance::Estimated: return "estimated";
    }
    return "?";
}

GapProvenance provenance_from_name(const std::string& name) {
    if (name == "analytic") return GapProvenance::Analytic;
    if (name == "user") return GapProvenance::User;
    if (name == "estimated") return GapProvenance::Estimated;
    throw std::invalid_argument("unknown gap provenance: " + name);
}

namespace {
GapCertificate make_certificate(double delta0, std::string space, GapProvenance prov,
                                double safety) {
    if (!std::isfinite(delta0) || !(delta0 > 0.0) || delta0 > 1.0)
        throw std::invalid_argument("gap certificate requires delta0 in (0,1]");
    if (!(safety > 0.0) || safety > 1.0)
        throw std::invalid_argument("gap certificate safety factor must lie in (0,1]");
    GapCertificate c;
    c.delta0 = delta0;
    c.space = std::move(space);
    c.provenance = prov;
    c.safety_factor = safety;
    return c;
}
}  // namespace

GapCertificate GapCertificate::analytic(double delta0, std::string space) {
    return make_certificate(delta0, std::move(space), GapProvenance::Analytic, 1.0);
}

GapCertificate GapCertificate::user(double delta0, std::string space) {
    return make_certificate(delta0, std::move(space), GapProvenance::User, 1.0);
}

GapCertificate GapCertificate::estimated(double delta0, std::string space, double safety_factor) {
    return make_certificate(delta0, std::move(space), GapProvenance::Estimated, safety_factor);
}

std::optional<double> contraction_factor_exact_rank1(const FiniteKernel& kernel) {
    kernel.validate();
    const int n = kernel.size();
    if (n == 1) return 1.0;  // ker mu0 = {0}: contraction is vacuous
    if (n == 2) {
        const double p = kernel.entry(0, 1);
        const double q = kernel.entry(1, 0);
        return 1.0 - std::abs(1.0 - p - q);
    }

    // theta-lazy-i.i.d. recognition: off-diagonal column entries must agree.
    if (n > 2048) return std::nullopt;  // recognition targets desk-scale analytic families
    constexpr double tol = 1e-12;
    std::vector<double> c(n, 0.0);
    std::vector<std::vector<double>> columns(n);
    for (int y = 0; y < n; ++y) columns[y].assign(n, 0.0);
    for (int x = 0; x < n; ++x)
        for (const auto& [y, p] : kernel.rows[x]) columns[y][x] = p;

    double theta = 0.0;
    for (int y = 0; y < n; ++y) {
        double ref = 0.0;
        bool have_ref = false;
        for (int x = 0; x < n; ++x) {
            if (x == y) continue;
            if (!have_ref) {
                ref = columns[y][x];
                have_ref = true;
            } else if (std::abs(columns[y][x] - ref) > tol) {
                return std::nullopt;
            }
        }
        c[y] = ref;
        theta += ref;
    }
    if (theta < -tol || theta > 1.0 + 1e-9) return std::nullopt;
    theta = std::clamp(theta, 0.0, 1.0);
    for (int x = 0; x < n; ++x) {
        const double want = 1.0 - theta + c[x];
        if (std::abs(columns[x][x] - want) > 1e-9) return std::nullopt;
    }
    return theta;
}

RatioMaximum max_norm_ratio(const DenseMatrix& A, const FunctionSpace& space,
                            const double* mu0, const AscentOptions& opts) {
    const int n = A.n;
    if (n <= 0) throw std::invalid_argument("empty matrix");
    std::vector<double> a_one(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a_one[i] += A.at(i, j);

    auto project = [&](std::vector<double>& f) {
        if (!mu0) return;
        double m = 0.0;
        for (int i = 0; i < n; ++i) m += mu0[i] * f[i];
        for (double& v : f) v -= m;
    };

    RatioMaximum best;
    best.ratio = -1.0;  // a zero operator still yields a witness with ratio 0
    std::vector<double> g(n), Ag(n);
    for (int restart = 0; restart < opts.restarts; ++restart) {
        Pcg64 rng(opts.seed, static_cast<std::uint64_t>(restart));
        std::vector<double> f(n);
        for (int i = 0; i < n; ++i) f[i] = rng.normal();
        project(f);
        double nf = norm(space, f);
        if (!(nf > 1e-12)) continue;
        for (double& v : f) v /= nf;

        std::vector<double> Af = A.apply(f);
        double ratio = norm(space, Af);  // ||f|| = 1 here
        double h = 0.25;

        for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
            bool improved = false;
            for (int i = 0; i < n; ++i) {
                for (double s : {h, -h}) {
                    g = f;
                    g[i] += s;
                    Ag = Af;
                    for (int r = 0; r < n; ++r) Ag[r] += s * A.at(r, i);
                    if (mu0) {
                        // g = f + s e_i - s mu0_i 1 keeps the candidate in ker mu0.
                        const double shift = s * mu0[i];
                        for (int r = 0; r < n; ++r) {
                            g[r] -= shift;
                            Ag[r] -= shift * a_one[r];
                        }
                    }
                    const double ng = norm(space, g);
                    if (!(ng > 1e-12)) continue;
                    const double r2 = norm(space, Ag) / ng;
                    if (r2 > ratio * (1.0 + 1e-14)) {
                        f = g;
                        Af = Ag;
                        ratio = r2;
                        improved = true;
                    }
                }
            }
            // Refresh scale and the cached image to cancel incremental drift.
            const double scale = norm(space, f);
            if (scale > 1e-12) {
                for (double& v : f) v /= scale;
            }
            Af = A.apply(f);
            ratio = norm(space, Af) / norm(space, f);
            if (!improved) {
                h *= 0.5;
                if (h < 1e-8) break;
            }
        }
        if (ratio > best.ratio) {
            best.ratio = ratio;
            best.witness = f;
        }
    }
    if (best.witness.empty()) throw std::runtime_error("norm-ratio ascent found no usable direction");
    best.ratio = std::max(best.ratio, 0.0);
    return best;
}

GapEstimate estimate_gap(const FiniteKernel& kernel, const FunctionSpace& space,
                         const AscentOptions& opts, double safety_factor) {
    kernel.validate();
    if (kernel.size() > 4096)
        throw std::invalid_argument("estimate_gap: kernel too large for dense ascent");
    const StationaryMeasure mu = stationary_measure(kernel);
    const DenseMatrix A = kernel.to_dense();
    const RatioMaximum found = max_norm_ratio(A, space, mu.weights.data(), opts);
    if (found.ratio >= 1.0)
        throw std::runtime_error("no contraction detected in this norm");
    GapEstimate out;
    out.max_ratio = found.ratio;
    out.witness = found.witness;
    out.certificate = GapCertificate::estimated(safety_factor * (1.0 - found.ratio),
                                                space.name(), safety_factor);
    return out;
}

FiniteKernel iterate_kernel(const FiniteKernel& kernel, int k) {
    kernel.validate();
    if (k < 1) throw std::invalid_argument("iterate_kernel requires k >= 1");
    if (k == 1) return kernel;

    const int n = kernel.size();
    FiniteKernel out = kernel;
    std::vector<double> acc(n);
    for (int step = 1; step < k; ++step) {
        std::vector<std::vector<std::pair<int, double>>> next(n);
        for (int x = 0; x < n; ++x) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (const auto& [mid, p] : out.rows[x])
                for (const auto& [y, q] : kernel.rows[mid]) acc[y] += p * q;
            double sum = 0.0;
            for (double v : acc) sum += v;
            auto& row = next[x];
            for (int y = 0; y < n; ++y)
                if (acc[y] > 0.0) row.emplace_back(y, acc[y] / sum);
        }
        out.rows = std::move(next);
    }
    out.validate();
    return out;
}

FiniteKernel parse_chain_spec(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    FiniteKernel k;
    if (!j.contains("states") || !j.contains("rows"))
        throw std::invalid_argument("chain spec needs 'states' and 'rows'");
    for (const auto& s : j["states"]) {
        if (s.is_string())
            k.states.push_back(s.get<std::string>());
        else
            k.states.push_back(s.dump());
    }
    const int n = static_cast<int>(k.states.size());
    k.rows.resize(n);
    for (const auto& e : j["rows"]) {
        const int from = e.at("from").get<int>();
        const int to = e.at("to").get<int>();
        const double p = e.at("p").get<double>();
        if (from < 0 || from >= n) throw std::invalid_argument("chain spec: 'from' out of range");
        k.rows[from].emplace_back(to, p);
    }
    for (auto& row : k.rows) std::sort(row.begin(), row.end());
    if (j.contains("metric")) k.metric = j["metric"].get<std::vector<std::vector<double>>>();
    if (j.contains("adjacency")) k.adjacency = j["adjacency"].get<std::vector<std::vector<int>>>();
    if (j.contains("positions")) k.positions = j["positions"].get<std::vector<double>>();
    k.validate();
    return k;
}

FiniteKernel load_chain_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open chain spec file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_chain_spec(buf.str());
}

std::string chain_spec_json(const FiniteKernel& kernel) {
    nlohmann::json j;
    j["states"] = kernel.states;
    nlohmann::json rows = nlohmann::json::array();
    for (int x = 0; x < kernel.size(); ++x)
        for (const auto& [y, p] : kernel.rows[x])
            rows.push_back({{"from", x}, {"to", y}, {"p", p}});
    j["rows"] = rows;
    if (!kernel.metric.empty()) j["metric"] = kernel.metric;
    if (!kernel.adjacency.empty()) j["adjacency"] = kernel.adjacency;
    if (!kernel.positions.empty()) j["positions"] = kernel.positions;
    return j.dump(2);
}

}  // namespace spectral
