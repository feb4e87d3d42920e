// spectral-certify: bound evaluation, sample-size planning, variance
// computation, perturbation-estimate verification, simulation and
// bound validation for Markov chains with a contraction gap.
//
// Exit codes: 0 success, 1 usage/input error, 2 inapplicable bound,
// 3 validation failure.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spectral/bounds.hpp"
#include "spectral/chains.hpp"
#include "spectral/kernel.hpp"
#include "spectral/montecarlo.hpp"
#include "spectral/norms.hpp"
#include "spectral/perturbation.hpp"
#include "spectral/variance.hpp"

namespace {

using namespace spectral;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInapplicable = 2;
constexpr int kExitValidationFailure = 3;

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<long> parse_list_long(const std::string& text) {
    std::vector<long> out;
    for (double v : parse_list(text)) out.push_back(static_cast<long>(v));
    return out;
}

void echo(const std::string& key, const std::string& value) {
    std::cout << "# " << key << " = " << value << '\n';
}

void echo(const std::string& key, double value) {
    std::ostringstream s;
    s << std::setprecision(17) << value;
    echo(key, s.str());
}

bool wants_json(const std::string& path) {
    return path.size() >= 5 && path.substr(path.size() - 5) == ".json";
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
}

FunctionSpace resolve_space(const std::string& spec, const ResolvedChain& chain) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    if (head == "suposc") return FunctionSpace::sup_osc();
    if (head == "lip") {
        if (chain.cube && chain.cube->has_lip_space && colon == std::string::npos)
            return chain.cube->lip_space;
        if (!chain.kernel || chain.kernel->metric.empty())
            throw std::invalid_argument("lip norm needs a chain with a metric annotation");
        const double w = colon == std::string::npos ? 1.0 : std::stod(spec.substr(colon + 1));
        return FunctionSpace::weighted_lipschitz(chain.kernel->metric, w);
    }
    if (head == "localtv") {
        if (chain.cube && chain.cube->has_w_space) return chain.cube->w_space;
        if (!chain.kernel || chain.kernel->adjacency.empty())
            throw std::invalid_argument("localtv norm needs a chain with adjacency lists");
        return FunctionSpace::local_tv(chain.kernel->adjacency);
    }
    if (head == "bv") {
        std::vector<double> positions;
        if (chain.kernel) positions = chain.kernel->positions;
        return FunctionSpace::bv_interval(positions);
    }
    throw std::invalid_argument("unknown norm spec: " + spec);
}

Observable resolve_observable(const std::string& spec, const ResolvedChain& chain,
                              const FunctionSpace& space) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    if (head == "values") {
        auto values = parse_list(spec.substr(colon + 1));
        return Observable::from_values(space, std::move(values));
    }
    if (head == "state") {
        if (!chain.kernel) throw std::invalid_argument("state observable needs a finite chain");
        const int idx = std::stoi(spec.substr(colon + 1));
        std::vector<double> values(chain.kernel->size(), 0.0);
        values.at(idx) = 1.0;
        return Observable::from_values(space, std::move(values));
    }
    if (head == "polarization") {
        if (!chain.cube) throw std::invalid_argument("polarization lives on the hypercube");
        if (chain.cube->explicit_kernel)
            return Observable::from_values(space, chain.cube->polarization_values());
        return chain.cube->polarization();
    }
    if (head == "halfcube") {
        if (!chain.cube) throw std::invalid_argument("halfcube lives on the hypercube");
        if (chain.cube->explicit_kernel)
            return Observable::from_values(space, chain.cube->halfcube_values());
        return chain.cube->halfcube_indicator();
    }
    throw std::invalid_argument("unknown observable spec: " + spec);
}

GapCertificate resolve_gap(const ResolvedChain& chain, const FunctionSpace& space,
                           std::optional<double> user_delta0, std::uint64_t seed) {
    if (user_delta0) return GapCertificate::user(*user_delta0, space.name());
    if (chain.analytic_gap) return *chain.analytic_gap;
    if (chain.kernel) {
        if (auto exact = contraction_factor_exact_rank1(*chain.kernel))
            return GapCertificate::analytic(*exact, "any");
        AscentOptions opts;
        opts.seed = seed;
        const GapEstimate est = estimate_gap(*chain.kernel, space, opts);
        std::cout << "# note: gap estimated heuristically (max ratio " << est.max_ratio
                  << "); reports are advisory\n";
        return est.certificate;
    }
    throw std::invalid_argument("no gap certificate available: pass --delta0");
}

void print_bound(const BoundReport& report) {
    std::cout << std::setprecision(12);
    std::cout << "theorem " << theorem_name(report.theorem) << " (" << report.regime << ")\n";
    std::cout << "raw_value   " << report.raw_value << '\n';
    std::cout << "value       " << report.value << '\n';
    std::cout << "applicable  " << (report.applicable ? "yes" : "no") << '\n';
    if (!report.reason.empty()) std::cout << "reason      " << report.reason << '\n';
    std::cout << "certified   " << (report.certified ? "yes" : "no") << '\n';
    for (const auto& c : report.conditions)
        std::cout << "condition   " << c.name << ": value " << c.value << " vs limit " << c.limit
                  << (c.satisfied ? " (ok)" : " (violated)") << '\n';
}

void emit_bound(const BoundReport& report, const std::string& out_path) {
    if (out_path.empty()) return;
    if (wants_json(out_path)) {
        write_file(out_path, bound_report_json(report));
    } else {
        std::ostringstream csv;
        write_bound_csv_header(csv);
        write_bound_csv_row(report, csv);
        write_file(out_path, csv.str());
    }
}

// ---- bound ----------------------------------------------------------------

struct BoundArgs {
    std::string theorem;
    double delta0 = 0.0;
    std::string provenance = "user";
    double safety = 1.0;
    double phi_norm = 0.0;
    double a = 0.0;
    long n = 0;
    std::optional<double> S;
    std::optional<double> U;
    double phi_tilde_norm = 0.0;
    std::string out;
};

int run_bound(const BoundArgs& args) {
    GapCertificate gap = GapCertificate::user(args.delta0);  // validates the range
    gap.provenance = provenance_from_name(args.provenance);
    gap.safety_factor = args.safety;

    BoundQuery q;
    q.gap = gap;
    q.phi_norm = args.phi_norm;
    q.a = args.a;
    q.n = args.n;
    q.S = args.S;
    q.phi_tilde_norm = args.phi_tilde_norm;

    echo("theorem", args.theorem);
    echo("delta0", args.delta0);
    echo("provenance", args.provenance);

    BoundReport report;
    if (args.theorem == "A") {
        if (args.phi_tilde_norm != 0.0)
            throw std::invalid_argument("contradictory flags: --phi-tilde-norm with theorem A");
        echo("phi_norm", args.phi_norm);
        echo("a", args.a);
        echo("n", static_cast<double>(args.n));
        report = concentration_bound(q);
    } else if (args.theorem == "B") {
        echo("phi_norm", args.phi_norm);
        echo("a", args.a);
        echo("n", static_cast<double>(args.n));
        const double U = args.U ? *args.U : u_min(q);
        echo("U", U);
        report = second_order_bound(q, U);
    } else if (args.theorem == "C") {
        if (args.a != 0.0)
            throw std::invalid_argument("contradictory flags: --a with theorem C");
        echo("phi_tilde_norm", args.phi_tilde_norm);
        echo("n", static_cast<double>(args.n));
        report = berry_esseen_bound(q);
    } else {
        throw std::invalid_argument("unknown theorem: " + args.theorem);
    }

    print_bound(report);
    emit_bound(report, args.out);
    return report.applicable ? kExitOk : kExitInapplicable;
}

// ---- plan ------------------------------------------------------------------

struct PlanArgs {
    double beta = 0.0;
    double a = 0.0;
    double delta0 = 0.0;
    double phi_norm = 0.0;
    std::optional<double> S;
    std::string out;
};

int run_plan(const PlanArgs& args) {
    BoundQuery q;
    q.gap = GapCertificate::user(args.delta0);
    q.phi_norm = args.phi_norm;
    q.a = args.a;
    q.beta = args.beta;
    q.S = args.S;

    echo("beta", args.beta);
    echo("a", args.a);
    echo("delta0", args.delta0);
    echo("phi_norm", args.phi_norm);
    if (args.S) echo("S", *args.S);

    BoundReport report;
    try {
        report = plan_sample_size(q);
    } catch (const std::invalid_argument& e) {
        std::cerr << "plan: " << e.what() << '\n';
        return kExitInapplicable;
    }
    std::cout << "planned_n " << static_cast<long>(report.value) << " via " << report.regime
              << '\n';
    print_bound(report);
    emit_bound(report, args.out);
    return kExitOk;
}

// ---- variance ----------------------------------------------------------------

struct VarianceArgs {
    std::string chain;
    std::string observable;
    std::string norm = "suposc";
    std::optional<int> truncate;
    std::optional<double> delta0;
    std::uint64_t seed = 1;
    std::string out;
};

int run_variance(const VarianceArgs& args) {
    const ResolvedChain chain = resolve_chain(args.chain);
    if (!chain.kernel)
        throw std::invalid_argument("variance needs a finite chain (explicit kernel)");
    const FunctionSpace space = resolve_space(args.norm, chain);
    const Observable obs = resolve_observable(args.observable, chain, space);

    echo("chain", args.chain);
    echo("observable", args.observable);
    echo("norm", space.name());

    VarianceResult result;
    if (args.truncate) {
        const GapCertificate gap = resolve_gap(chain, space, args.delta0, args.seed);
        echo("delta0", gap.delta0);
        echo("truncate_K", static_cast<double>(*args.truncate));
        result = dynamical_variance_truncated(*chain.kernel, space, obs.values, *args.truncate,
                                              gap);
    } else {
        result = dynamical_variance_exact(*chain.kernel, obs.values);
    }

    std::cout << std::setprecision(12) << "sigma2 " << result.sigma2 << '\n';
    if (result.tail_bound) std::cout << "tail_bound " << *result.tail_bound << '\n';

    if (!args.out.empty()) {
        std::ostringstream body;
        body << std::setprecision(17);
        if (wants_json(args.out)) {
            body << "{\n  \"sigma2\": " << result.sigma2 << ",\n  \"method\": \""
                 << (result.method == VarianceMethod::ExactSolve ? "exact_solve" : "truncated")
                 << "\"";
            if (result.truncation_K) body << ",\n  \"truncation_K\": " << *result.truncation_K;
            if (result.tail_bound) body << ",\n  \"tail_bound\": " << *result.tail_bound;
            body << "\n}\n";
        } else {
            body << "sigma2,method,truncation_K,tail_bound\n";
            body << result.sigma2 << ','
                 << (result.method == VarianceMethod::ExactSolve ? "exact_solve" : "truncated")
                 << ',';
            if (result.truncation_K) body << *result.truncation_K;
            body << ',';
            if (result.tail_bound) body << *result.tail_bound;
            body << '\n';
        }
        write_file(args.out, body.str());
    }
    return kExitOk;
}

// ---- verify-lemmas ----------------------------------------------------------

struct VerifyArgs {
    std::string chain;
    std::string norm = "suposc";
    std::string suite = "all";
    double phi_scale = 0.9;
    long n = 0;
    std::uint64_t seed = 1;
    std::optional<double> delta0;
    std::string out;
};

int run_verify(const VerifyArgs& args) {
    const ResolvedChain chain = resolve_chain(args.chain);
    if (!chain.kernel) throw std::invalid_argument("verify-lemmas needs a finite chain");
    const FiniteKernel& kernel = *chain.kernel;
    const FunctionSpace space = resolve_space(args.norm, chain);
    const GapCertificate gap = resolve_gap(chain, space, args.delta0, args.seed);

    echo("chain", args.chain);
    echo("norm", space.name());
    echo("delta0", gap.delta0);
    echo("provenance", provenance_name(gap.provenance));
    echo("suite", args.suite);
    echo("phi_scale", args.phi_scale);
    echo("seed", static_cast<double>(args.seed));

    // Random potential at the requested fraction of the smallness radius.
    Pcg64 rng(args.seed);
    std::vector<double> phi(kernel.size());
    for (double& v : phi) v = rng.uniform(-1.0, 1.0);
    const double target = args.phi_scale * smallness_threshold(gap.delta0);
    const double current = norm(space, phi);
    for (double& v : phi) v *= target / current;

    LemmaReport report;
    const bool all = args.suite == "all";
    if (all || args.suite == "5.1" || args.suite == "5.2" || args.suite == "5.3") {
        LemmaReport part = verify_lemma_estimates(kernel, gap, phi, space);
        if (!all) {
            for (const auto& rec : part.records)
                if (rec.lemma_id == args.suite) report.records.push_back(rec);
        } else {
            report.records.insert(report.records.end(), part.records.begin(),
                                  part.records.end());
        }
        report.advisory_only = part.advisory_only;
    }
    if (all || args.suite == "cor5.4") {
        const long n = args.n > 0 ? args.n : std::max<long>(threshold_n(gap.delta0), 200);
        LemmaReport part = verify_corollary_L(kernel, gap, phi, space, n);
        report.records.insert(report.records.end(), part.records.begin(), part.records.end());
        report.advisory_only = report.advisory_only || part.advisory_only;
    }
    if (all || args.suite == "gap-persist") {
        const double delta = gap.delta0 / 13.0;
        const double radius =
            gap.delta0 * (gap.delta0 - delta) / (12.0 * (1.0 + gap.delta0 - delta));
        std::vector<double> small(phi);
        const double cap = args.phi_scale * std::log1p(radius);
        const double cur = norm(space, small);
        for (double& v : small) v *= cap / cur;
        LemmaReport part =
            verify_gap_persistence(kernel, gap, small, space, delta, 30, 16, args.seed);
        report.records.insert(report.records.end(), part.records.begin(), part.records.end());
        report.advisory_only = report.advisory_only || part.advisory_only;
    }
    if (all || args.suite == "7.x") {
        const StationaryMeasure mu = stationary_measure(kernel);
        const double sigma2 = dynamical_variance_exact(kernel, phi).sigma2;
        const Observable tilde = normalize_observable(
            space, Observable::from_values(space, phi), mu.weights, sigma2);
        const long n = args.n >= 10000 ? args.n : 10000;
        LemmaReport part = verify_characteristic_bounds(kernel, gap, tilde.values, space, n);
        report.records.insert(report.records.end(), part.records.begin(), part.records.end());
        report.advisory_only = report.advisory_only || part.advisory_only;
    }

    int failures = 0;
    for (const auto& rec : report.records)
        if (!rec.holds) ++failures;
    std::cout << report.records.size() << " inequalities checked, " << failures << " failed"
              << (report.advisory_only ? " (advisory only: estimated gap)" : "") << '\n';
    for (const auto& rec : report.records)
        if (!rec.holds)
            std::cout << "FAIL " << rec.lemma_id << ' ' << rec.inequality_id << ": lhs "
                      << rec.lhs << " > rhs " << rec.rhs << '\n';

    if (!args.out.empty()) {
        std::ostringstream csv;
        write_lemma_csv(report, csv);
        write_file(args.out, csv.str());
    }
    return failures == 0 ? kExitOk : kExitValidationFailure;
}

// ---- simulate ----------------------------------------------------------------

struct SimulateArgs {
    std::string chain;
    std::string observable;
    std::string norm = "suposc";
    long n = 0;
    long trials = 0;
    std::uint64_t seed = 1;
    std::string a_list = "0.05,0.1,0.2";
    int initial = 0;
    std::optional<double> mu0_override;
    std::string out;
};

int run_simulate(const SimulateArgs& args) {
    const ResolvedChain chain = resolve_chain(args.chain);
    const std::vector<double> a_grid = parse_list(args.a_list);
    SimulationConfig config;
    config.n = args.n;
    config.trials = args.trials;
    config.seed = args.seed;
    config.initial_state = args.initial;

    echo("chain", args.chain);
    echo("observable", args.observable);
    echo("n", static_cast<double>(args.n));
    echo("trials", static_cast<double>(args.trials));
    echo("seed", static_cast<double>(args.seed));

    std::vector<TailEstimate> estimates;
    std::string norm_name = "-";
    if (chain.ifs) {
        const auto colon = args.observable.find(':');
        if (args.observable.substr(0, colon) != "indicator")
            throw std::invalid_argument("bernoulli simulation needs indicator:lo,hi");
        const auto parts = parse_list(args.observable.substr(colon + 1));
        if (parts.size() != 2) throw std::invalid_argument("indicator:lo,hi needs two numbers");
        const PiecewiseConstant ind = PiecewiseConstant::indicator(parts[0], parts[1]);
        double mu0;
        if (args.mu0_override) {
            mu0 = *args.mu0_override;
        } else {
            const Enclosure enc =
                bernoulli_interval_mass(chain.ifs->lambda, parts[0], parts[1]);
            mu0 = 0.5 * (enc.lo + enc.hi);
            echo("mu0_enclosure_lo", enc.lo);
            echo("mu0_enclosure_hi", enc.hi);
            if (enc.hi - enc.lo > 1e-3)
                std::cout << "# warning: stationary mass enclosure wider than 1e-3\n";
        }
        echo("mu0", mu0);
        estimates = simulate_tail_bernoulli(*chain.ifs, ind, mu0, 0.0, config, a_grid);
        norm_name = "bv";
    } else if (chain.kernel) {
        const FunctionSpace space = resolve_space(args.norm, chain);
        const Observable obs = resolve_observable(args.observable, chain, space);
        const StationaryMeasure mu = stationary_measure(*chain.kernel);
        double mu0 = 0.0;
        for (int i = 0; i < chain.kernel->size(); ++i) mu0 += mu.weights[i] * obs.values[i];
        if (args.mu0_override) mu0 = *args.mu0_override;
        echo("mu0", mu0);
        estimates = simulate_tail(*chain.kernel, obs.values, mu0, config, a_grid);
        norm_name = space.name();
    } else if (chain.cube) {
        // sampler-only hypercube: uniform stationary law puts mass 1/2 on
        // both named observables
        std::cout << "# warning: hypercube too large for an explicit kernel; sampler only\n";
        const HypercubeChain cube = *chain.cube;
        std::function<double(std::uint64_t)> observe;
        if (args.observable == "polarization") {
            observe = [N = cube.N](std::uint64_t x) {
                return static_cast<double>(__builtin_popcountll(x)) / N;
            };
            norm_name = "lip";
        } else if (args.observable == "halfcube") {
            observe = [](std::uint64_t x) { return (x & 1u) == 0 ? 1.0 : 0.0; };
            norm_name = "localtv";
        } else {
            throw std::invalid_argument(
                "sampler-only hypercube supports polarization or halfcube");
        }
        const double mu0 = args.mu0_override ? *args.mu0_override : 0.5;
        echo("mu0", mu0);
        auto step = [cube](std::uint64_t x, Pcg64& rng) {
            return static_cast<std::uint64_t>(cube.step(static_cast<std::uint32_t>(x), rng));
        };
        estimates = simulate_tail_sampler(step, observe, mu0,
                                          static_cast<std::uint64_t>(args.initial), config,
                                          a_grid);
    } else {
        throw std::invalid_argument("chain has no simulator");
    }

    ValidationReport report;
    std::cout << std::setprecision(10);
    for (const auto& est : estimates) {
        std::cout << "a " << est.a << "  hits " << est.hits << "  p_hat " << est.p_hat
                  << "  ci_upper_99 " << est.ci_upper_99 << '\n';
        ValidationRow row;
        row.chain = args.chain;
        row.observable = args.observable;
        row.norm = norm_name;
        row.delta0 = 0.0;
        row.certified = false;
        row.theorem = "-";
        row.regime = "-";
        row.a = est.a;
        row.n = args.n;
        row.trials = est.trials;
        row.p_hat = est.p_hat;
        row.ci_upper_99 = est.ci_upper_99;
        row.bound = 1.0;
        row.pass = true;
        report.rows.push_back(std::move(row));
    }
    if (!args.out.empty()) {
        std::ostringstream csv;
        write_validation_csv(report, csv);
        write_file(args.out, csv.str());
    }
    return kExitOk;
}

// ---- validate ----------------------------------------------------------------

struct ValidateArgs {
    std::string theorem = "A";
    std::string chain;
    std::string observable;
    std::string norm = "suposc";
    std::string a_grid = "0.05,0.1,0.15,0.2,0.25,0.3";
    std::string n_grid;
    long trials = 10000;
    std::uint64_t seed = 1;
    std::optional<double> delta0;
    int initial = 0;
    std::string out;
};

int run_validate(const ValidateArgs& args) {
    const ResolvedChain chain = resolve_chain(args.chain);
    if (!chain.kernel) throw std::invalid_argument("validate needs a finite chain");
    const FunctionSpace space = resolve_space(args.norm, chain);
    const Observable obs = resolve_observable(args.observable, chain, space);
    const GapCertificate gap = resolve_gap(chain, space, args.delta0, args.seed);

    echo("theorem", args.theorem);
    echo("chain", args.chain);
    echo("observable", args.observable);
    echo("norm", space.name());
    echo("delta0", gap.delta0);
    echo("provenance", provenance_name(gap.provenance));
    echo("trials", static_cast<double>(args.trials));
    echo("seed", static_cast<double>(args.seed));

    ValidationReport report;
    if (args.theorem == "A") {
        TailValidationSpec spec;
        spec.kernel = *chain.kernel;
        spec.observable = obs;
        spec.space = space;
        spec.gap = gap;
        spec.a_grid = parse_list(args.a_grid);
        spec.n_grid = args.n_grid.empty()
                          ? std::vector<long>{threshold_n(gap.delta0), 4 * threshold_n(gap.delta0)}
                          : parse_list_long(args.n_grid);
        spec.trials = args.trials;
        spec.seed = args.seed;
        spec.initial_state = args.initial;
        spec.chain_id = args.chain;
        spec.observable_id = args.observable;
        report = validate_tail_bounds(spec);
    } else if (args.theorem == "C") {
        BerryEsseenValidationSpec spec;
        spec.kernel = *chain.kernel;
        spec.phi = obs.values;
        spec.space = space;
        spec.gap = gap;
        spec.n_grid = args.n_grid.empty() ? std::vector<long>{100, 400, 1600, 6400}
                                          : parse_list_long(args.n_grid);
        spec.initial_state = args.initial;
        spec.chain_id = args.chain;
        spec.observable_id = args.observable;
        report = validate_berry_esseen(spec);
    } else {
        throw std::invalid_argument("validate supports --theorem A or C");
    }

    int failures = 0;
    for (const auto& row : report.rows)
        if (!row.pass) ++failures;
    std::cout << report.rows.size() << " grid points, " << failures << " failures\n";
    for (const auto& row : report.rows)
        if (!row.pass)
            std::cout << "FAIL a=" << row.a << " n=" << row.n << ": ci " << row.ci_upper_99
                      << " > bound " << row.bound << '\n';

    if (!args.out.empty()) {
        std::ostringstream csv;
        write_validation_csv(report, csv);
        write_file(args.out, csv.str());
    }
    return failures == 0 ? kExitOk : kExitValidationFailure;
}

// ---- report ----------------------------------------------------------------

struct ReportArgs {
    std::string in;
    std::string out;
};

int run_report(const ReportArgs& args) {
    std::ifstream in(args.in);
    if (!in) throw std::runtime_error("cannot open " + args.in);
    std::string header;
    std::getline(in, header);
    in.seekg(0);

    std::ostringstream reemit;
    if (header.rfind("theorem,", 0) == 0) {
        const auto reports = parse_bound_csv(in);
        std::cout << "bound reports: " << reports.size() << '\n';
        write_bound_csv_header(reemit);
        for (const auto& r : reports) write_bound_csv_row(r, reemit);
    } else if (header.rfind("chain,", 0) == 0) {
        const auto report = parse_validation_csv(in);
        int failures = 0;
        for (const auto& row : report.rows)
            if (!row.pass) ++failures;
        std::cout << "validation rows: " << report.rows.size() << ", failures: " << failures
                  << '\n';
        write_validation_csv(report, reemit);
    } else if (header.rfind("lemma_id,", 0) == 0) {
        const auto report = parse_lemma_csv(in);
        int failures = 0;
        for (const auto& rec : report.records)
            if (!rec.holds) ++failures;
        std::cout << "lemma records: " << report.records.size() << ", failures: " << failures
                  << '\n';
        write_lemma_csv(report, reemit);
    } else if (header.rfind("sigma2,", 0) == 0) {
        std::string line;
        std::getline(in, line);  // header
        std::getline(in, line);
        std::cout << "variance record: " << line << '\n';
        reemit << header << '\n' << line << '\n';
    } else {
        throw std::invalid_argument("unrecognized CSV schema in " + args.in);
    }
    if (!args.out.empty()) write_file(args.out, reemit.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified concentration bounds for Markov chains with a contraction gap"};
    app.require_subcommand(1);

    BoundArgs bound_args;
    auto* bound = app.add_subcommand("bound", "evaluate theorem A, B or C");
    bound->add_option("--theorem", bound_args.theorem, "A|B|C")->required();
    bound->add_option("--delta0", bound_args.delta0)->required();
    bound->add_option("--provenance", bound_args.provenance, "analytic|user|estimated");
    bound->add_option("--safety", bound_args.safety);
    bound->add_option("--phi-norm", bound_args.phi_norm);
    bound->add_option("--a", bound_args.a);
    bound->add_option("--n", bound_args.n);
    bound->add_option("--S", bound_args.S);
    bound->add_option("--U", bound_args.U);
    bound->add_option("--phi-tilde-norm", bound_args.phi_tilde_norm);
    bound->add_option("--out", bound_args.out);

    PlanArgs plan_args;
    auto* plan = app.add_subcommand("plan", "invert theorem A/B for a sample size");
    plan->add_option("--beta", plan_args.beta)->required();
    plan->add_option("--a", plan_args.a)->required();
    plan->add_option("--delta0", plan_args.delta0)->required();
    plan->add_option("--phi-norm", plan_args.phi_norm)->required();
    plan->add_option("--S", plan_args.S);
    plan->add_option("--out", plan_args.out);

    VarianceArgs variance_args;
    auto* variance = app.add_subcommand("variance", "dynamical variance of an observable");
    variance->add_option("--chain", variance_args.chain)->required();
    variance->add_option("--observable", variance_args.observable)->required();
    variance->add_option("--norm", variance_args.norm);
    variance->add_option("--truncate", variance_args.truncate);
    variance->add_option("--delta0", variance_args.delta0);
    variance->add_option("--seed", variance_args.seed);
    variance->add_option("--out", variance_args.out);

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand("verify-lemmas", "numerical perturbation-lemma checks");
    verify->add_option("--chain", verify_args.chain)->required();
    verify->add_option("--norm", verify_args.norm);
    verify->add_option("--suite", verify_args.suite, "5.1|5.2|5.3|cor5.4|gap-persist|7.x|all");
    verify->add_option("--phi-scale", verify_args.phi_scale);
    verify->add_option("--n", verify_args.n);
    verify->add_option("--seed", verify_args.seed);
    verify->add_option("--delta0", verify_args.delta0);
    verify->add_option("--out", verify_args.out);

    SimulateArgs simulate_args;
    auto* simulate = app.add_subcommand("simulate", "empirical deviation frequencies");
    simulate->add_option("--chain", simulate_args.chain)->required();
    simulate->add_option("--observable", simulate_args.observable)->required();
    simulate->add_option("--norm", simulate_args.norm);
    simulate->add_option("--n", simulate_args.n)->required();
    simulate->add_option("--trials", simulate_args.trials)->required();
    simulate->add_option("--seed", simulate_args.seed);
    simulate->add_option("--a", simulate_args.a_list);
    simulate->add_option("--initial", simulate_args.initial);
    simulate->add_option("--mu0", simulate_args.mu0_override);
    simulate->add_option("--out", simulate_args.out);

    ValidateArgs validate_args;
    auto* validate = app.add_subcommand("validate", "bound vs simulation / exact DP grid");
    validate->add_option("--theorem", validate_args.theorem, "A|C");
    validate->add_option("--chain", validate_args.chain)->required();
    validate->add_option("--observable", validate_args.observable)->required();
    validate->add_option("--norm", validate_args.norm);
    validate->add_option("--a-grid", validate_args.a_grid);
    validate->add_option("--n-grid", validate_args.n_grid);
    validate->add_option("--trials", validate_args.trials);
    validate->add_option("--seed", validate_args.seed);
    validate->add_option("--delta0", validate_args.delta0);
    validate->add_option("--initial", validate_args.initial);
    validate->add_option("--out", validate_args.out);

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "re-parse an emitted CSV");
    report->add_option("--in", report_args.in)->required();
    report->add_option("--out", report_args.out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (bound->parsed()) return run_bound(bound_args);
        if (plan->parsed()) return run_plan(plan_args);
        if (variance->parsed()) return run_variance(variance_args);
        if (verify->parsed()) return run_verify(verify_args);
        if (simulate->parsed()) return run_simulate(simulate_args);
        if (validate->parsed()) return run_validate(validate_args);
        if (report->parsed()) return run_report(report_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
