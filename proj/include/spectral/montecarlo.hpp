#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spectral/bounds.hpp"
#include "spectral/chains.hpp"
#include "spectral/kernel.hpp"
#include "spectral/norms.hpp"

namespace spectral {

/// Trajectory settings. Output is a deterministic function of (seed, config):
/// trial j always draws from substream (seed, j) no matter how trials are
/// scheduled across workers.
struct SimulationConfig {
    long n = 0;
    long trials = 0;
    std::uint64_t seed = 0;
    int initial_state = 0;                     // cold start at a point mass
    std::vector<double> initial_distribution;  // optional cold-start law
};

struct TailEstimate {
    double a = 0.0;
    long hits = 0;
    long trials = 0;
    double p_hat = 0.0;
    double ci_upper_99 = 0.0;  // one-sided exact binomial upper limit
};

/// Empirical deviation frequencies P[|mean_n(phi) - mu0(phi)| >= a] for each
/// a in a_list, from independent cold-start trajectories.
std::vector<TailEstimate> simulate_tail(const FiniteKernel& kernel, std::span<const double> phi,
                                        double mu0_phi, const SimulationConfig& config,
                                        std::span<const double> a_list);

/// Same for the iterated Bernoulli chain with a piecewise-constant
/// observable; one chain step is ell raw IFS steps.
std::vector<TailEstimate> simulate_tail_bernoulli(const BernoulliChain& chain,
                                                  const PiecewiseConstant& phi, double mu0_phi,
                                                  double x0, const SimulationConfig& config,
                                                  std::span<const double> a_list);

/// Sampler-backed variant for chains without an explicit kernel (e.g. the
/// hypercube above the explicit-kernel limit). step advances one state,
/// observe evaluates the observable at a state.
std::vector<TailEstimate> simulate_tail_sampler(
    const std::function<std::uint64_t(std::uint64_t, Pcg64&)>& step,
    const std::function<double(std::uint64_t)>& observe, double mu0_phi,
    std::uint64_t initial_state, const SimulationConfig& config,
    std::span<const double> a_list);

/// Smallest p with P(Binomial(trials, p) <= hits) <= 1 - confidence
/// (Clopper-Pearson one-sided upper limit, exact).
double binomial_upper_ci(long hits, long trials, double confidence = 0.99);

/// Exact law of sum_{k=1..n} phi(X_k) as a sorted atom list. Feasible when
/// phi takes few distinct values (dense DP for two values, sparse DP with a
/// support guard otherwise).
struct SumDistribution {
    std::vector<double> values;
    std::vector<double> probs;

    void scale(double c);
    double total_mass() const;
};

SumDistribution exact_sum_distribution(const FiniteKernel& kernel, std::span<const double> phi,
                                       std::span<const double> mu, long n);

double normal_cdf(double x);

/// Exact Kolmogorov distance between a purely atomic law and the standard
/// normal (both one-sided gaps at every jump).
double ks_distance_exact(const SumDistribution& dist);
/// KS distance of the empirical distribution of a sample vs standard normal.
double ks_distance_empirical(std::span<const double> sample);

/// Certified enclosure of beta_lambda([c,d]) by depth-limited recursion over
/// the sign tree: each undecided leaf contributes its full mass to the upper
/// limit only.
struct Enclosure {
    double lo = 0.0;
    double hi = 1.0;
};
Enclosure bernoulli_interval_mass(double lambda, double c, double d, int depth = 34,
                                  long node_budget = 1L << 26);

struct ValidationRow {
    std::string chain, observable, norm;
    double delta0 = 0.0;
    bool certified = true;
    std::string theorem, regime;
    double a = 0.0;
    long n = 0;
    long trials = 0;
    double p_hat = 0.0;
    double ci_upper_99 = 0.0;
    double bound = 0.0;
    bool pass = true;

    bool operator==(const ValidationRow&) const = default;
};

struct ValidationReport {
    std::vector<ValidationRow> rows;
    bool all_pass() const;
};

void write_validation_csv(const ValidationReport& report, std::ostream& out);
ValidationReport parse_validation_csv(std::istream& in);

struct TailValidationSpec {
    FiniteKernel kernel;
    Observable observable;  // explicit values
    FunctionSpace space;
    GapCertificate gap;
    std::vector<double> a_grid;
    std::vector<long> n_grid;
    long trials = 0;
    std::uint64_t seed = 0;
    int initial_state = 0;
    std::string chain_id = "chain";
    std::string observable_id = "phi";
};

/// Grid check of Theorem A: simulate each n once, compare every a's exact
/// upper confidence limit against the applicable bound (capped at 1, so a
/// vacuous bound passes trivially and visibly).
ValidationReport validate_tail_bounds(const TailValidationSpec& spec);

struct BerryEsseenValidationSpec {
    FiniteKernel kernel;
    std::vector<double> phi;  // raw observable; normalized internally
    FunctionSpace space;
    GapCertificate gap;
    std::vector<long> n_grid;
    int initial_state = 0;
    std::string chain_id = "chain";
    std::string observable_id = "phi";
};

/// Exact-DP check of Theorem C: Kolmogorov distance of the normalized sum
/// versus the raw Berry-Esseen bound (raw, so vacuously capped points remain
/// informative in the report).
ValidationReport validate_berry_esseen(const BerryEsseenValidationSpec& spec);

}  // namespace spectral
