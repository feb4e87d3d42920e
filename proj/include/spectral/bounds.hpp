#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spectral/kernel.hpp"

namespace spectral {

/// Inputs for a bound evaluation. Theorem A/B read (phi_norm, a, n),
/// Theorem B additionally the variance bound S, Theorem C reads
/// phi_tilde_norm, and the planner reads the target failure probability beta.
struct BoundQuery {
    GapCertificate gap;
    double phi_norm = 0.0;
    double a = 0.0;
    long n = 0;
    std::optional<double> S;
    double phi_tilde_norm = 0.0;
    std::optional<double> beta;

    bool operator==(const BoundQuery&) const = default;
};

enum class Theorem { AGauss, AExp, B, C, Plan };

std::string theorem_name(Theorem t);  ///< "A", "B", "C", "plan"
std::string regime_name(Theorem t);   ///< "gaussian", "exponential", ...

struct Condition {
    std::string name;
    bool satisfied = true;
    double value = 0.0;
    double limit = 0.0;

    bool operator==(const Condition&) const = default;
};

/// Evaluated bound. `value` is capped at 1 (probability bounds are vacuous
/// above 1) but `raw_value` always keeps the uncapped number so vacuous
/// truth stays visible. For the planner, both hold the planned n.
struct BoundReport {
    Theorem theorem = Theorem::AGauss;
    std::string regime;
    double raw_value = 0.0;
    double value = 0.0;
    bool applicable = true;
    std::string reason;  // set when not applicable
    std::vector<Condition> conditions;
    bool certified = true;  // false whenever the gap certificate is estimated
    BoundQuery echo;

    bool operator==(const BoundReport&) const = default;
};

/// ceil(1 + log 100 / -log(1 - delta0/13)): the minimal chain length for
/// Theorem A/B and the power-level estimates. Always at most 60/delta0.
long threshold_n(double delta0);

/// Theorem A: two-regime concentration bound for
/// P[|empirical mean - stationary mean| >= a]. Gaussian regime when
/// a/||phi|| <= delta0/3 (boundary inclusive), exponential regime otherwise.
BoundReport concentration_bound(const BoundQuery& q);

/// Theorem B: second-order bound at variance proxy U >= sigma^2(phi).
BoundReport second_order_bound(const BoundQuery& q, double U);

/// The minimizer of Theorem B's right-hand side over admissible U, given the
/// variance bound S in the query.
double u_min(const BoundQuery& q);

/// Theorem C: Berry-Esseen bound on the Kolmogorov distance between the
/// normalized Birkhoff sum and the standard normal.
BoundReport berry_esseen_bound(const BoundQuery& q);

/// Smallest n such that the best applicable bound (Theorem A; Theorem B at
/// u_min when S is supplied) is <= beta and n meets the threshold. Throws
/// when no finite n can work (exponential regime with non-positive margin
/// and no usable variance bound).
BoundReport plan_sample_size(const BoundQuery& q);

/// CSV / JSON serialization. One row per report; fields mirror one-to-one.
void write_bound_csv_header(std::ostream& out);
void write_bound_csv_row(const BoundReport& report, std::ostream& out);
std::vector<BoundReport> parse_bound_csv(std::istream& in);
std::string bound_report_json(const BoundReport& report);

}  // namespace spectral
