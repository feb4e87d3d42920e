#include "spectral/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace spectral {

namespace {

// Theorem constants, verbatim. The artifact certifies the published bounds,
// so none of these are re-derived or tightened.
constexpr double kAGaussFront = 2.488;
constexpr double kAGaussLin = 13.44;
constexpr double kAGaussInv = 8.324;
constexpr double kAExpFront = 2.624;
constexpr double kAExpScale = 0.98;
constexpr double kAExpShift = 0.254;
constexpr double kBFront = 2.637;
constexpr double kBCubic = 10.0;
constexpr double kBUminRoot = 60.0;
constexpr double kC0 = 148.0;
constexpr double kC1 = 285.0;
constexpr double kC2 = 123.0;

void require_gap(const GapCertificate& gap) {
    if (!(gap.delta0 > 0.0) || gap.delta0 > 1.0)
        throw std::invalid_argument("delta0 must lie in (0,1]");
}

double second_order_cap(double delta0, double phi_norm, double U) {
    // Theorem B states its own radius with 12 + 13 delta0.
    return U / phi_norm * std::log1p(delta0 * delta0 / (12.0 + 13.0 * delta0));
}

BoundReport base_report(Theorem t, const BoundQuery& q) {
    BoundReport r;
    r.theorem = t;
    r.regime = regime_name(t);
    r.certified = q.gap.certified();
    r.echo = q;
    return r;
}

}  // namespace

std::string theorem_name(Theorem t) {
    switch (t) {
        case Theorem::AGauss:
        case Theorem::AExp: return "A";
        case Theorem::B: return "B";
        case Theorem::C: return "C";
        case Theorem::Plan: return "plan";
    }
    return "?";
}

std::string regime_name(Theorem t) {
    switch (t) {
        case Theorem::AGauss: return "gaussian";
        case Theorem::AExp: return "exponential";
        case Theorem::B: return "second-order";
        case Theorem::C: return "normal-approx";
        case Theorem::Plan: return "plan";
    }
    return "?";
}

long threshold_n(double delta0) {
    if (!(delta0 > 0.0) || delta0 > 1.0)
        throw std::invalid_argument("delta0 must lie in (0,1]");
    const double raw = 1.0 + std::log(100.0) / (-std::log1p(-delta0 / 13.0));
    return static_cast<long>(std::ceil(raw));
}

BoundReport concentration_bound(const BoundQuery& q) {
    require_gap(q.gap);
    if (!(q.a > 0.0)) throw std::invalid_argument("deviation a must be positive");
    if (!(q.phi_norm > 0.0)) throw std::invalid_argument("phi norm must be positive");
    if (q.n < 1) throw std::invalid_argument("n must be >= 1");

    const double d0 = q.gap.delta0;
    const double ratio = q.a / q.phi_norm;
    const bool gaussian = ratio <= d0 / 3.0;

    BoundReport r = base_report(gaussian ? Theorem::AGauss : Theorem::AExp, q);

    double exponent;
    if (gaussian) {
        exponent = -static_cast<double>(q.n) * (d0 / (kAGaussLin * d0 + kAGaussInv)) * ratio * ratio;
        r.raw_value = kAGaussFront * std::exp(exponent);
    } else {
        exponent = -static_cast<double>(q.n) * (kAExpScale * d0 * d0 / (12.0 + 13.0 * d0)) *
                   (ratio - kAExpShift * d0);
        r.raw_value = kAExpFront * std::exp(exponent);
    }
    r.value = std::min(r.raw_value, 1.0);

    const long thr = threshold_n(d0);
    r.conditions.push_back(
        {"n_threshold", q.n >= thr, static_cast<double>(q.n), static_cast<double>(thr)});
    r.conditions.push_back({"regime_cap", gaussian, ratio, d0 / 3.0});
    if (q.n < thr) {
        r.applicable = false;
        r.reason = "n below mixing threshold ceil(1 + log 100 / -log(1 - delta0/13))";
        r.value = 1.0;
    }
    return r;
}

double u_min(const BoundQuery& q) {
    require_gap(q.gap);
    if (!q.S) throw std::invalid_argument("u_min needs a variance bound S");
    if (!(q.a > 0.0) || !(q.phi_norm > 0.0))
        throw std::invalid_argument("u_min needs positive a and phi norm");
    const double d0 = q.gap.delta0;
    const double term2 =
        std::sqrt(q.a) * std::sqrt(kBUminRoot) * (1.0 + 1.0 / d0) * std::pow(q.phi_norm, 1.5);
    const double term3 =
        q.a * q.phi_norm / std::log1p(d0 * d0 / (12.0 + 13.0 * d0));
    return std::max({*q.S, term2, term3});
}

BoundReport second_order_bound(const BoundQuery& q, double U) {
    require_gap(q.gap);
    if (!(q.a > 0.0)) throw std::invalid_argument("deviation a must be positive");
    if (!(q.phi_norm > 0.0)) throw std::invalid_argument("phi norm must be positive");
    if (!(U > 0.0)) throw std::invalid_argument("variance proxy U must be positive");
    if (q.n < 1) throw std::invalid_argument("n must be >= 1");

    const double d0 = q.gap.delta0;
    BoundReport r = base_report(Theorem::B, q);

    const double inv = 1.0 + 1.0 / d0;
    const double exponent =
        -static_cast<double>(q.n) *
        (q.a * q.a / (2.0 * U) -
         kBCubic * inv * inv * std::pow(q.phi_norm, 3) * std::pow(q.a, 3) / std::pow(U, 3));
    r.raw_value = kBFront * std::exp(exponent);
    r.value = std::min(r.raw_value, 1.0);

    const long thr = threshold_n(d0);
    const double cap = second_order_cap(d0, q.phi_norm, U);
    r.conditions.push_back(
        {"n_threshold", q.n >= thr, static_cast<double>(q.n), static_cast<double>(thr)});
    r.conditions.push_back({"deviation_cap", q.a <= cap, q.a, cap});
    if (q.S) r.conditions.push_back({"variance_bound", U >= *q.S, U, *q.S});

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

BoundReport berry_esseen_bound(const BoundQuery& q) {
    require_gap(q.gap);
    if (!(q.phi_tilde_norm > 0.0))
        throw std::invalid_argument("normalized observable norm must be positive");
    if (q.n < 1) throw std::invalid_argument("n must be >= 1");

    const double d0 = q.gap.delta0;
    const double floor = std::sqrt(d0 / 2.0);
    if (q.phi_tilde_norm < floor) {
        std::ostringstream msg;
        msg << "inconsistent inputs: a unit-variance observable must have norm >= sqrt(delta0/2) = "
            << floor;
        throw std::invalid_argument(msg.str());
    }

    BoundReport r = base_report(Theorem::C, q);
    const double coeff = kC0 + kC1 / d0 + kC2 / (d0 * d0);
    const double normterm = std::max(q.phi_tilde_norm, std::pow(q.phi_tilde_norm, 3));
    r.raw_value = coeff * normterm / std::sqrt(static_cast<double>(q.n));
    r.value = std::min(r.raw_value, 1.0);
    r.conditions.push_back({"norm_floor", true, q.phi_tilde_norm, floor});
    return r;
}

BoundReport plan_sample_size(const BoundQuery& q) {
    require_gap(q.gap);
    if (!q.beta || !(*q.beta > 0.0) || !(*q.beta < 1.0))
        throw std::invalid_argument("planner needs beta in (0,1)");
    if (!(q.a > 0.0) || !(q.phi_norm > 0.0))
        throw std::invalid_argument("planner needs positive a and phi norm");

    const double d0 = q.gap.delta0;
    const double beta = *q.beta;
    const long thr = threshold_n(d0);
    const double ratio = q.a / q.phi_norm;

    // Analytic first guesses per route; the forward walk below makes the
    // result exactly minimal regardless of rounding here.
    struct Route {
        std::string name;
        long n = 0;
    };
    std::vector<Route> routes;

    if (ratio <= d0 / 3.0) {
        const double rate = (d0 / (kAGaussLin * d0 + kAGaussInv)) * ratio * ratio;
        routes.push_back({"A-gaussian",
                          static_cast<long>(std::ceil(std::log(kAGaussFront / beta) / rate))});
    } else {
        const double margin = ratio - kAExpShift * d0;
        if (margin > 0.0) {
            const double rate = (kAExpScale * d0 * d0 / (12.0 + 13.0 * d0)) * margin;
            routes.push_back({"A-exponential",
                              static_cast<long>(std::ceil(std::log(kAExpFront / beta) / rate))});
        }
    }
    if (q.S) {
        const double U = u_min(q);
        const double inv = 1.0 + 1.0 / d0;
        const double exponent = q.a * q.a / (2.0 * U) -
                                kBCubic * inv * inv * std::pow(q.phi_norm, 3) *
                                    std::pow(q.a, 3) / std::pow(U, 3);
        if (exponent > 0.0)
            routes.push_back(
                {"B", static_cast<long>(std::ceil(std::log(kBFront / beta) / exponent))});
    }
    if (routes.empty()) {
        std::ostringstream msg;
        msg << "no finite n achieves beta: exponential-regime margin a/||phi|| - 0.254 delta0 = "
            << ratio - kAExpShift * d0 << " is non-positive and no variance bound was supplied";
        throw std::invalid_argument(msg.str());
    }

    // Best forward-evaluated bound at a given n, over every route.
    auto eval = [&](long n) {
        BoundQuery at = q;
        at.n = n;
        double best = 2.0;
        std::string who;
        const BoundReport a_rep = concentration_bound(at);
        if (a_rep.applicable && a_rep.value < best) {
            best = a_rep.value;
            who = regime_name(a_rep.theorem) == "gaussian" ? "A-gaussian" : "A-exponential";
        }
        if (q.S) {
            const BoundReport b_rep = second_order_bound(at, u_min(q));
            if (b_rep.applicable && b_rep.value < best) {
                best = b_rep.value;
                who = "B";
            }
        }
        return std::pair<double, std::string>(best, who);
    };

    long n = thr;
    for (const auto& r : routes) n = std::max(n, r.n);
    n = std::max(n, thr);
    while (n > thr && eval(n - 1).first <= beta) --n;
    while (eval(n).first > beta) ++n;

    const auto [achieved, winner] = eval(n);

    BoundReport r = base_report(Theorem::Plan, q);
    r.regime = "plan:" + winner;
    r.raw_value = static_cast<double>(n);
    r.value = static_cast<double>(n);
    r.conditions.push_back(
        {"n_threshold", n >= thr, static_cast<double>(n), static_cast<double>(thr)});
    r.conditions.push_back({"achieves_beta", achieved <= beta, achieved, beta});
    return r;
}

namespace {

std::string conditions_field(const std::vector<Condition>& conds) {
    std::ostringstream out;
    out << std::setprecision(17);
    bool first = true;
    for (const auto& c : conds) {
        if (!first) out << '|';
        first = false;
        out << c.name << '=' << c.value << '/' << c.limit << '/' << (c.satisfied ? 1 : 0);
    }
    return out.str();
}

std::vector<Condition> parse_conditions(const std::string& field) {
    std::vector<Condition> out;
    if (field.empty()) return out;
    std::istringstream in(field);
    std::string item;
    while (std::getline(in, item, '|')) {
        Condition c;
        const auto eq = item.find('=');
        const auto s1 = item.find('/', eq);
        const auto s2 = item.find('/', s1 + 1);
        c.name = item.substr(0, eq);
        c.value = std::stod(item.substr(eq + 1, s1 - eq - 1));
        c.limit = std::stod(item.substr(s1 + 1, s2 - s1 - 1));
        c.satisfied = item.substr(s2 + 1) == "1";
        out.push_back(std::move(c));
    }
    return out;
}

Theorem theorem_from_names(const std::string& theorem, const std::string& regime) {
    if (theorem == "A") return regime == "gaussian" ? Theorem::AGauss : Theorem::AExp;
    if (theorem == "B") return Theorem::B;
    if (theorem == "C") return Theorem::C;
    if (theorem == "plan") return Theorem::Plan;
    throw std::invalid_argument("unknown theorem id: " + theorem);
}

}  // namespace

void write_bound_csv_header(std::ostream& out) {
    out << "theorem,regime,delta0,provenance,safety_factor,space,phi_norm,a,n,S,"
           "phi_tilde_norm,beta,raw_value,capped_value,applicable,certified,reason,conditions\n";
}

void write_bound_csv_row(const BoundReport& r, std::ostream& out) {
    out << std::setprecision(17);
    out << theorem_name(r.theorem) << ',' << r.regime << ',' << r.echo.gap.delta0 << ','
        << provenance_name(r.echo.gap.provenance) << ',' << r.echo.gap.safety_factor << ','
        << r.echo.gap.space << ',' << r.echo.phi_norm << ',' << r.echo.a << ',' << r.echo.n
        << ',';
    if (r.echo.S) out << *r.echo.S;
    out << ',' << r.echo.phi_tilde_norm << ',';
    if (r.echo.beta) out << *r.echo.beta;
    out << ',' << r.raw_value << ',' << r.value << ',' << (r.applicable ? 1 : 0) << ','
        << (r.certified ? 1 : 0) << ',' << r.reason << ',' << conditions_field(r.conditions)
        << '\n';
}

std::vector<BoundReport> parse_bound_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("theorem,", 0) != 0)
        throw std::invalid_argument("not a bound-report CSV");
    std::vector<BoundReport> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream row(line);
        while (std::getline(row, cell, ',')) f.push_back(cell);
        f.resize(18);

        BoundReport r;
        r.regime = f[1];
        r.theorem = theorem_from_names(f[0], f[1].rfind("plan", 0) == 0 ? "plan" : f[1]);
        GapCertificate gap;
        gap.delta0 = std::stod(f[2]);
        gap.provenance = provenance_from_name(f[3]);
        gap.safety_factor = std::stod(f[4]);
        gap.space = f[5];
        r.echo.gap = gap;
        r.echo.phi_norm = std::stod(f[6]);
        r.echo.a = std::stod(f[7]);
        r.echo.n = std::stol(f[8]);
        if (!f[9].empty()) r.echo.S = std::stod(f[9]);
        r.echo.phi_tilde_norm = std::stod(f[10]);
        if (!f[11].empty()) r.echo.beta = std::stod(f[11]);
        r.raw_value = std::stod(f[12]);
        r.value = std::stod(f[13]);
        r.applicable = f[14] == "1";
        r.certified = f[15] == "1";
        r.reason = f[16];
        r.conditions = parse_conditions(f[17]);
        out.push_back(std::move(r));
    }
    return out;
}

std::string bound_report_json(const BoundReport& r) {
    nlohmann::json j;
    j["theorem"] = theorem_name(r.theorem);
    j["regime"] = r.regime;
    j["delta0"] = r.echo.gap.delta0;
    j["provenance"] = provenance_name(r.echo.gap.provenance);
    j["safety_factor"] = r.echo.gap.safety_factor;
    j["space"] = r.echo.gap.space;
    j["phi_norm"] = r.echo.phi_norm;
    j["a"] = r.echo.a;
    j["n"] = r.echo.n;
    if (r.echo.S) j["S"] = *r.echo.S;
    j["phi_tilde_norm"] = r.echo.phi_tilde_norm;
    if (r.echo.beta) j["beta"] = *r.echo.beta;
    j["raw_value"] = r.raw_value;
    j["capped_value"] = r.value;
    j["applicable"] = r.applicable;
    j["certified"] = r.certified;
    j["reason"] = r.reason;
    nlohmann::json conds = nlohmann::json::array();
    for (const auto& c : r.conditions)
        conds.push_back({{"name", c.name},
                         {"satisfied", c.satisfied},
                         {"value", c.value},
                         {"limit", c.limit}});
    j["conditions"] = conds;
    return j.dump(2);
}

}  // namespace spectral
