#include "fractrace/seq.hpp"

#include "fractrace/errors.hpp"
#include "fractrace/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fractrace {

const char* to_string(Tri value) {
    switch (value) {
        case Tri::Yes: return "Yes";
        case Tri::No: return "No";
        case Tri::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

// ---------------------------------------------------------------------------
// LogProfile

double LogProfile::log2_at(double j) const {
    double value = s * j + kappa * std::log2(1.0 + j);
    if (c != 0.0) value += c * std::pow(j, rho);
    return value;
}

std::optional<LogProfile> LogProfile::times(const LogProfile& other) const {
    LogProfile out{s + other.s, kappa + other.kappa, 0.0, 0.0};
    if (c == 0.0) {
        out.c = other.c;
        out.rho = other.rho;
    } else if (other.c == 0.0) {
        out.c = c;
        out.rho = rho;
    } else if (rho == other.rho) {
        out.c = c + other.c;
        out.rho = out.c == 0.0 ? 0.0 : rho;
    } else {
        return std::nullopt;
    }
    return out;
}

LogProfile LogProfile::pow(double r) const {
    // +0.0 keeps -0 out of printed output.
    LogProfile out{r * s + 0.0, r * kappa + 0.0, r * c + 0.0, rho};
    if (out.c == 0.0) out.rho = 0.0;
    return out;
}

bool LogProfile::tends_to_zero() const {
    if (s != 0.0) return s < 0.0;
    if (c != 0.0) return c < 0.0;
    return kappa < 0.0;
}

bool LogProfile::bounded() const {
    if (s != 0.0) return s < 0.0;
    if (c != 0.0) return c < 0.0;
    return kappa <= 0.0;
}

// ---------------------------------------------------------------------------
// SeqSpec

struct SeqSpec::Node {
    Family family = Family::PowerLog;
    LogProfile profile;
    std::vector<double> log2_values;
    std::optional<SeqSpec> left;
    std::optional<SeqSpec> right;
    double exponent = 1.0;
};

namespace {

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) {
        throw InvalidSpec(std::string("sequence parameter '") + what + "' must be finite");
    }
}

}  // namespace

SeqSpec SeqSpec::from_profile(const LogProfile& profile) {
    require_finite(profile.s, "s");
    require_finite(profile.kappa, "kappa");
    require_finite(profile.c, "c");
    auto node = std::make_shared<Node>();
    node->profile = profile;
    if (profile.c != 0.0) {
        if (!(profile.rho > 0.0 && profile.rho < 1.0)) {
            throw InvalidSpec("stretched sequence term needs rho in (0,1)");
        }
        node->family = Family::ExpLog;
    } else {
        node->profile.rho = 0.0;
        node->family = Family::PowerLog;
    }
    return SeqSpec(std::move(node));
}

SeqSpec SeqSpec::power_log(double s, double kappa) {
    return from_profile({s, kappa, 0.0, 0.0});
}

SeqSpec SeqSpec::exp_log(double s, double kappa, double c, double rho) {
    return from_profile({s, kappa, c, rho});
}

SeqSpec SeqSpec::table(const std::vector<double>& values) {
    if (values.empty()) throw InvalidSpec("sequence table must not be empty");
    auto node = std::make_shared<Node>();
    node->family = Family::Table;
    node->log2_values.reserve(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
        const double v = values[j];
        if (!(v > 0.0) || !std::isfinite(v)) {
            std::ostringstream msg;
            msg << "sequence table entry " << j << " is not a positive finite number";
            throw InvalidSpec(msg.str());
        }
        node->log2_values.push_back(std::log2(v));
    }
    return SeqSpec(std::move(node));
}

SeqSpec SeqSpec::table_from_log2(std::vector<double> log2_values) {
    if (log2_values.empty()) throw InvalidSpec("sequence table must not be empty");
    for (double v : log2_values) {
        if (!std::isfinite(v)) throw InvalidSpec("sequence table entry is not finite in log form");
    }
    auto node = std::make_shared<Node>();
    node->family = Family::Table;
    node->log2_values = std::move(log2_values);
    return SeqSpec(std::move(node));
}

SeqSpec SeqSpec::product(const SeqSpec& left, const SeqSpec& right) {
    const auto a = left.closed_form();
    const auto b = right.closed_form();
    if (a && b) {
        if (auto merged = a->times(*b)) return from_profile(*merged);
    }
    auto node = std::make_shared<Node>();
    node->family = Family::Product;
    node->left = left;
    node->right = right;
    return SeqSpec(std::move(node));
}

SeqSpec SeqSpec::power(const SeqSpec& base, double r) {
    require_finite(r, "r");
    if (auto profile = base.closed_form()) return from_profile(profile->pow(r));
    auto node = std::make_shared<Node>();
    node->family = Family::Power;
    node->left = base;
    node->exponent = r;
    return SeqSpec(std::move(node));
}

double SeqSpec::log2_at(std::size_t j) const {
    const Node& n = *node_;
    switch (n.family) {
        case Family::PowerLog:
        case Family::ExpLog:
            return n.profile.log2_at(static_cast<double>(j));
        case Family::Table: {
            const auto& v = n.log2_values;
            if (j < v.size()) return v[j];
            const double last = v.back();
            const double step = v.size() >= 2 ? last - v[v.size() - 2] : 0.0;
            return last + step * static_cast<double>(j - (v.size() - 1));
        }
        case Family::Product:
            return n.left->log2_at(j) + n.right->log2_at(j);
        case Family::Power:
            return n.exponent * n.left->log2_at(j);
    }
    return 0.0;
}

double SeqSpec::operator()(std::size_t j) const { return std::exp2(log2_at(j)); }

SeqSpec::Family SeqSpec::family() const { return node_->family; }

std::optional<LogProfile> SeqSpec::closed_form() const {
    if (node_->family == Family::PowerLog || node_->family == Family::ExpLog) {
        return node_->profile;
    }
    return std::nullopt;
}

std::size_t SeqSpec::stored_length() const {
    const Node& n = *node_;
    switch (n.family) {
        case Family::Table: return n.log2_values.size();
        case Family::Product:
            return std::min(n.left->stored_length(), n.right->stored_length());
        case Family::Power: return n.left->stored_length();
        default: return kUnbounded;
    }
}

const SeqSpec* SeqSpec::left() const { return node_->left ? &*node_->left : nullptr; }
const SeqSpec* SeqSpec::right() const { return node_->right ? &*node_->right : nullptr; }
double SeqSpec::exponent() const { return node_->exponent; }
const std::vector<double>& SeqSpec::table_log2() const { return node_->log2_values; }

std::string SeqSpec::describe() const {
    std::ostringstream out;
    const Node& n = *node_;
    switch (n.family) {
        case Family::PowerLog:
            out << "power_log(s=" << n.profile.s << ", kappa=" << n.profile.kappa << ")";
            break;
        case Family::ExpLog:
            out << "exp_log(s=" << n.profile.s << ", kappa=" << n.profile.kappa
                << ", c=" << n.profile.c << ", rho=" << n.profile.rho << ")";
            break;
        case Family::Table:
            out << "table[" << n.log2_values.size() << "]";
            break;
        case Family::Product:
            out << "(" << n.left->describe() << " * " << n.right->describe() << ")";
            break;
        case Family::Power:
            out << "(" << n.left->describe() << ")^" << n.exponent;
            break;
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Admissibility and indices

AdmissibilityWitness admissibility_witness(const SeqSpec& sigma, std::size_t J) {
    if (J < 1) throw InvalidSpec("admissibility_witness needs J >= 1");
    double lo = kInf;
    double hi = -kInf;
    double prev = sigma.log2_at(0);
    for (std::size_t j = 0; j < J; ++j) {
        const double next = sigma.log2_at(j + 1);
        const double step = next - prev;
        lo = std::min(lo, step);
        hi = std::max(hi, step);
        prev = next;
    }
    return {std::exp2(lo), std::exp2(hi)};
}

namespace {

constexpr double kDetrendResidual = 0.1;

IndexReport estimate_indices(const SeqSpec& sigma, std::size_t J, bool detrend = true) {
    if (J < 8) throw InvalidSpec("index estimation needs at least 9 terms (J_max >= 8)");
    const std::size_t first = J / 2;
    std::vector<double> y;
    y.reserve(J - first + 1);
    for (std::size_t j = first; j <= J; ++j) y.push_back(sigma.log2_at(j));
    const LogProfileFit fit = fit_log_profile(y, first);
    // Only strip the log term when the smooth profile actually describes the
    // window; oscillating tables would otherwise pick up a spurious slope.
    const double log_coef = detrend && fit.max_residual <= kDetrendResidual ? fit.log_coef : 0.0;

    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        z[i] = y[i] - log_coef * std::log2(1.0 + static_cast<double>(first + i));
    }
    IndexReport report;
    report.method = IndexMethod::Numeric;
    report.window = J;
    report.lower = kInf;
    report.upper = -kInf;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        const double r = z[i + 1] - z[i];
        report.lower = std::min(report.lower, r);
        report.upper = std::max(report.upper, r);
    }
    // Averages over a fixed lag stay inside [lower, upper], so the ordering
    // lower <= beta <= alpha <= upper holds by construction.
    const std::size_t lag = std::max<std::size_t>(1, (z.size() - 1) / 2);
    report.boyd_lower = kInf;
    report.boyd_upper = -kInf;
    for (std::size_t i = 0; i + lag < z.size(); ++i) {
        const double r = (z[i + lag] - z[i]) / static_cast<double>(lag);
        report.boyd_lower = std::min(report.boyd_lower, r);
        report.boyd_upper = std::max(report.boyd_upper, r);
    }
    return report;
}

std::size_t usable_window(const SeqSpec& sigma, std::size_t j_max) {
    const std::size_t stored = sigma.stored_length();
    if (stored == SeqSpec::kUnbounded) return j_max;
    return std::min(j_max, stored - 1);
}

constexpr double kNumericMargin = 0.05;

}  // namespace

IndexReport indices(const SeqSpec& sigma, std::size_t j_max) {
    if (j_max < 8) throw InvalidSpec("indices requires J_max >= 8");
    if (auto profile = sigma.closed_form()) {
        IndexReport report;
        report.lower = report.upper = profile->s;
        report.boyd_lower = report.boyd_upper = profile->s;
        report.window = j_max;
        report.method = IndexMethod::Analytic;
        return report;
    }
    return estimate_indices(sigma, usable_window(sigma, j_max));
}

IndexReport numeric_indices(const SeqSpec& sigma, std::size_t j_max) {
    return estimate_indices(sigma, usable_window(sigma, j_max));
}

Membership sequence_in_ell(const SeqSpec& x, double v) {
    if (!(v > 0.0)) throw InvalidSpec("l_v membership needs v > 0");
    const bool infinite = std::isinf(v);
    if (auto p = x.closed_form()) {
        std::ostringstream why;
        why << x.describe() << (infinite ? " bounded" : " summable") << ": ";
        if (p->s != 0.0) {
            why << "exponential rate " << p->s;
            return Membership::exact(p->s < 0.0, why.str());
        }
        if (p->c != 0.0) {
            why << "stretched rate " << p->c << "*j^" << p->rho;
            return Membership::exact(p->c < 0.0, why.str());
        }
        if (infinite) {
            why << "(1+j)^" << p->kappa;
            return Membership::exact(p->kappa <= 0.0, why.str());
        }
        why << "p-series with exponent " << p->kappa * v;
        return Membership::exact(p->kappa * v < -1.0, why.str());
    }
    const std::size_t stored = x.stored_length();
    if (stored < 9) {
        return Membership::numeric(Tri::Inconclusive, "fewer than 9 stored terms");
    }
    const IndexReport report = estimate_indices(x, stored - 1);
    std::ostringstream why;
    why << "numeric tail over j in [" << report.window / 2 << ", " << report.window
        << "]: rates in [" << report.lower << ", " << report.upper << "]";
    if (report.upper < -kNumericMargin) return Membership::numeric(Tri::Yes, why.str());
    if (report.lower > kNumericMargin) return Membership::numeric(Tri::No, why.str());
    return Membership::numeric(Tri::Inconclusive, why.str());
}

Membership ell_membership(const SeqSpec& sigma, double v) {
    Membership m = sequence_in_ell(sigma.inverse(), v);
    m.reason = "inverse of " + sigma.describe() + ": " + m.reason;
    return m;
}

Membership limsup_positive(const SeqSpec& x) {
    if (auto p = x.closed_form()) {
        return Membership::exact(!p->tends_to_zero(),
                                 x.describe() + (p->tends_to_zero() ? " tends to 0"
                                                                    : " does not tend to 0"));
    }
    const std::size_t stored = x.stored_length();
    if (stored < 9) return Membership::numeric(Tri::Inconclusive, "fewer than 9 stored terms");
    const IndexReport report = estimate_indices(x, stored - 1);
    if (report.upper < -kNumericMargin) {
        return Membership::numeric(Tri::No, "terms decay geometrically on the stored tail");
    }
    if (report.lower > kNumericMargin) {
        return Membership::numeric(Tri::Yes, "terms grow geometrically on the stored tail");
    }
    return Membership::numeric(Tri::Inconclusive, "tail rate indistinguishable from 0");
}

Membership tends_to_zero(const SeqSpec& x) {
    Membership m = limsup_positive(x);
    if (m.value == Tri::Yes) m.value = Tri::No;
    else if (m.value == Tri::No) m.value = Tri::Yes;
    return m;
}

IndexAlgebraReport index_algebra_check(const SeqSpec& sigma, const SeqSpec& tau,
                                       std::size_t j_max) {
    IndexAlgebraReport report;
    const SeqSpec product = sigma * tau;
    report.sigma = indices(sigma, j_max);
    report.tau = indices(tau, j_max);
    report.product = indices(product, j_max);
    const bool all_analytic = report.sigma.method == IndexMethod::Analytic &&
                              report.tau.method == IndexMethod::Analytic &&
                              report.product.method == IndexMethod::Analytic;
    if (!all_analytic) {
        // Compare raw ratios over one common window: finite-window log terms
        // make analytic limits and windowed extremes incomparable.
        const std::size_t J = std::min({usable_window(sigma, j_max), usable_window(tau, j_max),
                                        usable_window(product, j_max)});
        report.sigma = estimate_indices(sigma, J, false);
        report.tau = estimate_indices(tau, J, false);
        report.product = estimate_indices(product, J, false);
    }
    report.tolerance = all_analytic ? 0.0 : 1e-9;
    const double tol = report.tolerance;
    report.upper_subadditive =
        report.product.upper <= report.sigma.upper + report.tau.upper + tol;
    report.lower_superadditive =
        report.product.lower >= report.sigma.lower + report.tau.lower - tol;

    auto pure_rate = [](const SeqSpec& seq) -> std::optional<double> {
        auto p = seq.closed_form();
        if (p && p->kappa == 0.0 && p->c == 0.0) return p->s;
        return std::nullopt;
    };
    auto shift_holds = [&](double a, const IndexReport& other) {
        return std::abs(report.product.upper - (a + other.upper)) <= tol &&
               std::abs(report.product.lower - (a + other.lower)) <= tol;
    };
    if (auto a = pure_rate(sigma)) {
        report.shift_exact = shift_holds(*a, report.tau);
    } else if (auto b = pure_rate(tau)) {
        report.shift_exact = shift_holds(*b, report.sigma);
    }
    return report;
}

}  // namespace fractrace
