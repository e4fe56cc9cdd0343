#include "fractrace/gauge.hpp"

#include "fractrace/errors.hpp"
#include "fractrace/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fractrace {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void require_dimension(int n) {
    if (n < 1) throw InvalidSpec("gauge dimension n must be >= 1");
}

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) {
        throw InvalidSpec(std::string("gauge parameter '") + what + "' must be finite");
    }
}

}  // namespace

GaugeSpec GaugeSpec::power_log(double d, double b, int n) {
    require_dimension(n);
    require_finite(d, "d");
    require_finite(b, "b");
    if (d < 0.0) throw InvalidSpec("power_log gauge needs d >= 0");
    if (d == 0.0 && b >= 0.0) throw InvalidSpec("power_log gauge with d = 0 needs b < 0 so that h(0+) = 0");
    GaugeSpec g;
    g.family_ = Family::PowerLog;
    g.n_ = n;
    g.d_ = d;
    g.b_ = b;
    return g;
}

GaugeSpec GaugeSpec::log_only(double b, int n) {
    require_dimension(n);
    require_finite(b, "b");
    if (b >= 0.0) throw InvalidSpec("log_only gauge needs b < 0");
    GaugeSpec g;
    g.family_ = Family::LogOnly;
    g.n_ = n;
    g.b_ = b;
    return g;
}

GaugeSpec GaugeSpec::exp_log(double b, double kappa, int n) {
    require_dimension(n);
    require_finite(b, "b");
    require_finite(kappa, "kappa");
    if (b >= 0.0) throw InvalidSpec("exp_log gauge needs b < 0");
    if (!(kappa > 0.0 && kappa < 1.0)) throw InvalidSpec("exp_log gauge needs 0 < kappa < 1");
    GaugeSpec g;
    g.family_ = Family::ExpLog;
    g.n_ = n;
    g.b_ = b;
    g.kappa_ = kappa;
    return g;
}

GaugeSpec GaugeSpec::xi_integral(std::vector<std::pair<double, double>> nodes, int n) {
    require_dimension(n);
    if (nodes.empty()) throw InvalidSpec("xi table must not be empty");
    std::vector<std::pair<double, double>> by_t;
    by_t.reserve(nodes.size());
    for (const auto& [s, xi] : nodes) {
        if (!(s > 0.0 && s <= 1.0)) throw InvalidSpec("xi table radii must lie in (0,1]");
        require_finite(xi, "xi");
        if (xi < 0.0) throw InvalidSpec("xi values must be non-negative (h non-decreasing)");
        by_t.emplace_back(-std::log2(s), xi);
    }
    std::sort(by_t.begin(), by_t.end());
    for (std::size_t i = 1; i < by_t.size(); ++i) {
        if (by_t[i].first == by_t[i - 1].first) throw InvalidSpec("xi table has repeated radii");
    }
    GaugeSpec g;
    g.family_ = Family::XiIntegral;
    g.n_ = n;
    g.xi_nodes_ = std::move(nodes);
    double acc = by_t.front().second * by_t.front().first;
    for (std::size_t i = 0; i < by_t.size(); ++i) {
        if (i > 0) {
            const double dt = by_t[i].first - by_t[i - 1].first;
            acc += 0.5 * dt * (by_t[i].second + by_t[i - 1].second);
        }
        g.xi_t_.push_back(by_t[i].first);
        g.xi_values_.push_back(by_t[i].second);
        g.xi_cumulative_.push_back(acc);
    }
    return g;
}

GaugeSpec GaugeSpec::table(const std::vector<double>& values, int n) {
    require_dimension(n);
    if (values.size() < 2) throw InvalidSpec("gauge table needs at least two values");
    GaugeSpec g;
    g.family_ = Family::Table;
    g.n_ = n;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!(values[j] > 0.0) || !std::isfinite(values[j])) {
            std::ostringstream msg;
            msg << "gauge table entry " << j << " is not a positive finite number";
            throw InvalidSpec(msg.str());
        }
        if (j > 0 && values[j] > values[j - 1]) {
            std::ostringstream msg;
            msg << "gauge table increases at j = " << j << " (h must be non-decreasing in r)";
            throw InvalidSpec(msg.str());
        }
        g.table_log2_.push_back(std::log2(values[j]));
    }
    return g;
}

GaugeSpec GaugeSpec::product(const GaugeSpec& first, const GaugeSpec& second) {
    GaugeSpec g;
    g.family_ = Family::Product;
    g.n_ = first.n_ + second.n_;
    g.factors_ = {first, second};
    return g;
}

double GaugeSpec::log2_at_t(double t) const {
    switch (family_) {
        case Family::PowerLog:
            return -d_ * t + b_ * std::log2(1.0 + t);
        case Family::LogOnly:
            return b_ * std::log2(1.0 + t);
        case Family::ExpLog:
            return b_ * std::pow(t, kappa_) / kLn2;
        case Family::XiIntegral: {
            const auto& ts = xi_t_;
            if (t <= ts.front()) return -xi_values_.front() * t;
            if (t >= ts.back()) {
                return -(xi_cumulative_.back() + xi_values_.back() * (t - ts.back()));
            }
            const auto it = std::upper_bound(ts.begin(), ts.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - ts.begin()) - 1;
            const double dt = t - ts[i];
            const double slope = (xi_values_[i + 1] - xi_values_[i]) / (ts[i + 1] - ts[i]);
            const double integral = dt * (xi_values_[i] + 0.5 * slope * dt);
            return -(xi_cumulative_[i] + integral);
        }
        case Family::Table: {
            const auto& v = table_log2_;
            const double last = static_cast<double>(v.size() - 1);
            if (t >= last) {
                return v.back() + (v.back() - v[v.size() - 2]) * (t - last);
            }
            const auto i = static_cast<std::size_t>(std::floor(t));
            const double frac = t - static_cast<double>(i);
            return v[i] + frac * (v[i + 1] - v[i]);
        }
        case Family::Product:
            return factors_[0].log2_at_t(t) + factors_[1].log2_at_t(t);
    }
    return 0.0;
}

double GaugeSpec::operator()(double r) const {
    if (!(r > 0.0 && r <= 1.0)) throw InvalidSpec("gauge functions are evaluated on (0,1] only");
    return std::exp2(log2_at_t(-std::log2(r)));
}

double GaugeSpec::h(std::size_t j) const { return std::exp2(log2_h(j)); }

std::size_t GaugeSpec::stored_length() const {
    if (family_ == Family::Table) return table_log2_.size();
    if (family_ == Family::Product) {
        return std::min(factors_[0].stored_length(), factors_[1].stored_length());
    }
    return SeqSpec::kUnbounded;
}

SeqSpec GaugeSpec::as_sequence() const {
    switch (family_) {
        case Family::PowerLog: return SeqSpec::power_log(-d_, b_);
        case Family::LogOnly: return SeqSpec::power_log(0.0, b_);
        case Family::ExpLog: return SeqSpec::exp_log(0.0, 0.0, b_ / kLn2, kappa_);
        case Family::Table: return SeqSpec::table_from_log2(table_log2_);
        case Family::Product: return factors_[0].as_sequence() * factors_[1].as_sequence();
        case Family::XiIntegral: {
            std::vector<double> values(4097);
            for (std::size_t j = 0; j < values.size(); ++j) values[j] = log2_h(j);
            return SeqSpec::table_from_log2(std::move(values));
        }
    }
    return SeqSpec::power_log(0.0, 0.0);
}

std::string GaugeSpec::describe() const {
    std::ostringstream out;
    switch (family_) {
        case Family::PowerLog: out << "power_log(d=" << d_ << ", b=" << b_ << ")"; break;
        case Family::LogOnly: out << "log_only(b=" << b_ << ")"; break;
        case Family::ExpLog: out << "exp_log(b=" << b_ << ", kappa=" << kappa_ << ")"; break;
        case Family::XiIntegral: out << "xi_integral[" << xi_t_.size() << "]"; break;
        case Family::Table: out << "table[" << table_log2_.size() << "]"; break;
        case Family::Product:
            out << factors_[0].describe() << " x " << factors_[1].describe();
            break;
    }
    out << " on R^" << n_;
    return out.str();
}

std::vector<double> gauge_sequence(const GaugeSpec& h, std::size_t J) {
    std::vector<double> values(J + 1);
    for (std::size_t j = 0; j <= J; ++j) values[j] = h.h(j);
    return values;
}

// ---------------------------------------------------------------------------
// Criteria

namespace {

constexpr double kSlopeMargin = 0.02;

/// Largest usable index for grid checks: tables are never extrapolated.
std::size_t grid_limit(const GaugeSpec& h, std::size_t wanted) {
    const std::size_t stored = h.stored_length();
    if (stored == SeqSpec::kUnbounded) return wanted;
    return std::min(wanted, stored - 1);
}

double max_xi(const GaugeSpec& h) {
    return std::max_element(h.xi_nodes().begin(), h.xi_nodes().end(),
                             [](const auto& a, const auto& b) { return a.second < b.second; })
                ->second;
}

double min_xi(const GaugeSpec& h) {
    return std::min_element(h.xi_nodes().begin(), h.xi_nodes().end(),
                            [](const auto& a, const auto& b) { return a.second < b.second; })
        ->second;
}

/// min over j of log2 h_{j+k} - log2 h_j, for k = 0..K, with j + k <= limit.
std::vector<double> min_log_ratios(const GaugeSpec& h, std::size_t J, std::size_t K,
                                   std::vector<std::size_t>* argmin = nullptr) {
    const std::size_t limit = grid_limit(h, J + K);
    std::vector<double> y(K + 1, kInf);
    if (argmin) argmin->assign(K + 1, 0);
    for (std::size_t k = 0; k <= K && k <= limit; ++k) {
        for (std::size_t j = 0; j <= J && j + k <= limit; ++j) {
            const double v = h.log2_h(j + k) - h.log2_h(j);
            if (v < y[k]) {
                y[k] = v;
                if (argmin) (*argmin)[k] = j;
            }
        }
    }
    return y;
}

/// Slope of the fitted profile through y[first..last].
double tail_slope(const std::vector<double>& y, std::size_t first, std::size_t last) {
    std::vector<double> window(y.begin() + static_cast<std::ptrdiff_t>(first),
                               y.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    return fit_log_profile(window, first).slope;
}

}  // namespace

MeasureFunctionReport is_measure_function(const GaugeSpec& h, std::size_t J, std::size_t K,
                                          double band) {
    if (J < 1 || K < 1) throw InvalidSpec("is_measure_function needs J, K >= 1");
    const int n = h.dimension();
    std::vector<std::size_t> argmin;
    const std::vector<double> y = min_log_ratios(h, J, K, &argmin);

    MeasureFunctionReport report;
    double worst = kInf;
    std::size_t worst_k = 1;
    std::size_t usable_k = 0;
    for (std::size_t k = 1; k <= K; ++k) {
        if (!std::isfinite(y[k])) break;
        usable_k = k;
        const double v = y[k] + static_cast<double>(k) * n;
        if (v < worst) {
            worst = v;
            worst_k = k;
        }
    }
    if (usable_k == 0) throw InvalidSpec("gauge table too short for the ratio grid");
    report.c = std::exp2(worst);
    report.violation = std::make_pair(argmin[worst_k], worst_k);

    using F = GaugeSpec::Family;
    switch (h.family()) {
        case F::PowerLog:
            if (h.d() < n) {
                report.verdict = Membership::exact(true, "power_log with d < n");
            } else if (h.d() > n) {
                report.verdict = Membership::exact(false, "d > n: 2^{kn} h_{j+k}/h_j ~ 2^{-k(d-n)} -> 0");
            } else {
                report.verdict = Membership::exact(
                    h.b() >= 0.0, h.b() >= 0.0 ? "d = n with b >= 0: ratio bounded below by 2^{-kn}"
                                               : "d = n with b < 0: 2^{kn} h_{j+k}/h_j -> 0 as k grows");
            }
            break;
        case F::LogOnly:
            if (h.b() >= -1.0) {
                report.verdict = Membership::exact(true, "log_only with b in [-1,0): (1+k)^b 2^{kn} >= 1");
            }
            break;
        case F::ExpLog:
            report.verdict = Membership::exact(
                true, "exp_log: kn + (b/ln2)((j+k)^kappa - j^kappa) >= kn + (b/ln2)k^kappa, bounded below");
            break;
        case F::XiIntegral:
            if (min_xi(h) >= 0.0 && max_xi(h) <= n) {
                report.verdict = Membership::exact(true, "xi takes values in [0,n]");
            }
            break;
        case F::Product: {
            const auto a = is_measure_function(h.factors()[0], J, K, band).verdict;
            const auto b = is_measure_function(h.factors()[1], J, K, band).verdict;
            if (a.analytic && b.analytic && a.yes() && b.yes()) {
                report.verdict = Membership::exact(true, "product of measure functions");
            }
            break;
        }
        case F::Table:
            break;
    }
    if (report.verdict.analytic) return report;

    std::ostringstream why;
    why << "ratio grid j <= " << J << ", k <= " << usable_k << ": min 2^{kn} h_{j+k}/h_j = "
        << report.c << " at (j,k) = (" << argmin[worst_k] << "," << worst_k << ")";
    if (report.c >= 1.0 / band) {
        report.verdict = Membership::numeric(Tri::Yes, why.str());
        return report;
    }
    std::vector<double> shifted(usable_k + 1);
    for (std::size_t k = 0; k <= usable_k; ++k) shifted[k] = y[k] + static_cast<double>(k) * n;
    if (usable_k >= 6) {
        const double slope = tail_slope(shifted, usable_k / 2, usable_k);
        why << "; tail slope " << slope;
        if (slope < -kSlopeMargin) {
            report.verdict = Membership::numeric(Tri::No, why.str());
            return report;
        }
    }
    report.verdict = Membership::numeric(Tri::Inconclusive, why.str());
    return report;
}

PorosityReport porosity_check(const GaugeSpec& h, std::size_t J, std::size_t K) {
    if (J < 1 || K < 4) throw InvalidSpec("porosity_check needs J >= 1 and K >= 4");
    const int n = h.dimension();
    const std::vector<double> y = min_log_ratios(h, J, K);
    std::size_t usable_k = 0;
    for (std::size_t k = 1; k <= K && std::isfinite(y[k]); ++k) usable_k = k;
    if (usable_k < 4) throw InvalidSpec("gauge table too short for the porosity grid");

    auto constant_for = [&](double eps) {
        double worst = kInf;
        for (std::size_t k = 1; k <= usable_k; ++k) {
            worst = std::min(worst, y[k] + (n - eps) * static_cast<double>(k));
        }
        return std::exp2(worst);
    };
    auto analytic = [&](bool porous, double eps, const std::string& why) {
        PorosityReport r;
        r.verdict = Membership::exact(porous, why);
        r.epsilon = porous ? eps : 0.0;
        r.c = porous ? constant_for(eps) : 0.0;
        return r;
    };

    using F = GaugeSpec::Family;
    switch (h.family()) {
        case F::PowerLog:
            if (h.d() < n) return analytic(true, n - h.d(), "power_log with d < n (log factor absorbed into c)");
            return analytic(false, 0.0, "d >= n: the ratio decays like 2^{-kn} up to logarithms");
        case F::LogOnly:
        case F::ExpLog:
            return analytic(true, n, "ratio decays slower than any 2^{-delta k}");
        case F::XiIntegral:
            if (max_xi(h) < n) return analytic(true, n - max_xi(h), "sup xi < n");
            break;
        case F::Product:
            for (const GaugeSpec& f : h.factors()) {
                const PorosityReport part = porosity_check(f, J, K);
                if (part.verdict.analytic && part.verdict.yes()) {
                    return analytic(true, part.epsilon, "a factor set is porous");
                }
            }
            break;
        case F::Table:
            break;
    }

    const double slope = tail_slope(y, usable_k / 2, usable_k);
    PorosityReport report;
    report.epsilon = n + slope;
    std::ostringstream why;
    why << "least-squares slope " << slope << " over k in [" << usable_k / 2 << ", " << usable_k
        << "], eps = " << report.epsilon;
    if (report.epsilon > kSlopeMargin) {
        report.c = constant_for(report.epsilon);
        report.verdict = Membership::numeric(Tri::Yes, why.str());
    } else {
        report.epsilon = std::max(report.epsilon, 0.0);
        report.verdict = Membership::numeric(Tri::No, why.str());
    }
    return report;
}

Membership lebesgue_null(const GaugeSpec& h, std::size_t J) {
    const int n = h.dimension();
    using F = GaugeSpec::Family;
    switch (h.family()) {
        case F::PowerLog:
            if (h.d() < n) return Membership::exact(true, "r^n/h(r) = r^{n-d}(1+|log r|)^{-b} -> 0");
            if (h.d() > n) return Membership::exact(false, "r^n/h(r) = r^{n-d}(1+|log r|)^{-b} is unbounded");
            return Membership::exact(h.b() > 0.0, h.b() > 0.0 ? "r^n/h(r) = (1+|log r|)^{-b} -> 0"
                                                              : "r^n/h(r) = (1+|log r|)^{-b} stays away from 0");
        case F::LogOnly:
        case F::ExpLog:
            return Membership::exact(true, "h decays slower than any power");
        case F::XiIntegral:
            if (max_xi(h) < n) return Membership::exact(true, "sup xi < n");
            break;
        case F::Product:
            for (const GaugeSpec& f : h.factors()) {
                const Membership part = lebesgue_null(f, J);
                if (part.analytic && part.yes()) return Membership::exact(true, "a factor set is Lebesgue-null");
            }
            break;
        case F::Table:
            break;
    }
    const std::size_t limit = grid_limit(h, J);
    if (limit < 8) return Membership::numeric(Tri::Inconclusive, "fewer than 9 gauge values");
    std::vector<double> f;
    for (std::size_t j = limit / 2; j <= limit; ++j) {
        f.push_back(-static_cast<double>(j) * n - h.log2_h(j));
    }
    const LogProfileFit fit = fit_log_profile(f, limit / 2);
    std::ostringstream why;
    why << "log2(r^n/h) fitted on j in [" << limit / 2 << ", " << limit << "]: slope " << fit.slope
        << ", log coefficient " << fit.log_coef;
    if (fit.slope < -kSlopeMargin) return Membership::numeric(Tri::Yes, why.str());
    if (fit.slope > kSlopeMargin) return Membership::numeric(Tri::No, why.str());
    return Membership::numeric(Tri::Inconclusive, why.str());
}

DoublingReport doubling_check(const GaugeSpec& h, std::size_t samples) {
    if (samples < 1) throw InvalidSpec("doubling_check needs at least one sample");
    DoublingReport report;
    double best = -kInf;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = samples == 1 ? 0.0 : 30.0 * static_cast<double>(i) / static_cast<double>(samples - 1);
        const double v = h.log2_at_t(t) - h.log2_at_t(t + 1.0);
        if (v > best) {
            best = v;
            report.r_at_sup = std::exp2(-t);
        }
    }
    report.c = std::exp2(best);
    return report;
}

namespace {

double xi_at(const GaugeSpec& h, double t, double step, bool& flagged) {
    using F = GaugeSpec::Family;
    switch (h.family()) {
        case F::PowerLog: return h.d() - h.b() / ((1.0 + t) * kLn2);
        case F::LogOnly: return -h.b() / ((1.0 + t) * kLn2);
        case F::ExpLog:
            if (t <= 0.0) {
                flagged = true;
                return -(h.log2_at_t(step) - h.log2_at_t(0.0)) / step;
            }
            return -(h.b() / kLn2) * h.kappa() * std::pow(t, h.kappa() - 1.0);
        case F::XiIntegral: {
            const double delta = 1e-6;
            if (t < delta) return -(h.log2_at_t(delta) - h.log2_at_t(0.0)) / delta;
            // xi is the exact derivative of the piecewise-quadratic log profile.
            return -(h.log2_at_t(t + delta) - h.log2_at_t(t - delta)) / (2.0 * delta);
        }
        case F::Table: {
            flagged = true;
            const double lo = std::max(0.0, t - 0.5);
            return -(h.log2_at_t(t + 0.5) - h.log2_at_t(lo)) / (t + 0.5 - lo);
        }
        case F::Product: {
            bool f1 = false;
            bool f2 = false;
            const double v = xi_at(h.factors()[0], t, step, f1) + xi_at(h.factors()[1], t, step, f2);
            flagged = flagged || f1 || f2;
            return v;
        }
    }
    return 0.0;
}

}  // namespace

std::vector<XiSample> xi_estimate(const GaugeSpec& h, std::size_t grid, double t_max) {
    if (grid < 2) throw InvalidSpec("xi_estimate needs grid >= 2");
    if (!(t_max > 0.0)) throw InvalidSpec("xi_estimate needs t_max > 0");
    const double step = t_max / static_cast<double>(grid - 1);
    std::vector<XiSample> out(grid);
    for (std::size_t i = 0; i < grid; ++i) {
        const double t = step * static_cast<double>(i);
        out[i].s = std::exp2(-t);
        out[i].xi = xi_at(h, t, step, out[i].flagged);
    }
    return out;
}

GaugeSpec xi_roundtrip(const std::vector<XiSample>& samples, int n) {
    std::vector<std::pair<double, double>> nodes;
    nodes.reserve(samples.size());
    for (const XiSample& s : samples) nodes.emplace_back(s.s, s.xi);
    return GaugeSpec::xi_integral(std::move(nodes), n);
}

}  // namespace fractrace
