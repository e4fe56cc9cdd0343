#pragma once

#include "fractrace/membership.hpp"
#include "fractrace/seq.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fractrace {

/// Gauge function h on (0,1].  Everything is evaluated in log form through
/// t = -log2 r, so log2 h(2^{-t}) is the primitive quantity.
class GaugeSpec {
public:
    enum class Family { PowerLog, LogOnly, ExpLog, XiIntegral, Table, Product };

    /// h(r) = r^d (1+|log2 r|)^b.
    static GaugeSpec power_log(double d, double b, int n);
    /// h(r) = (1+|log2 r|)^b, b < 0.
    static GaugeSpec log_only(double b, int n);
    /// h(r) = exp(b |log2 r|^kappa), b < 0, 0 < kappa < 1.
    static GaugeSpec exp_log(double b, double kappa, int n);
    /// h(r) = exp(-int_r^1 xi(s) ds/s) with xi piecewise linear in log2 s
    /// between the given (s, xi) nodes and constant beyond them.
    static GaugeSpec xi_integral(std::vector<std::pair<double, double>> nodes, int n);
    /// h_j = values[j]; interpolated linearly in log2 between dyadic radii,
    /// continued geometrically with the last ratio.
    static GaugeSpec table(const std::vector<double>& values, int n);
    /// h = h1 * h2 on R^{n1+n2}; the natural gauge of a product set.
    static GaugeSpec product(const GaugeSpec& first, const GaugeSpec& second);

    double operator()(double r) const;
    /// log2 h(2^{-t}), t >= 0.
    double log2_at_t(double t) const;
    /// log2 h_j.
    double log2_h(std::size_t j) const { return log2_at_t(static_cast<double>(j)); }
    double h(std::size_t j) const;

    Family family() const { return family_; }
    int dimension() const { return n_; }
    double d() const { return d_; }
    double b() const { return b_; }
    double kappa() const { return kappa_; }
    const std::vector<std::pair<double, double>>& xi_nodes() const { return xi_nodes_; }
    const std::vector<double>& table_log2() const { return table_log2_; }
    const std::vector<GaugeSpec>& factors() const { return factors_; }

    /// Number of h_j backed by data (tables only).
    std::size_t stored_length() const;

    /// The sequence (h_j)_j as a SeqSpec; closed forms stay closed.
    SeqSpec as_sequence() const;

    std::string describe() const;

private:
    GaugeSpec() = default;

    Family family_ = Family::PowerLog;
    int n_ = 1;
    double d_ = 0.0;
    double b_ = 0.0;
    double kappa_ = 0.0;
    std::vector<std::pair<double, double>> xi_nodes_;  // (s, xi) as given
    std::vector<double> xi_t_;                         // -log2 s, ascending
    std::vector<double> xi_values_;
    std::vector<double> xi_cumulative_;                // int_0^{t_i} xi
    std::vector<double> table_log2_;
    std::vector<GaugeSpec> factors_;
};

/// h_j for 0 <= j <= J.
std::vector<double> gauge_sequence(const GaugeSpec& h, std::size_t J);

inline constexpr double kDefaultBand = 32.0;

struct MeasureFunctionReport {
    Membership verdict;
    double c = 0.0;  // min over the grid of 2^{kn} h_{j+k}/h_j
    std::optional<std::pair<std::size_t, std::size_t>> violation;  // (j, k) attaining the min
};

MeasureFunctionReport is_measure_function(const GaugeSpec& h, std::size_t J = 64,
                                          std::size_t K = 32, double band = kDefaultBand);

struct PorosityReport {
    Membership verdict;
    double c = 0.0;
    double epsilon = 0.0;
};

/// Ratio criterion h(2^{-j-k})/h(2^{-j}) >= c 2^{-(n-eps)k}.
PorosityReport porosity_check(const GaugeSpec& h, std::size_t J = 64, std::size_t K = 32);

/// lim r^n / h(r) = 0.
Membership lebesgue_null(const GaugeSpec& h, std::size_t J = 256);

struct DoublingReport {
    double c = 0.0;       // sup h(r)/h(r/2) over the sampled radii
    double r_at_sup = 1.0;
};

/// Radii r = 2^{-t} with t on an even grid of [0, 30].
DoublingReport doubling_check(const GaugeSpec& h, std::size_t samples);

struct XiSample {
    double s = 0.0;
    double xi = 0.0;
    bool flagged = false;  // finite-difference or singular endpoint value
};

/// xi(s) = s d/ds ln h(s) on the grid s = 2^{-t}, t evenly spaced in [0, t_max].
std::vector<XiSample> xi_estimate(const GaugeSpec& h, std::size_t grid = 1024,
                                  double t_max = 40.0);

/// Rebuilds a xi_integral gauge from an estimate.
GaugeSpec xi_roundtrip(const std::vector<XiSample>& samples, int n);

}  // namespace fractrace
