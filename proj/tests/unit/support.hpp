#pragma once

// Shared generators and brute-force oracles for the unit tests. Oracles are
// written from the defining formulas and do not call into the code under test
// except to read its inputs.

#include "fractrace/gauge.hpp"
#include "fractrace/hset.hpp"
#include "fractrace/seq.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

namespace fractrace::testing {

inline constexpr int kCases = 150;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    int integer(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }

    bool coin() { return (rng_() & 1U) != 0; }

    // power_log or exp_log with moderate parameters.
    SeqSpec closed_seq() {
        const double s = uniform(-2.0, 2.0);
        const double kappa = uniform(-3.0, 3.0);
        if (coin()) return SeqSpec::power_log(s, kappa);
        return SeqSpec::exp_log(s, kappa, uniform(-1.0, 1.0), uniform(0.1, 0.9));
    }

    // Random walk in log2 with increments in [lo, hi].
    std::vector<double> walk(std::size_t length, double lo, double hi) {
        std::vector<double> v{uniform(-1.0, 1.0)};
        while (v.size() < length) v.push_back(v.back() + uniform(lo, hi));
        return v;
    }

    SeqSpec table_seq(std::size_t length) { return SeqSpec::table_from_log2(walk(length, -1.0, 1.0)); }

    // A monotone measure function on R^n from the analytic families
    // (power_log is monotone on (0,1] iff b <= d ln 2).
    GaugeSpec measure_gauge(int n) {
        switch (integer(0, 2)) {
            case 0: {
                const double d = uniform(0.1, n - 0.1);
                return GaugeSpec::power_log(d, uniform(-1.0, std::min(1.0, d * std::log(2.0))), n);
            }
            case 1: return GaugeSpec::log_only(uniform(-1.0, -0.05), n);
            default: return GaugeSpec::exp_log(uniform(-2.0, -0.1), uniform(0.1, 0.9), n);
        }
    }

private:
    std::mt19937_64 rng_;
};

// 2^{sj} (1+j)^kappa 2^{c j^rho}
inline double profile_value(double s, double kappa, double c, double rho, double j) {
    return std::pow(2.0, s * j) * std::pow(1.0 + j, kappa) * std::pow(2.0, c * std::pow(j, rho));
}

// l_v membership of 2^{sj}(1+j)^kappa from the p-series / geometric tests.
inline bool power_log_in_ell(double s, double kappa, double v) {
    if (s < 0.0) return true;
    if (s > 0.0) return false;
    if (std::isinf(v)) return kappa <= 0.0;
    return kappa * v < -1.0;
}

// Box count: distinct level-j ancestors of the deepest cells.
inline std::size_t box_count(const HSetApprox& set, int j) {
    const int shift = set.depth() - j;
    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    for (const HSetCell& c : set.deepest()) {
        seen.insert({c.m[0] >> shift, set.dimension() == 2 ? c.m[1] >> shift : 0});
    }
    return seen.size();
}

// Mass of the open ball under the uniform-on-cells measure, 1-d, by brute force.
inline double ball_mass_1d(const HSetApprox& set, double gamma, double r) {
    const double s = std::ldexp(1.0, -set.depth());
    double total = 0.0;
    for (const HSetCell& c : set.deepest()) {
        const double a = static_cast<double>(c.m[0]) * s;
        const double overlap = std::min(a + s, gamma + r) - std::max(a, gamma - r);
        if (overlap > 0.0) total += c.weight.value() * overlap / s;
    }
    return total;
}

// Composite Simpson rule on [a, b] with an even number of panels.
template <class F>
double simpson(F f, double a, double b, int panels = 4096) {
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

// Smallest k2 with sum_{i=k}^{k2} 1/i >= 2.
inline std::size_t harmonic_k2_oracle(std::size_t k) {
    long double sum = 0.0L;
    std::size_t i = k;
    for (;; ++i) {
        sum += 1.0L / static_cast<long double>(i);
        if (sum >= 2.0L) return i;
    }
}

inline const double kCantorD = std::log(2.0) / std::log(3.0);

}  // namespace fractrace::testing
