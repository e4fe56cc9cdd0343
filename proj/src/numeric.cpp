#include "fractrace/numeric.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace fractrace {

LogProfileFit fit_log_profile(std::span<const double> y, std::size_t first) {
    const auto count = static_cast<Eigen::Index>(y.size());
    if (count < 3) {
        throw std::invalid_argument("fit_log_profile needs at least three samples");
    }
    Eigen::MatrixXd design(count, 3);
    Eigen::VectorXd rhs(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        const double x = static_cast<double>(first) + static_cast<double>(i);
        design(i, 0) = 1.0;
        design(i, 1) = x;
        design(i, 2) = std::log2(1.0 + x);
        rhs(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);
    const double residual = (design * coef - rhs).cwiseAbs().maxCoeff();
    return {coef(0), coef(1), coef(2), residual};
}

double power_tail_sum(double a, std::size_t k) {
    if (!(a > 1.0) || k == 0) {
        throw std::invalid_argument("power_tail_sum requires a > 1 and k >= 1");
    }
    // Exact partial sum up to M-1, then Euler-Maclaurin for the remainder.
    const std::size_t cutoff = std::max<std::size_t>(k, 64) + 64;
    double sum = 0.0;
    for (std::size_t i = cutoff - 1; i >= k; --i) {
        sum += std::pow(static_cast<double>(i), -a);
        if (i == k) break;
    }
    const double m = static_cast<double>(cutoff);
    const double f = std::pow(m, -a);
    const double integral = std::pow(m, 1.0 - a) / (a - 1.0);
    const double d1 = -a * std::pow(m, -a - 1.0);
    const double d3 = -a * (a + 1.0) * (a + 2.0) * std::pow(m, -a - 3.0);
    return sum + integral + 0.5 * f - d1 / 12.0 + d3 / 720.0;
}

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> midpoint_nodes(double lo, double hi, int count) {
    std::vector<double> nodes(static_cast<std::size_t>(count));
    const double centre = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (int i = 0; i < count; ++i) {
        const double unit = static_cast<double>(2 * i + 1 - count) / count;
        nodes[static_cast<std::size_t>(i)] = centre + half * unit;
    }
    return nodes;
}

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

}  // namespace fractrace
