#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace fractrace {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Least-squares fit of y_i = intercept + slope * x_i + log_coef * log2(1 + x_i)
/// where x_i = first + i.  Used to strip slowly varying logarithmic factors
/// before reading off exponential rates.
struct LogProfileFit {
    double intercept = 0.0;
    double slope = 0.0;
    double log_coef = 0.0;
    double max_residual = 0.0;
};

LogProfileFit fit_log_profile(std::span<const double> y, std::size_t first);

/// Sum_{i >= k} i^{-a} for a > 1, k >= 1 (partial sum plus Euler-Maclaurin tail).
double power_tail_sum(double a, std::size_t k);

/// Uniform double in [0, 1) built from the top 53 bits; identical on every platform.
double unit_uniform(std::mt19937_64& rng);

/// Midpoint nodes on [lo, hi] with `count` points, symmetric about the centre
/// bit-for-bit (node i and node count-1-i are exact mirror images).
std::vector<double> midpoint_nodes(double lo, double hi, int count);

/// Fixed 17-significant-digit rendering used by every CSV writer.
std::string format_double(double value);

}  // namespace fractrace
