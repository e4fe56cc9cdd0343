#pragma once

#include "fractrace/gauge.hpp"
#include "fractrace/membership.hpp"
#include "fractrace/seq.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace fractrace {

enum class Outcome { TraceExists, Dense, ConjecturedDense, Unknown, OutOfScope };
const char* to_string(Outcome outcome);

enum class PorosityMode { Auto, Yes, No };

struct ProblemSpec {
    GaugeSpec h;
    SeqSpec sigma;  // smoothness on the set
    double p = 1.0;
    double q = 1.0;
    PorosityMode porosity = PorosityMode::Auto;
};

struct Condition {
    std::string name;
    Membership value;
};

/// Boundary sequence h^{1/p} <n>^{1/p} and the fine index q_D.
struct Couple {
    SeqSpec boundary;
    double q_D = 1.0;
    std::optional<double> classical_s;  // (n-d)/p for h = r^d
};

struct Verdict {
    Outcome outcome = Outcome::Unknown;
    std::string rule;
    std::vector<Condition> conditions;
    std::optional<Couple> couple;
    std::optional<double> witness_r;  // r used when the r-scan certified a trace
};

/// q' with 1/q' = (1 - 1/q)_+; infinite for q <= 1.
double conjugate_index(double q);

/// (h_j 2^{jn})^{1/p}.
SeqSpec gauge_power_sequence(const GaugeSpec& h, double p);

/// tau = sigma h^{1/p} <n>^{1/p}, the smoothness of the ambient space.
SeqSpec ambient_smoothness(const ProblemSpec& spec);

Verdict decide(const ProblemSpec& spec);

/// Throws HypothesisRejected without porosity or for 0 < p < 1 with q absent
/// or q > p (left open).
Couple dichotomy_couple(const GaugeSpec& h, double p, std::optional<double> q);

// ---------------------------------------------------------------------------
// Numerical versions of the three density constructions

struct SubseqRow {
    std::size_t k = 0;
    std::size_t j = 0;
    double value = 0.0;  // tau_j h_j^{-1/p} 2^{-jn/p}
};

struct SubseqResult {
    std::vector<SubseqRow> rows;
    double threshold = 0.0;
    bool reached = false;
    std::size_t truncation = 0;
};

/// Record lows of tau_j h_j^{-1/p} 2^{-jn/p} over 0 <= j <= jmax.
SubseqResult density_bound_subseq(const GaugeSpec& h, const SeqSpec& tau, double p, std::size_t jmax,
                                  double threshold = 1e-3);

struct HarmonicRow {
    std::size_t k = 0;
    std::size_t k1 = 0;
    std::size_t k2 = 0;
    std::size_t j_k = 0;
    double bound = 0.0;     // (sum_{i=k}^{k1} i^{-q/p} sigma_{j(i)}^q)^{1/q}
    double tail = 0.0;      // (sum_{i>=k} i^{-q/p})^{1/q}
    double majorant = 0.0;  // C * tail
};

struct HarmonicResult {
    std::vector<HarmonicRow> rows;
    double away = 0.0;  // sigma_j^{-1} >= away on the selected indices
    double C = 0.0;     // 1/away
    std::size_t truncation = 0;
};

/// Smallest k2 with sum_{i=k}^{k2} 1/i >= 2.
std::size_t harmonic_k2(std::size_t k);

/// Smallest k1 >= k with sum_{i=k}^{k1} floor(N/i) >= N.
std::size_t harmonic_k1(std::size_t k, double N);

/// Rows for k = k_lo..k_hi.  N_j is replaced by proxy * h_0 / h_j.
HarmonicResult density_bound_harmonic(const GaugeSpec& h, const SeqSpec& sigma, double p, double q,
                                      std::size_t k_lo, std::size_t k_hi, std::size_t jmax,
                                      double proxy = 1.0);

struct BlockRow {
    std::size_t k = 0;
    std::size_t start = 0;  // j_k
    std::size_t end = 0;    // j_{k+1} (exclusive)
    double block_sum = 0.0;
    double bound = 0.0;     // (1/k)(sum_nu S_nu^{1-q})^{1/q}
    double majorant = 0.0;  // k^{-1/q'}
};

struct BlocksResult {
    std::vector<BlockRow> rows;
    std::vector<std::pair<std::size_t, double>> lambda;  // (j, lambda_j) for the last k
    double lambda_total = 0.0;
    double direct_bound = 0.0;  // (sum_j (lambda_j sigma_j)^q)^{1/q} for the last k
    double q_prime = 0.0;
    std::size_t truncation = 0;
};

BlocksResult density_bound_blocks(const SeqSpec& sigma, double q, std::size_t blocks, std::size_t jmax);

}  // namespace fractrace
