#pragma once

#include "fractrace/membership.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fractrace {

/// Closed-form profile of a positive sequence in log form:
///   log2 x_j = s*j + kappa*log2(1+j) + c*j^rho,   0 < rho < 1 when c != 0.
/// The stretched term c*j^rho covers gauges of type exp(b|log r|^kappa).
struct LogProfile {
    double s = 0.0;
    double kappa = 0.0;
    double c = 0.0;
    double rho = 0.0;

    double log2_at(double j) const;
    bool has_stretch() const { return c != 0.0; }

    /// Termwise product; empty when the two stretched terms have different rho.
    std::optional<LogProfile> times(const LogProfile& other) const;
    LogProfile pow(double r) const;

    /// x_j -> 0 as j -> infinity.
    bool tends_to_zero() const;
    /// sup_j x_j < infinity.
    bool bounded() const;
};

/// Admissible sequence sigma = (sigma_j), j >= 0.  Immutable value type; copies
/// share the underlying node.
class SeqSpec {
public:
    enum class Family { PowerLog, ExpLog, Table, Product, Power };

    /// sigma_j = 2^{js} (1+j)^kappa.
    static SeqSpec power_log(double s, double kappa);
    /// <a> = (2^{ja})_j.
    static SeqSpec geometric(double a) { return power_log(a, 0.0); }
    /// sigma_j = 2^{js} (1+j)^kappa 2^{c j^rho}.
    static SeqSpec exp_log(double s, double kappa, double c, double rho);
    /// Finite list; beyond the stored range terms continue geometrically with
    /// the last ratio (plotting only, never used for verdicts).
    static SeqSpec table(const std::vector<double>& values);
    /// Same as table() but from log2 of the terms (no overflow for long tables).
    static SeqSpec table_from_log2(std::vector<double> log2_values);
    static SeqSpec product(const SeqSpec& left, const SeqSpec& right);
    static SeqSpec power(const SeqSpec& base, double r);
    static SeqSpec from_profile(const LogProfile& profile);

    SeqSpec operator*(const SeqSpec& other) const { return product(*this, other); }
    SeqSpec inverse() const { return power(*this, -1.0); }

    double operator()(std::size_t j) const;
    double log2_at(std::size_t j) const;

    Family family() const;
    std::optional<LogProfile> closed_form() const;
    /// Number of terms backed by data; unbounded for closed forms.
    std::size_t stored_length() const;
    bool has_table() const { return stored_length() != kUnbounded; }

    /// Sub-specs for product/power nodes (empty otherwise).
    const SeqSpec* left() const;
    const SeqSpec* right() const;
    double exponent() const;
    const std::vector<double>& table_log2() const;

    std::string describe() const;

    static constexpr std::size_t kUnbounded = static_cast<std::size_t>(-1);

    struct Node;

private:
    explicit SeqSpec(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// sigma_{j+1}/sigma_j extremes over 0 <= j < J.
struct AdmissibilityWitness {
    double d0 = 0.0;
    double d1 = 0.0;
};

AdmissibilityWitness admissibility_witness(const SeqSpec& sigma, std::size_t J);

enum class IndexMethod { Analytic, Numeric };

struct IndexReport {
    double lower = 0.0;       // liminf log2(sigma_{j+1}/sigma_j)
    double upper = 0.0;       // limsup
    double boyd_lower = 0.0;  // beta
    double boyd_upper = 0.0;  // alpha
    std::size_t window = 0;   // J_max actually used
    IndexMethod method = IndexMethod::Analytic;
};

inline constexpr std::size_t kDefaultIndexWindow = 64;

/// Regularity and Boyd indices.  Closed forms are exact; tables use the
/// window [J/2, J] after removing the best-fitting (1+j)^beta factor, which
/// leaves every limit unchanged but removes the slow 1/j drift.
IndexReport indices(const SeqSpec& sigma, std::size_t j_max = kDefaultIndexWindow);

/// Same estimator applied to the first j_max+1 terms regardless of family.
IndexReport numeric_indices(const SeqSpec& sigma, std::size_t j_max = kDefaultIndexWindow);

/// x in l_v for the sequence x itself (v in (0, inf], inf allowed).
Membership sequence_in_ell(const SeqSpec& x, double v);

/// sigma^{-1} in l_v.
Membership ell_membership(const SeqSpec& sigma, double v);

/// limsup x_j > 0.
Membership limsup_positive(const SeqSpec& x);

/// lim x_j = 0.
Membership tends_to_zero(const SeqSpec& x);

struct IndexAlgebraReport {
    IndexReport sigma;
    IndexReport tau;
    IndexReport product;
    bool upper_subadditive = false;    // upper(sigma tau) <= upper(sigma) + upper(tau)
    bool lower_superadditive = false;  // lower(sigma tau) >= lower(sigma) + lower(tau)
    std::optional<bool> shift_exact;   // set when one factor is a pure <a>
    double tolerance = 0.0;
};

IndexAlgebraReport index_algebra_check(const SeqSpec& sigma, const SeqSpec& tau,
                                       std::size_t j_max = kDefaultIndexWindow);

}  // namespace fractrace
