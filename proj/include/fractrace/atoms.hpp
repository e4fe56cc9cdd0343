#pragma once

#include "fractrace/cover.hpp"
#include "fractrace/hset.hpp"
#include "fractrace/seq.hpp"

#include <array>
#include <map>
#include <optional>
#include <vector>

namespace fractrace {

using MultiIndex = std::array<int, 2>;

/// All multi-indices with |alpha| <= order in dimension n, by degree then
/// lexicographically.
std::vector<MultiIndex> multi_indices(int order, int n);

/// exp(-1/(1-|w|^2)) on the open unit ball, 0 outside.
double unit_bump(const Point& w, int n);

/// One additive piece of an atom.  Every kind evaluates to exactly 0 outside
/// `support`.
struct AtomTerm {
    enum class Kind { Partition, PartitionEnvelope, Constant, Bump, Psi };

    Kind kind = Kind::Bump;
    double coefficient = 1.0;
    int j = 0;                 // Partition*: phi_{jm}
    CellIndex m{0, 0};
    Point center{0.0, 0.0};    // Bump/Psi/envelope centre
    double radius = 1.0;       // Bump/Psi/envelope radius
    std::vector<std::pair<MultiIndex, double>> poly;  // Psi: sum c_beta w^beta
    Box support;

    double operator()(const Point& x, int n) const;
    /// Length scale on which the term varies.
    double feature_scale() const;
};

/// Candidate (sigma,p)_{K,L}-atom attached to Q_{jm} with support dilation b.
struct Atom {
    int n = 1;
    int j = 0;
    CellIndex m{0, 0};
    double b = 1.5;
    std::vector<AtomTerm> terms;

    double operator()(const Point& x) const;
    Box allowed_support() const { return grid_cube(j, m, n).box(b); }
};

inline constexpr int kQuadratureNodes = 256;

/// int ((x - origin)/scale)^beta a(x) dx for each beta, termwise midpoint
/// quadrature on each term's support.
std::vector<double> atom_moments(const Atom& a, const std::vector<MultiIndex>& betas,
                                 const Point& origin = {0.0, 0.0}, double scale = 1.0,
                                 int nodes = kQuadratureNodes);

/// a = sigma_j^{-1} 2^{jn/p} phi_{jm} / C_K, with C_K the largest partition
/// derivative constant of order <= K.
Atom partition_atom(int j, const CellIndex& m, int n, const SeqSpec& sigma, double p, int K);

/// Constant `value` on Q_{jm}.
Atom constant_atom(int j, const CellIndex& m, int n, double value);

struct KLOrders {
    int K = 0;
    int L = -1;
};

/// Smallest K > upper index and L > -1 + n(1/p - 1)_+ - lower index (L >= -1).
KLOrders required_KL(const SeqSpec& sigma, double p, int n);

struct AtomReport {
    bool support_ok = false;
    double derivative_ratio = 0.0;  // max over |alpha| <= K of sup|D^alpha a| / budget
    MultiIndex worst_alpha{0, 0};
    double moment_max = 0.0;        // max over |beta| <= L of |int x^beta a|
    MultiIndex worst_beta{0, 0};
    bool moments_ok = true;
    bool resolution_ok = true;
    double fd_step = 0.0;
    bool valid = false;
};

/// Finite differences allowed to overshoot the budget by this relative amount.
inline constexpr double kDerivativeSlack = 0.02;

AtomReport atom_validate(const Atom& a, const SeqSpec& sigma, double p, int K, int L,
                         double moment_tol = 1e-8);

/// psi_gamma = sum_beta C[gamma][beta] w^beta bump(w), with
/// int w^beta psi_gamma = delta_{beta gamma} for |beta|, |gamma| <= L.
struct PsiFamily {
    int L = 0;
    int n = 1;
    std::vector<MultiIndex> indices;
    std::vector<std::vector<double>> coefficients;
    double condition_number = 0.0;
    double biorthogonality_error = 0.0;

    double evaluate(std::size_t gamma, const Point& w) const;
};

PsiFamily psi_family(int L, int n, int nodes = kQuadratureNodes);

struct MomentCorrection {
    Atom corrected;
    std::vector<MultiIndex> indices;
    std::vector<double> d;         // d_gamma
    Point hole_center{0.0, 0.0};
    double epsilon = 0.0;          // radius of the correction ball
    double moment_before = 0.0;    // max_beta |int x^beta a|
    double moment_after = 0.0;
};

/// Subtracts sum d_gamma psi_gamma((x-y)/eps) with y the witness hole centre
/// and eps half the hole radius.  When `set` is given the correction ball is
/// checked to keep distance >= eps from it.
MomentCorrection moment_correct(const Atom& a, const PorosityWitness& hole, const PsiFamily& psi,
                                const HSetApprox* set = nullptr);

struct LeibnizReport {
    double constant = 0.0;               // max over j, |alpha| <= K
    std::vector<std::pair<int, double>> per_level;
};

/// sup |D^alpha(phi_{jm} env)| / 2^{j|alpha|} for a fixed smooth envelope
/// (bump of the given centre and radius) over the levels listed.
LeibnizReport leibniz_constant(int n, const std::vector<int>& levels, const Point& env_center,
                               double env_radius, int K);

/// Atom phi_{jm} env normalised by tau_j^{-1} 2^{jn/p} / C, with Q_{jm}
/// the grid cube containing the envelope centre.
Atom envelope_atom(int j, int n, const SeqSpec& tau, double p,
                   const Point& env_center, double env_radius, double C);

/// lambda_{jm} grouped by level.
struct CoefGrid {
    std::map<int, std::vector<double>> levels;
    double p = 1.0;
    double q = 1.0;
};

/// (sum_j (sum_m |lambda_jm|^p)^{q/p})^{1/q}; q may be infinite.
double bpq_norm(const CoefGrid& lambda);

}  // namespace fractrace
