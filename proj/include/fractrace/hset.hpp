#pragma once

#include "fractrace/gauge.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace fractrace {

using Point = std::array<double, 2>;
using CellIndex = std::array<std::int64_t, 2>;

/// Dyadic rational num / 2^exp.
struct DyadicWeight {
    std::uint64_t num = 0;
    int exp = 0;

    double value() const { return std::ldexp(static_cast<double>(num), -exp); }
    bool operator==(const DyadicWeight& other) const;
};

/// Closed dyadic cell [m 2^{-j}, (m+1) 2^{-j}]^n.
struct HSetCell {
    CellIndex m{0, 0};
    DyadicWeight weight;
    std::int64_t parent = -1;  // index into the previous level
};

/// Finite-depth generation tree; level j holds cells of side 2^{-j} sorted
/// lexicographically.  Immutable once built.
class HSetApprox {
public:
    HSetApprox(int n, std::vector<std::vector<HSetCell>> levels);

    int dimension() const { return n_; }
    int depth() const { return static_cast<int>(levels_.size()) - 1; }
    const std::vector<HSetCell>& level(int j) const { return levels_.at(static_cast<std::size_t>(j)); }
    const std::vector<HSetCell>& deepest() const { return levels_.back(); }
    std::size_t count(int j) const { return level(j).size(); }

    /// Lower corner of a cell at level j.
    Point corner(int j, const HSetCell& cell) const;
    double side(int j) const { return std::ldexp(1.0, -j); }

    /// Sum of the children's weights equals the parent's weight at every node,
    /// and the root carries mass 1 (exact integer arithmetic).
    bool measure_conserved() const;

    /// Copy with the given cell and all its descendants set to weight 0.
    HSetApprox zero_subtree(int j, std::size_t index) const;

    /// Distance from x to the union of deepest cells (Euclidean).
    double distance_to_set(const Point& x) const;

private:
    int n_;
    std::vector<std::vector<HSetCell>> levels_;
};

/// Dyadic Cantor scheme with N(j) ~ 1/h_j surviving cells.  Product gauges
/// with two one-dimensional factors yield product sets in the plane.
HSetApprox build_cantor(const GaugeSpec& h, int J);

/// Cantor scheme for the sequence of counts N(0..J) in dimension 1.
HSetApprox build_from_counts(const std::vector<std::uint64_t>& counts);

/// Cell counts N(j) = max(N(j-1), round(h_0/h_j)); throws InfeasibleInput
/// when a level would need more than 2^n children per cell.
std::vector<std::uint64_t> target_counts(const GaugeSpec& h, int J);

HSetApprox product_set(const HSetApprox& first, const HSetApprox& second);

struct BallMeasure {
    double outer = 0.0;  // all deepest cells meeting the open ball
    double inner = 0.0;  // proportional share of each cell
    bool resolved = true;
};

BallMeasure measure_ball(const HSetApprox& set, const Point& gamma, double r);

struct HSetSample {
    Point gamma{0.0, 0.0};
    double r = 1.0;
    double ratio = 0.0;  // outer measure / h(r)
};

struct HSetVerification {
    double c1 = 0.0;
    double c2 = 0.0;
    bool pass = false;
    HSetSample worst_low;
    HSetSample worst_high;
    std::vector<HSetSample> samples;
};

/// Samples gamma among corners of deepest cells and r = 2^{-t}, t in [0, J-2].
HSetVerification verify_hset(const HSetApprox& set, const GaugeSpec& h, std::size_t samples,
                             std::uint64_t seed, double band = kDefaultBand);

struct PorosityWitness {
    Point gamma{0.0, 0.0};
    double r = 0.0;
    Point hole{0.0, 0.0};
    double hole_radius = 0.0;
};

struct PorositySearch {
    std::optional<PorosityWitness> witness;
    bool resolved = true;  // eta*r is above the set's resolution
};

/// Looks for x with B(x, eta r) inside B(gamma, r) and dist(x, set) >= eta r.
/// Since gamma belongs to the set, eta <= 1/2 is necessary.
PorositySearch porosity_witness(const HSetApprox& set, const Point& gamma, double r, double eta);

}  // namespace fractrace
