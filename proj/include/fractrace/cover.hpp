#pragma once

#include "fractrace/gauge.hpp"
#include "fractrace/hset.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace fractrace {

/// Axis-parallel closed box in R^n, n <= 2.
struct Box {
    int n = 1;
    Point lo{0.0, 0.0};
    Point hi{0.0, 0.0};

    bool contains(const Point& x) const;
    bool contains(const Box& other) const;
    double side(int axis) const { return hi[axis] - lo[axis]; }
};

/// Q_{jm}: cube of side 2^{-j} centred at 2^{-j} m.
struct GridCube {
    int j = 0;
    CellIndex m{0, 0};
    int n = 1;

    double side() const { return std::ldexp(1.0, -j); }
    Point center() const;
    /// rQ: concentric cube with side r 2^{-j}.
    Box box(double scale = 1.0) const;
    /// The 3^n - 1 cubes sharing a face, edge or corner.
    std::vector<GridCube> neighbors() const;
};

GridCube grid_cube(int j, CellIndex m, int n);

/// One Q(j,i): ball centre gamma_i, the grid block it starts from, and the
/// grid cubes after each enlargement (2^n, 4^n, 6^n cubes).
struct BigCube {
    std::size_t i = 0;
    Point center{0.0, 0.0};
    CellIndex block{0, 0};
    std::array<std::vector<CellIndex>, 3> stages;
};

struct DyadicCover {
    int j = 0;
    int n = 1;
    double ball_radius = 0.0;   // 2^{-j-1}
    double inner_radius = 0.0;  // 2^{-j-1}/3
    std::vector<BigCube> big_cubes;
    std::vector<CellIndex> grid_cubes;  // union of final stages, sorted
    std::size_t duplicates_removed = 0;

    std::size_t count() const { return big_cubes.size(); }
};

/// Lexicographic greedy net: every point of the set lies within `radius`
/// of a centre, and centres are at least 2/3 radius apart.
std::vector<Point> greedy_ball_cover(const HSetApprox& set, double radius);

DyadicCover optimal_cover(const HSetApprox& set, int j);

struct CoverCheck {
    bool coverage = false;
    bool disjoint_inner_balls = false;
    bool multiplicity = false;
    std::size_t min_cubes = 0;
    std::size_t max_cubes = 0;

    bool ok() const { return coverage && disjoint_inner_balls && multiplicity; }
};

CoverCheck verify_cover(const HSetApprox& set, const DyadicCover& cover);

struct CountRow {
    int j = 0;
    std::size_t count = 0;
    double inverse_h = 0.0;
    double ratio = 0.0;  // N_j h_j
    std::size_t grid_count = 0;
    double grid_ratio = 0.0;
};

struct CountLaw {
    std::vector<CountRow> rows;
    double band_ratio = 0.0;  // max/min of N_j h_j
    double grid_band_ratio = 0.0;
    bool pass = false;
};

CountLaw count_vs_gauge(const HSetApprox& set, const GaugeSpec& h, int j_lo, int j_hi,
                        double band = kDefaultBand);

/// One-dimensional partition of unity phi(t) = g(t) / sum_k g(t-k) with g a
/// bump supported on (-3/4, 3/4); phi_{jm}(x) = prod_a phi(2^j x_a - m_a).
class PartitionProfile {
public:
    static const PartitionProfile& standard();
    static constexpr int kMaxOrder = 4;

    double value(double t) const;
    /// sup |phi^{(k)}|, k <= kMaxOrder.
    double derivative_bound(int k) const { return bounds_.at(static_cast<std::size_t>(k)); }
    /// max over |gamma| = order of prod_a sup |phi^{(gamma_a)}|.
    double multi_bound(int order, int n) const;
    double evaluate(int j, const CellIndex& m, int n, const Point& x) const;

private:
    PartitionProfile();
    std::array<double, kMaxOrder + 1> bounds_{};
};

struct SupportEntry {
    CellIndex m{0, 0};
    Box support;
};

struct PartitionSupports {
    int j = 0;
    std::vector<SupportEntry> entries;
    std::vector<double> budgets;  // c_{|gamma|} 2^{j |gamma|}, |gamma| = 0..4
    int min_multiplicity = 0;
    int max_multiplicity = 0;
    bool covers = false;  // every sampled point of the neighbourhood in >= 1 support
};

PartitionSupports partition_supports(const HSetApprox& set, const DyadicCover& cover);

}  // namespace fractrace
