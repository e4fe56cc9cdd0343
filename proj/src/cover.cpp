#include "fractrace/cover.hpp"

#include "fractrace/errors.hpp"
#include "fractrace/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace fractrace {

bool Box::contains(const Point& x) const {
    for (int a = 0; a < n; ++a) {
        if (x[a] < lo[a] || x[a] > hi[a]) return false;
    }
    return true;
}

bool Box::contains(const Box& other) const {
    for (int a = 0; a < n; ++a) {
        if (other.lo[a] < lo[a] || other.hi[a] > hi[a]) return false;
    }
    return true;
}

Point GridCube::center() const {
    const double s = side();
    return {static_cast<double>(m[0]) * s, n > 1 ? static_cast<double>(m[1]) * s : 0.0};
}

Box GridCube::box(double scale) const {
    const Point c = center();
    const double half = 0.5 * scale * side();
    Box b;
    b.n = n;
    for (int a = 0; a < n; ++a) {
        b.lo[a] = c[a] - half;
        b.hi[a] = c[a] + half;
    }
    return b;
}

std::vector<GridCube> GridCube::neighbors() const {
    std::vector<GridCube> out;
    const int span = n > 1 ? 1 : 0;
    for (int a = -1; a <= 1; ++a) {
        for (int b = -span; b <= span; ++b) {
            if (a == 0 && b == 0) continue;
            out.push_back({j, {m[0] + a, m[1] + b}, n});
        }
    }
    return out;
}

GridCube grid_cube(int j, CellIndex m, int n) {
    if (n < 1 || n > 2) throw InvalidSpec("grid cubes support n = 1 or 2");
    if (n == 1) m[1] = 0;
    return {j, m, n};
}

// ---------------------------------------------------------------------------
// Greedy nets

std::vector<Point> greedy_ball_cover(const HSetApprox& set, double radius) {
    const int J = set.depth();
    const double s = set.side(J);
    if (!(radius >= s)) throw ResolutionError("ball radius below the set's resolution 2^{-J}");
    std::vector<Point> centers;
    if (set.dimension() == 1) {
        // Sweep: the next centre is the leftmost point of the set not yet
        // within `radius`; consecutive centres are >= radius apart.
        bool have = false;
        double last = 0.0;
        for (const HSetCell& c : set.deepest()) {
            const double a = static_cast<double>(c.m[0]) * s;
            const double b = a + s;
            if (!have || last + radius < a) {
                last = a;
                have = true;
                centers.push_back({a, 0.0});
            }
            while (last + radius < b) {
                last += radius;
                centers.push_back({last, 0.0});
            }
        }
        return centers;
    }

    const double diam = std::sqrt(2.0) * s;
    if (radius < 3.0 * diam) {
        throw ResolutionError("planar greedy nets need radius >= 3 sqrt(2) 2^{-J}");
    }
    const double reach = radius - diam;
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<Point>> buckets;
    auto key = [&](const Point& p) {
        return std::make_pair(static_cast<std::int64_t>(std::floor(p[0] / radius)),
                              static_cast<std::int64_t>(std::floor(p[1] / radius)));
    };
    for (const HSetCell& c : set.deepest()) {
        const Point p = set.corner(J, c);
        const auto [kx, ky] = key(p);
        bool covered = false;
        for (std::int64_t a = kx - 1; a <= kx + 1 && !covered; ++a) {
            for (std::int64_t b = ky - 1; b <= ky + 1 && !covered; ++b) {
                const auto it = buckets.find({a, b});
                if (it == buckets.end()) continue;
                for (const Point& q : it->second) {
                    const double dx = p[0] - q[0];
                    const double dy = p[1] - q[1];
                    if (dx * dx + dy * dy <= reach * reach) {
                        covered = true;
                        break;
                    }
                }
            }
        }
        if (!covered) {
            centers.push_back(p);
            buckets[{kx, ky}].push_back(p);
        }
    }
    return centers;
}

// ---------------------------------------------------------------------------
// Optimal cover

DyadicCover optimal_cover(const HSetApprox& set, int j) {
    if (j < 0) throw InvalidSpec("cover level must be >= 0");
    const int n = set.dimension();
    const int J = set.depth();
    const int margin = n == 1 ? 1 : 4;
    if (j > J - margin) {
        std::ostringstream msg;
        msg << "level " << j << " is too fine for a set of depth " << J << " (need j <= " << J - margin << ")";
        throw ResolutionError(msg.str());
    }
    DyadicCover cover;
    cover.j = j;
    cover.n = n;
    cover.ball_radius = std::ldexp(1.0, -j - 1);
    cover.inner_radius = cover.ball_radius / 3.0;
    const double scale = std::ldexp(1.0, j);

    std::map<CellIndex, std::size_t> seen;
    std::vector<CellIndex> all;
    for (const Point& gamma : greedy_ball_cover(set, cover.ball_radius)) {
        CellIndex block{0, 0};
        for (int a = 0; a < n; ++a) {
            const double corner = gamma[a] - cover.ball_radius;
            block[a] = static_cast<std::int64_t>(std::floor(corner * scale + 0.5));
        }
        if (seen.count(block)) {
            ++cover.duplicates_removed;
            continue;
        }
        BigCube q;
        q.i = cover.big_cubes.size();
        q.center = gamma;
        q.block = block;
        for (int stage = 0; stage < 3; ++stage) {
            const std::int64_t lo = -stage;
            const std::int64_t hi = 1 + stage;
            for (std::int64_t a = lo; a <= hi; ++a) {
                if (n == 1) {
                    q.stages[stage].push_back({block[0] + a, 0});
                    continue;
                }
                for (std::int64_t b = lo; b <= hi; ++b) {
                    q.stages[stage].push_back({block[0] + a, block[1] + b});
                }
            }
        }
        seen.emplace(block, q.i);
        all.insert(all.end(), q.stages[2].begin(), q.stages[2].end());
        cover.big_cubes.push_back(std::move(q));
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    cover.grid_cubes = std::move(all);
    return cover;
}

namespace {

/// Index range of level-j grid cubes whose interior meets the open interval (x0, x1).
std::pair<std::int64_t, std::int64_t> cube_range(double x0, double x1, double scale) {
    const auto first = static_cast<std::int64_t>(std::floor(x0 * scale - 0.5)) + 1;
    const auto last = static_cast<std::int64_t>(std::ceil(x1 * scale + 0.5)) - 1;
    return {first, last};
}

}  // namespace

CoverCheck verify_cover(const HSetApprox& set, const DyadicCover& cover) {
    CoverCheck check;
    const int n = cover.n;
    const int J = set.depth();
    const double s = set.side(J);
    const double g = std::ldexp(1.0, -cover.j);
    const double scale = std::ldexp(1.0, cover.j);

    check.coverage = true;
    for (const HSetCell& c : set.deepest()) {
        const Point lo = set.corner(J, c);
        std::array<std::pair<std::int64_t, std::int64_t>, 2> range{{{0, 0}, {0, 0}}};
        for (int a = 0; a < n; ++a) range[a] = cube_range(lo[a] - g, lo[a] + s + g, scale);
        for (std::int64_t x = range[0].first; x <= range[0].second && check.coverage; ++x) {
            for (std::int64_t y = range[1].first; y <= range[1].second; ++y) {
                if (!std::binary_search(cover.grid_cubes.begin(), cover.grid_cubes.end(), CellIndex{x, y})) {
                    check.coverage = false;
                    break;
                }
            }
        }
        if (!check.coverage) break;
    }

    // Open inner balls of radius R/3 are disjoint iff centres are >= 2R/3 apart.
    std::vector<Point> centers;
    for (const BigCube& q : cover.big_cubes) centers.push_back(q.center);
    std::sort(centers.begin(), centers.end());
    const double sep = 2.0 * cover.inner_radius;
    check.disjoint_inner_balls = true;
    for (std::size_t a = 0; a < centers.size() && check.disjoint_inner_balls; ++a) {
        for (std::size_t b = a + 1; b < centers.size(); ++b) {
            const double dx = centers[b][0] - centers[a][0];
            if (dx >= sep) break;
            const double dy = centers[b][1] - centers[a][1];
            // 9 |d|^2 >= 4 R^2 in exact dyadic arithmetic.
            if (9.0 * (dx * dx + dy * dy) < 4.0 * cover.ball_radius * cover.ball_radius) {
                check.disjoint_inner_balls = false;
                break;
            }
        }
    }

    const std::size_t low = n == 1 ? 2 : 4;
    const std::size_t high = n == 1 ? 6 : 36;
    check.min_cubes = cover.big_cubes.empty() ? 0 : static_cast<std::size_t>(-1);
    check.max_cubes = 0;
    for (const BigCube& q : cover.big_cubes) {
        check.min_cubes = std::min(check.min_cubes, q.stages[2].size());
        check.max_cubes = std::max(check.max_cubes, q.stages[2].size());
    }
    check.multiplicity = !cover.big_cubes.empty() && check.min_cubes >= low && check.max_cubes <= high;
    for (const BigCube& q : cover.big_cubes) {
        if (q.stages[0].size() != low) check.multiplicity = false;
    }
    return check;
}

CountLaw count_vs_gauge(const HSetApprox& set, const GaugeSpec& h, int j_lo, int j_hi, double band) {
    if (j_lo < 0 || j_hi < j_lo) throw InvalidSpec("count_vs_gauge needs 0 <= j_lo <= j_hi");
    CountLaw law;
    double lo = kInf;
    double hi = -kInf;
    double glo = kInf;
    double ghi = -kInf;
    for (int j = j_lo; j <= j_hi; ++j) {
        const DyadicCover cover = optimal_cover(set, j);
        CountRow row;
        row.j = j;
        row.count = cover.count();
        const double hj = h.h(static_cast<std::size_t>(j));
        row.inverse_h = 1.0 / hj;
        row.ratio = static_cast<double>(row.count) * hj;
        row.grid_count = cover.grid_cubes.size();
        row.grid_ratio = static_cast<double>(row.grid_count) * hj;
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
        glo = std::min(glo, row.grid_ratio);
        ghi = std::max(ghi, row.grid_ratio);
        law.rows.push_back(row);
    }
    law.band_ratio = hi / lo;
    law.grid_band_ratio = ghi / glo;
    law.pass = law.band_ratio <= band && law.grid_band_ratio <= band;
    return law;
}

// ---------------------------------------------------------------------------
// Partition of unity

namespace {

double profile_bump(double t) {
    const double u = 4.0 * t / 3.0;
    const double q = 1.0 - u * u;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

}  // namespace

double PartitionProfile::value(double t) const {
    const double centre = std::round(t);
    double total = 0.0;
    for (int k = -1; k <= 1; ++k) total += profile_bump(t - (centre + k));
    return profile_bump(t) / total;
}

PartitionProfile::PartitionProfile() {
    const double step = 1.0 / 2048.0;
    for (int k = 0; k <= kMaxOrder; ++k) {
        double best = 0.0;
        for (double t = -0.75; t <= 0.75; t += step / 4.0) {
            double acc = 0.0;
            double binom = 1.0;
            for (int i = 0; i <= k; ++i) {
                const double sign = (i % 2 == 0) ? 1.0 : -1.0;
                acc += sign * binom * value(t + (0.5 * k - i) * step);
                binom = binom * (k - i) / (i + 1);
            }
            best = std::max(best, std::abs(acc) / std::pow(step, k));
        }
        bounds_[static_cast<std::size_t>(k)] = best;
    }
}

const PartitionProfile& PartitionProfile::standard() {
    static const PartitionProfile profile;
    return profile;
}

double PartitionProfile::multi_bound(int order, int n) const {
    if (n == 1) return derivative_bound(order);
    double best = 0.0;
    for (int a = 0; a <= order; ++a) best = std::max(best, derivative_bound(a) * derivative_bound(order - a));
    return best;
}

double PartitionProfile::evaluate(int j, const CellIndex& m, int n, const Point& x) const {
    const double scale = std::ldexp(1.0, j);
    double v = 1.0;
    for (int a = 0; a < n; ++a) {
        const double t = x[a] * scale - static_cast<double>(m[a]);
        if (std::abs(t) >= 0.75) return 0.0;
        v *= value(t);
    }
    return v;
}

PartitionSupports partition_supports(const HSetApprox& set, const DyadicCover& cover) {
    PartitionSupports out;
    out.j = cover.j;
    const int n = cover.n;
    const PartitionProfile& profile = PartitionProfile::standard();
    for (const CellIndex& m : cover.grid_cubes) {
        out.entries.push_back({m, grid_cube(cover.j, m, n).box(1.5)});
    }
    for (int order = 0; order <= PartitionProfile::kMaxOrder; ++order) {
        out.budgets.push_back(profile.multi_bound(order, n) * std::ldexp(1.0, cover.j * order));
    }

    const int J = set.depth();
    const double s = set.side(J);
    const double g = std::ldexp(1.0, -cover.j);
    const double scale = std::ldexp(1.0, cover.j);
    const double step = g / 4.0;
    out.min_multiplicity = 1 << 30;
    out.max_multiplicity = 0;
    auto count_at = [&](const Point& x) {
        int hits = 0;
        std::array<std::pair<std::int64_t, std::int64_t>, 2> range{{{0, 0}, {0, 0}}};
        for (int a = 0; a < n; ++a) {
            range[a] = {static_cast<std::int64_t>(std::ceil(x[a] * scale - 0.75)),
                        static_cast<std::int64_t>(std::floor(x[a] * scale + 0.75))};
        }
        for (std::int64_t a = range[0].first; a <= range[0].second; ++a) {
            for (std::int64_t b = range[1].first; b <= range[1].second; ++b) {
                if (std::binary_search(cover.grid_cubes.begin(), cover.grid_cubes.end(), CellIndex{a, b})) ++hits;
            }
        }
        return hits;
    };
    const int per_axis = static_cast<int>(std::round((s + 2.0 * g) / step));
    for (const HSetCell& c : set.deepest()) {
        const Point lo = set.corner(J, c);
        for (int a = 0; a <= per_axis; ++a) {
            for (int b = 0; b <= (n > 1 ? per_axis : 0); ++b) {
                const Point x{lo[0] - g + a * step, n > 1 ? lo[1] - g + b * step : 0.0};
                const int hits = count_at(x);
                out.min_multiplicity = std::min(out.min_multiplicity, hits);
                out.max_multiplicity = std::max(out.max_multiplicity, hits);
            }
        }
    }
    out.covers = out.min_multiplicity >= 1;
    return out;
}

}  // namespace fractrace
