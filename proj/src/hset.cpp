#include "fractrace/hset.hpp"

#include "fractrace/errors.hpp"
#include "fractrace/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fractrace {

namespace {
__extension__ typedef unsigned __int128 U128;
}  // namespace

bool DyadicWeight::operator==(const DyadicWeight& other) const {
    if (num == 0 || other.num == 0) return num == other.num;
    const int e = std::max(exp, other.exp);
    const int sa = e - exp;
    const int sb = e - other.exp;
    if (sa > 63 || sb > 63) return false;
    return (static_cast<U128>(num) << sa) ==
           (static_cast<U128>(other.num) << sb);
}

HSetApprox::HSetApprox(int n, std::vector<std::vector<HSetCell>> levels)
    : n_(n), levels_(std::move(levels)) {
    if (n_ < 1 || n_ > 2) throw InvalidSpec("h-set approximations support n = 1 or 2");
    if (levels_.empty() || levels_.front().size() != 1) {
        throw InvalidSpec("h-set tree needs a single root cell at level 0");
    }
    for (std::size_t j = 1; j < levels_.size(); ++j) {
        const auto& cells = levels_[j];
        const auto& above = levels_[j - 1];
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const HSetCell& c = cells[i];
            if (c.parent < 0 || static_cast<std::size_t>(c.parent) >= above.size()) {
                std::ostringstream msg;
                msg << "cell " << i << " at level " << j << " has no valid parent";
                throw InvalidSpec(msg.str());
            }
            const HSetCell& p = above[static_cast<std::size_t>(c.parent)];
            for (int a = 0; a < n_; ++a) {
                if ((c.m[a] >> 1) != p.m[a]) {
                    std::ostringstream msg;
                    msg << "cell " << i << " at level " << j << " is not inside its parent";
                    throw InvalidSpec(msg.str());
                }
            }
            if (i > 0 && !(cells[i - 1].m < c.m)) {
                std::ostringstream msg;
                msg << "cells at level " << j << " are not strictly sorted";
                throw InvalidSpec(msg.str());
            }
        }
    }
}

Point HSetApprox::corner(int j, const HSetCell& cell) const {
    const double s = side(j);
    return {static_cast<double>(cell.m[0]) * s, n_ > 1 ? static_cast<double>(cell.m[1]) * s : 0.0};
}

bool HSetApprox::measure_conserved() const {
    using U = U128;
    const HSetCell& root = levels_.front().front();
    if (root.weight.exp > 63 || root.weight.num != (std::uint64_t{1} << root.weight.exp)) return false;
    for (std::size_t j = 1; j < levels_.size(); ++j) {
        const auto& above = levels_[j - 1];
        std::vector<int> top(above.size());
        for (std::size_t i = 0; i < above.size(); ++i) top[i] = above[i].weight.exp;
        for (const HSetCell& c : levels_[j]) {
            auto& e = top[static_cast<std::size_t>(c.parent)];
            e = std::max(e, c.weight.exp);
        }
        std::vector<U> sums(above.size(), 0);
        for (const HSetCell& c : levels_[j]) {
            const auto p = static_cast<std::size_t>(c.parent);
            const int shift = top[p] - c.weight.exp;
            if (shift > 64) return false;
            sums[p] += static_cast<U>(c.weight.num) << shift;
        }
        for (std::size_t i = 0; i < above.size(); ++i) {
            const int shift = top[i] - above[i].weight.exp;
            if (shift > 64) return false;
            if (sums[i] != (static_cast<U>(above[i].weight.num) << shift)) return false;
        }
    }
    return true;
}

HSetApprox HSetApprox::zero_subtree(int j, std::size_t index) const {
    auto levels = levels_;
    std::vector<char> marked(levels.at(static_cast<std::size_t>(j)).size(), 0);
    marked.at(index) = 1;
    for (std::size_t level = static_cast<std::size_t>(j); level < levels.size(); ++level) {
        if (level > static_cast<std::size_t>(j)) {
            std::vector<char> next(levels[level].size(), 0);
            for (std::size_t i = 0; i < levels[level].size(); ++i) {
                next[i] = marked[static_cast<std::size_t>(levels[level][i].parent)];
            }
            marked = std::move(next);
        }
        for (std::size_t i = 0; i < levels[level].size(); ++i) {
            if (marked[i]) levels[level][i].weight = DyadicWeight{0, 0};
        }
    }
    return HSetApprox(n_, std::move(levels));
}

namespace {

double box_distance(const Point& x, const Point& lo, double side, int n) {
    double acc = 0.0;
    for (int a = 0; a < n; ++a) {
        const double below = lo[a] - x[a];
        const double above = x[a] - (lo[a] + side);
        const double d = std::max({below, above, 0.0});
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace

double HSetApprox::distance_to_set(const Point& x) const {
    const int J = depth();
    const double s = side(J);
    double best = kInf;
    for (const HSetCell& c : deepest()) best = std::min(best, box_distance(x, corner(J, c), s, n_));
    return best;
}

// ---------------------------------------------------------------------------
// Construction

std::vector<std::uint64_t> target_counts(const GaugeSpec& h, int J) {
    if (J < 0) throw InvalidSpec("depth must be >= 0");
    if (J > 60) throw InvalidSpec("depth above 60 is not supported");
    const int n = h.dimension();
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(J) + 1, 1);
    const double top = h.log2_h(0);
    for (int j = 1; j <= J; ++j) {
        const double target = std::round(std::exp2(top - h.log2_h(static_cast<std::size_t>(j))));
        const std::uint64_t previous = counts[static_cast<std::size_t>(j) - 1];
        const double cap = static_cast<double>(previous) * std::exp2(n);
        if (target > cap) {
            std::ostringstream msg;
            msg << "gauge " << h.describe() << " needs " << target << " cells at level " << j
                << " but only " << cap << " fit (h_{j+1}/h_j >= 2^{-n} violated)";
            throw InfeasibleInput(msg.str());
        }
        counts[static_cast<std::size_t>(j)] = std::max(previous, static_cast<std::uint64_t>(target));
    }
    return counts;
}

HSetApprox build_from_counts(const std::vector<std::uint64_t>& counts) {
    if (counts.empty() || counts.front() != 1) throw InvalidSpec("counts must start with N(0) = 1");
    std::vector<std::vector<HSetCell>> levels(1);
    levels[0].push_back(HSetCell{{0, 0}, DyadicWeight{1, 0}, -1});
    for (std::size_t j = 0; j + 1 < counts.size(); ++j) {
        const auto& cells = levels[j];
        const std::uint64_t now = cells.size();
        const std::uint64_t next = counts[j + 1];
        if (next < now || next > 2 * now) {
            std::ostringstream msg;
            msg << "count " << next << " at level " << j + 1 << " is not reachable from " << now;
            throw InfeasibleInput(msg.str());
        }
        // Heaviest cells branch first, ties broken leftmost.
        std::vector<std::size_t> order(cells.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return cells[a].weight.exp < cells[b].weight.exp;
        });
        std::vector<char> branch(cells.size(), 0);
        for (std::uint64_t i = 0; i < next - now; ++i) branch[order[i]] = 1;

        std::vector<HSetCell> children;
        children.reserve(next);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const HSetCell& c = cells[i];
            const auto parent = static_cast<std::int64_t>(i);
            if (branch[i]) {
                const DyadicWeight half{c.weight.num, c.weight.exp + 1};
                children.push_back({{2 * c.m[0], 0}, half, parent});
                children.push_back({{2 * c.m[0] + 1, 0}, half, parent});
            } else {
                children.push_back({{2 * c.m[0], 0}, c.weight, parent});
            }
        }
        levels.push_back(std::move(children));
    }
    return HSetApprox(1, std::move(levels));
}

HSetApprox product_set(const HSetApprox& first, const HSetApprox& second) {
    if (first.dimension() != 1 || second.dimension() != 1) {
        throw InvalidSpec("product sets are built from two one-dimensional factors");
    }
    const int J = std::min(first.depth(), second.depth());
    std::vector<std::vector<HSetCell>> levels;
    for (int j = 0; j <= J; ++j) {
        const auto& a = first.level(j);
        const auto& b = second.level(j);
        const std::size_t width_above = j > 0 ? second.level(j - 1).size() : 1;
        std::vector<HSetCell> cells;
        cells.reserve(a.size() * b.size());
        for (const HSetCell& x : a) {
            for (const HSetCell& y : b) {
                HSetCell c;
                c.m = {x.m[0], y.m[0]};
                c.weight = {x.weight.num * y.weight.num, x.weight.exp + y.weight.exp};
                c.parent = j > 0 ? x.parent * static_cast<std::int64_t>(width_above) + y.parent : -1;
                cells.push_back(c);
            }
        }
        levels.push_back(std::move(cells));
    }
    return HSetApprox(2, std::move(levels));
}

HSetApprox build_cantor(const GaugeSpec& h, int J) {
    if (h.family() == GaugeSpec::Family::Product) {
        const auto& f = h.factors();
        if (f[0].dimension() == 1 && f[1].dimension() == 1) {
            return product_set(build_cantor(f[0], J), build_cantor(f[1], J));
        }
        throw InvalidSpec("product gauges must have two one-dimensional factors");
    }
    if (h.dimension() != 1) {
        throw InvalidSpec("Cantor schemes are built in dimension 1; use a product gauge for n = 2");
    }
    return build_from_counts(target_counts(h, J));
}

// ---------------------------------------------------------------------------
// Measure of balls

BallMeasure measure_ball(const HSetApprox& set, const Point& gamma, double r) {
    if (!(r > 0.0)) throw InvalidSpec("ball radius must be positive");
    const int J = set.depth();
    const double s = set.side(J);
    const auto& cells = set.deepest();
    BallMeasure m;
    m.resolved = r >= s;
    if (set.dimension() == 1) {
        const double lo = gamma[0] - r;
        const double hi = gamma[0] + r;
        auto it = std::partition_point(cells.begin(), cells.end(), [&](const HSetCell& c) {
            return static_cast<double>(c.m[0] + 1) * s <= lo;
        });
        for (; it != cells.end(); ++it) {
            const double a = static_cast<double>(it->m[0]) * s;
            if (a >= hi) break;
            const double overlap = std::min(a + s, hi) - std::max(a, lo);
            if (overlap <= 0.0) continue;
            const double w = it->weight.value();
            m.outer += w;
            m.inner += w * std::min(1.0, overlap / s);
        }
        return m;
    }
    constexpr int kSub = 16;
    for (const HSetCell& c : cells) {
        const Point lo = set.corner(J, c);
        if (box_distance(gamma, lo, s, 2) >= r) continue;
        const double w = c.weight.value();
        m.outer += w;
        int inside = 0;
        for (int a = 0; a < kSub; ++a) {
            for (int b = 0; b < kSub; ++b) {
                const double dx = lo[0] + (a + 0.5) * s / kSub - gamma[0];
                const double dy = lo[1] + (b + 0.5) * s / kSub - gamma[1];
                if (dx * dx + dy * dy < r * r) ++inside;
            }
        }
        m.inner += w * inside / (kSub * kSub);
    }
    return m;
}

HSetVerification verify_hset(const HSetApprox& set, const GaugeSpec& h, std::size_t samples,
                             std::uint64_t seed, double band) {
    if (samples < 1) throw InvalidSpec("verify_hset needs at least one sample");
    if (h.dimension() != set.dimension()) throw InvalidSpec("gauge and set dimensions differ");
    std::mt19937_64 rng(seed);
    const int J = set.depth();
    const auto& cells = set.deepest();
    const double t_max = std::max(0, J - 2);
    HSetVerification out;
    out.c1 = kInf;
    out.c2 = -kInf;
    for (std::size_t i = 0; i < samples; ++i) {
        const auto pick = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(cells.size()));
        const double t = unit_uniform(rng) * t_max;
        HSetSample sample;
        sample.gamma = set.corner(J, cells[std::min(pick, cells.size() - 1)]);
        sample.r = std::exp2(-t);
        sample.ratio = measure_ball(set, sample.gamma, sample.r).outer / h(sample.r);
        if (sample.ratio < out.c1) {
            out.c1 = sample.ratio;
            out.worst_low = sample;
        }
        if (sample.ratio > out.c2) {
            out.c2 = sample.ratio;
            out.worst_high = sample;
        }
        out.samples.push_back(sample);
    }
    out.pass = out.c1 > 0.0 && out.c2 / out.c1 <= band;
    return out;
}

// ---------------------------------------------------------------------------
// Porosity witnesses

PorositySearch porosity_witness(const HSetApprox& set, const Point& gamma, double r, double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw InvalidSpec("porosity witness needs 0 < eta < 1");
    if (!(r > 0.0)) throw InvalidSpec("porosity witness needs r > 0");
    const int J = set.depth();
    const double s = set.side(J);
    const double hole = eta * r;
    const double reach = (1.0 - eta) * r;
    PorositySearch out;
    out.resolved = hole >= s;
    if (reach < hole) return out;

    if (set.dimension() == 1) {
        // Feasible centres: [gamma - reach, gamma + reach] minus the open
        // hole-radius neighbourhoods of the connected components of the set.
        std::vector<std::pair<double, double>> blocked;
        for (const HSetCell& c : set.deepest()) {
            const double a = static_cast<double>(c.m[0]) * s - hole;
            const double b = static_cast<double>(c.m[0] + 1) * s + hole;
            if (!blocked.empty() && a <= blocked.back().second) {
                blocked.back().second = std::max(blocked.back().second, b);
            } else {
                blocked.emplace_back(a, b);
            }
        }
        double cursor = gamma[0] - reach;
        const double end = gamma[0] + reach;
        double best_len = -1.0;
        double best_mid = 0.0;
        auto consider = [&](double a, double b) {
            if (b >= a && b - a > best_len) {
                best_len = b - a;
                best_mid = 0.5 * (a + b);
            }
        };
        for (const auto& [a, b] : blocked) {
            if (b <= cursor) continue;
            if (a >= end) break;
            consider(cursor, std::min(a, end));
            cursor = std::max(cursor, b);
            if (cursor > end) break;
        }
        if (cursor <= end) consider(cursor, end);
        if (best_len >= 0.0) {
            out.witness = PorosityWitness{gamma, r, {best_mid, 0.0}, hole};
        }
        return out;
    }

    std::vector<Point> nearby;
    for (const HSetCell& c : set.deepest()) {
        const Point lo = set.corner(J, c);
        if (box_distance(gamma, lo, s, 2) <= r + hole) nearby.push_back(lo);
    }
    const double step = hole / 4.0;
    const int steps = static_cast<int>(std::floor(reach / step));
    double best = -1.0;
    Point best_x{0.0, 0.0};
    for (int a = -steps; a <= steps; ++a) {
        for (int b = -steps; b <= steps; ++b) {
            const Point x{gamma[0] + a * step, gamma[1] + b * step};
            const double dx = x[0] - gamma[0];
            const double dy = x[1] - gamma[1];
            if (dx * dx + dy * dy > reach * reach) continue;
            double dist = kInf;
            for (const Point& lo : nearby) dist = std::min(dist, box_distance(x, lo, s, 2));
            if (dist >= hole && dist > best) {
                best = dist;
                best_x = x;
            }
        }
    }
    if (best >= 0.0) out.witness = PorosityWitness{gamma, r, best_x, hole};
    return out;
}

}  // namespace fractrace
