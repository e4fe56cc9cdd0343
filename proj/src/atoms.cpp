#include "fractrace/atoms.hpp"

#include "fractrace/errors.hpp"
#include "fractrace/numeric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fractrace {

std::vector<MultiIndex> multi_indices(int order, int n) {
    std::vector<MultiIndex> out;
    for (int degree = 0; degree <= order; ++degree) {
        if (n == 1) {
            out.push_back({degree, 0});
            continue;
        }
        for (int a = degree; a >= 0; --a) out.push_back({a, degree - a});
    }
    return out;
}

double unit_bump(const Point& w, int n) {
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += w[a] * w[a];
    return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
}

namespace {

double monomial(const Point& w, const MultiIndex& beta, int n) {
    double v = 1.0;
    for (int a = 0; a < n; ++a) {
        for (int k = 0; k < beta[a]; ++k) v *= w[a];
    }
    return v;
}

Point unit_coords(const Point& x, const Point& c, double r, int n) {
    Point w{0.0, 0.0};
    for (int a = 0; a < n; ++a) w[a] = (x[a] - c[a]) / r;
    return w;
}

Box ball_box(const Point& c, double r, int n) {
    Box b;
    b.n = n;
    for (int a = 0; a < n; ++a) {
        b.lo[a] = c[a] - r;
        b.hi[a] = c[a] + r;
    }
    return b;
}

}  // namespace

double AtomTerm::operator()(const Point& x, int n) const {
    switch (kind) {
        case Kind::Partition:
            return coefficient * PartitionProfile::standard().evaluate(j, m, n, x);
        case Kind::PartitionEnvelope: {
            const double phi = PartitionProfile::standard().evaluate(j, m, n, x);
            if (phi == 0.0) return 0.0;
            return coefficient * phi * unit_bump(unit_coords(x, center, radius, n), n);
        }
        case Kind::Constant:
            return support.contains(x) ? coefficient : 0.0;
        case Kind::Bump:
            return coefficient * unit_bump(unit_coords(x, center, radius, n), n);
        case Kind::Psi: {
            const Point w = unit_coords(x, center, radius, n);
            const double bump = unit_bump(w, n);
            if (bump == 0.0) return 0.0;
            double poly_value = 0.0;
            for (const auto& [beta, c] : poly) poly_value += c * monomial(w, beta, n);
            return coefficient * poly_value * bump;
        }
    }
    return 0.0;
}

double AtomTerm::feature_scale() const {
    switch (kind) {
        case Kind::Partition: return std::ldexp(1.0, -j);
        case Kind::PartitionEnvelope: return std::min(std::ldexp(1.0, -j), radius);
        case Kind::Constant: return support.side(0);
        case Kind::Bump:
        case Kind::Psi: return radius;
    }
    return 1.0;
}

double Atom::operator()(const Point& x) const {
    double v = 0.0;
    for (const AtomTerm& t : terms) v += t(x, n);
    return v;
}

std::vector<double> atom_moments(const Atom& a, const std::vector<MultiIndex>& betas,
                                 const Point& origin, double scale, int nodes) {
    std::vector<double> out(betas.size(), 0.0);
    for (const AtomTerm& term : a.terms) {
        const Box& box = term.support;
        const auto xs = midpoint_nodes(box.lo[0], box.hi[0], nodes);
        const auto ys = a.n > 1 ? midpoint_nodes(box.lo[1], box.hi[1], nodes) : std::vector<double>{0.0};
        double volume = box.side(0) / nodes;
        if (a.n > 1) volume *= box.side(1) / nodes;
        std::vector<double> acc(betas.size(), 0.0);
        for (double x : xs) {
            for (double y : ys) {
                const Point p{x, y};
                const double f = term(p, a.n);
                if (f == 0.0) continue;
                const Point w = unit_coords(p, origin, scale, a.n);
                for (std::size_t i = 0; i < betas.size(); ++i) acc[i] += f * monomial(w, betas[i], a.n);
            }
        }
        for (std::size_t i = 0; i < betas.size(); ++i) out[i] += acc[i] * volume;
    }
    return out;
}

Atom partition_atom(int j, const CellIndex& m, int n, const SeqSpec& sigma, double p, int K) {
    if (!(p > 0.0)) throw InvalidSpec("p must be positive");
    if (K < 0 || K > PartitionProfile::kMaxOrder) throw InvalidSpec("K must lie in [0, 4]");
    const PartitionProfile& profile = PartitionProfile::standard();
    double c = 0.0;
    for (int k = 0; k <= K; ++k) c = std::max(c, profile.multi_bound(k, n));
    Atom a;
    a.n = n;
    a.j = j;
    a.m = n == 1 ? CellIndex{m[0], 0} : m;
    AtomTerm t;
    t.kind = AtomTerm::Kind::Partition;
    t.j = j;
    t.m = a.m;
    t.coefficient = std::exp2(-sigma.log2_at(static_cast<std::size_t>(j)) + j * n / p) / c;
    t.support = grid_cube(j, a.m, n).box(1.5);
    a.terms.push_back(t);
    return a;
}

Atom constant_atom(int j, const CellIndex& m, int n, double value) {
    Atom a;
    a.n = n;
    a.j = j;
    a.m = n == 1 ? CellIndex{m[0], 0} : m;
    AtomTerm t;
    t.kind = AtomTerm::Kind::Constant;
    t.coefficient = value;
    t.support = grid_cube(j, a.m, n).box(1.0);
    a.terms.push_back(t);
    return a;
}

KLOrders required_KL(const SeqSpec& sigma, double p, int n) {
    if (!(p > 0.0)) throw InvalidSpec("p must be positive");
    if (n < 1) throw InvalidSpec("n must be >= 1");
    if (!sigma.closed_form()) {
        throw InvalidSpec("required_KL needs a closed-form sequence; numeric indices of " +
                          sigma.describe() + " cannot certify integer thresholds");
    }
    const IndexReport idx = indices(sigma);
    KLOrders out;
    out.K = std::max(0, static_cast<int>(std::floor(idx.upper)) + 1);
    const double x = -1.0 + n * std::max(0.0, 1.0 / p - 1.0) - idx.lower;
    out.L = std::max(-1, static_cast<int>(std::floor(x)) + 1);
    return out;
}

namespace {

/// Centred finite-difference weights for the k-th derivative.
std::vector<double> difference_weights(int k) {
    std::vector<double> w(static_cast<std::size_t>(k) + 1);
    double binom = 1.0;
    for (int i = 0; i <= k; ++i) {
        w[static_cast<std::size_t>(i)] = ((i % 2 == 0) ? 1.0 : -1.0) * binom;
        binom = binom * (k - i) / (i + 1);
    }
    return w;
}

double sup_derivative(const Atom& a, const MultiIndex& alpha, double h, const std::vector<Box>& regions) {
    const int n = a.n;
    const auto wx = difference_weights(alpha[0]);
    const auto wy = difference_weights(n > 1 ? alpha[1] : 0);
    const int order = alpha[0] + (n > 1 ? alpha[1] : 0);
    const double denom = std::pow(h, order);
    constexpr int kSamples = 64;
    double best = 0.0;
    for (const Box& box : regions) {
        const auto xs = midpoint_nodes(box.lo[0], box.hi[0], kSamples);
        const auto ys = n > 1 ? midpoint_nodes(box.lo[1], box.hi[1], kSamples) : std::vector<double>{0.0};
        for (double x : xs) {
            for (double y : ys) {
                double acc = 0.0;
                for (std::size_t i = 0; i < wx.size(); ++i) {
                    const double dx = (0.5 * alpha[0] - static_cast<double>(i)) * h;
                    for (std::size_t k = 0; k < wy.size(); ++k) {
                        const double dy = n > 1 ? (0.5 * alpha[1] - static_cast<double>(k)) * h : 0.0;
                        acc += wx[i] * wy[k] * a({x + dx, y + dy});
                    }
                }
                best = std::max(best, std::abs(acc) / denom);
            }
        }
    }
    return best;
}

std::vector<Box> sample_regions(const Atom& a) {
    std::vector<Box> regions{a.allowed_support()};
    for (const AtomTerm& t : a.terms) regions.push_back(t.support);
    return regions;
}

double fd_step(const Atom& a) {
    double scale = std::ldexp(1.0, -a.j);
    for (const AtomTerm& t : a.terms) scale = std::min(scale, t.feature_scale());
    return scale / 64.0;
}

}  // namespace

AtomReport atom_validate(const Atom& a, const SeqSpec& sigma, double p, int K, int L, double moment_tol) {
    if (!(p > 0.0)) throw InvalidSpec("p must be positive");
    if (K < 0) throw InvalidSpec("K must be >= 0");
    if (L < -1) throw InvalidSpec("L must be >= -1");
    AtomReport report;
    const Box allowed = a.allowed_support();
    report.support_ok = true;
    for (const AtomTerm& t : a.terms) {
        if (!allowed.contains(t.support)) report.support_ok = false;
    }

    const int checked = std::min(K, PartitionProfile::kMaxOrder);
    report.resolution_ok = K <= PartitionProfile::kMaxOrder;
    report.fd_step = fd_step(a);
    const auto regions = sample_regions(a);
    const double log2_sigma = sigma.log2_at(static_cast<std::size_t>(a.j));
    for (const MultiIndex& alpha : multi_indices(checked, a.n)) {
        const int order = alpha[0] + alpha[1];
        const double budget = std::exp2(-log2_sigma + a.j * (a.n / p + order));
        const double ratio = sup_derivative(a, alpha, report.fd_step, regions) / budget;
        if (ratio > report.derivative_ratio) {
            report.derivative_ratio = ratio;
            report.worst_alpha = alpha;
        }
    }

    if (L >= 0) {
        const auto betas = multi_indices(L, a.n);
        const auto moments = atom_moments(a, betas);
        for (std::size_t i = 0; i < betas.size(); ++i) {
            if (std::abs(moments[i]) > report.moment_max) {
                report.moment_max = std::abs(moments[i]);
                report.worst_beta = betas[i];
            }
        }
        report.moments_ok = report.moment_max <= moment_tol;
    }
    report.valid = report.support_ok && report.resolution_ok && report.moments_ok &&
                   report.derivative_ratio <= 1.0 + kDerivativeSlack;
    return report;
}

// ---------------------------------------------------------------------------
// Biorthogonal family

double PsiFamily::evaluate(std::size_t gamma, const Point& w) const {
    const double bump = unit_bump(w, n);
    if (bump == 0.0) return 0.0;
    double v = 0.0;
    for (std::size_t b = 0; b < indices.size(); ++b) v += coefficients[gamma][b] * monomial(w, indices[b], n);
    return v * bump;
}

PsiFamily psi_family(int L, int n, int nodes) {
    if (L < 0) throw InvalidSpec("psi_family needs L >= 0");
    if (n < 1 || n > 2) throw InvalidSpec("psi_family supports n = 1 or 2");
    PsiFamily fam;
    fam.L = L;
    fam.n = n;
    fam.indices = multi_indices(L, n);
    const std::size_t dim = fam.indices.size();

    const auto axis = midpoint_nodes(-1.0, 1.0, nodes);
    const auto other = n > 1 ? axis : std::vector<double>{0.0};
    const double volume = std::pow(2.0 / nodes, n);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    std::vector<double> mono(dim);
    for (double x : axis) {
        for (double y : other) {
            const Point w{x, y};
            const double f = unit_bump(w, n);
            if (f == 0.0) continue;
            for (std::size_t i = 0; i < dim; ++i) mono[i] = monomial(w, fam.indices[i], n);
            for (std::size_t i = 0; i < dim; ++i) {
                for (std::size_t k = 0; k < dim; ++k) {
                    gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) += f * mono[i] * mono[k] * volume;
                }
            }
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
    const auto& sv = svd.singularValues();
    fam.condition_number = sv(0) / sv(sv.size() - 1);
    if (!(fam.condition_number < 1e12)) {
        std::ostringstream msg;
        msg << "moment Gram matrix for L = " << L << " is ill-conditioned (condition number "
            << fam.condition_number << ")";
        throw ResolutionError(msg.str());
    }

    // Entries coupling different parity classes vanish exactly on the
    // symmetric grid, so each class is inverted on its own.
    fam.coefficients.assign(dim, std::vector<double>(dim, 0.0));
    for (int px = 0; px < 2; ++px) {
        for (int py = 0; py < (n > 1 ? 2 : 1); ++py) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < dim; ++i) {
                if (fam.indices[i][0] % 2 == px && fam.indices[i][1] % 2 == py) members.push_back(i);
            }
            if (members.empty()) continue;
            const auto size = static_cast<Eigen::Index>(members.size());
            Eigen::MatrixXd block(size, size);
            for (Eigen::Index a = 0; a < size; ++a) {
                for (Eigen::Index b = 0; b < size; ++b) {
                    block(a, b) = gram(static_cast<Eigen::Index>(members[static_cast<std::size_t>(a)]),
                                       static_cast<Eigen::Index>(members[static_cast<std::size_t>(b)]));
                }
            }
            const Eigen::MatrixXd inv = block.fullPivLu().inverse();
            for (Eigen::Index a = 0; a < size; ++a) {
                for (Eigen::Index b = 0; b < size; ++b) {
                    fam.coefficients[members[static_cast<std::size_t>(a)]][members[static_cast<std::size_t>(b)]] = inv(a, b);
                }
            }
        }
    }

    std::vector<std::vector<double>> check(dim, std::vector<double>(dim, 0.0));
    for (double x : axis) {
        for (double y : other) {
            const Point w{x, y};
            if (unit_bump(w, n) == 0.0) continue;
            for (std::size_t i = 0; i < dim; ++i) mono[i] = monomial(w, fam.indices[i], n);
            for (std::size_t g = 0; g < dim; ++g) {
                const double psi = fam.evaluate(g, w);
                for (std::size_t b = 0; b < dim; ++b) check[g][b] += mono[b] * psi * volume;
            }
        }
    }
    for (std::size_t g = 0; g < dim; ++g) {
        for (std::size_t b = 0; b < dim; ++b) {
            const double target = g == b ? 1.0 : 0.0;
            fam.biorthogonality_error = std::max(fam.biorthogonality_error, std::abs(check[g][b] - target));
        }
    }
    return fam;
}

MomentCorrection moment_correct(const Atom& a, const PorosityWitness& hole, const PsiFamily& psi,
                                const HSetApprox* set) {
    if (psi.n != a.n) throw InvalidSpec("psi family dimension differs from the atom's");
    MomentCorrection out;
    out.hole_center = hole.hole;
    out.epsilon = 0.5 * hole.hole_radius;
    if (!(out.epsilon > 0.0)) throw InvalidSpec("porosity hole has zero radius");
    if (set != nullptr) {
        const double dist = set->distance_to_set(out.hole_center);
        if (dist < 2.0 * out.epsilon) {
            std::ostringstream msg;
            msg << "correction ball B(y, " << out.epsilon << ") comes within " << dist - out.epsilon
                << " of the set (need >= " << out.epsilon << ")";
            throw HypothesisRejected(msg.str());
        }
    }
    out.indices = psi.indices;
    const double eps_n = std::pow(out.epsilon, a.n);
    const auto local = atom_moments(a, out.indices, out.hole_center, out.epsilon);
    out.d.resize(local.size());
    for (std::size_t i = 0; i < local.size(); ++i) out.d[i] = local[i] / eps_n;

    out.corrected = a;
    for (std::size_t g = 0; g < out.indices.size(); ++g) {
        AtomTerm t;
        t.kind = AtomTerm::Kind::Psi;
        t.coefficient = -out.d[g];
        t.center = out.hole_center;
        t.radius = out.epsilon;
        for (std::size_t b = 0; b < out.indices.size(); ++b) {
            if (psi.coefficients[g][b] != 0.0) t.poly.emplace_back(out.indices[b], psi.coefficients[g][b]);
        }
        t.support = ball_box(out.hole_center, out.epsilon, a.n);
        out.corrected.terms.push_back(std::move(t));
    }
    auto worst = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    };
    out.moment_before = worst(atom_moments(a, out.indices));
    out.moment_after = worst(atom_moments(out.corrected, out.indices));
    return out;
}

// ---------------------------------------------------------------------------
// Leibniz closure

LeibnizReport leibniz_constant(int n, const std::vector<int>& levels, const Point& env_center,
                               double env_radius, int K) {
    if (K < 0 || K > PartitionProfile::kMaxOrder) throw InvalidSpec("K must lie in [0, 4]");
    if (!(env_radius > 0.0)) throw InvalidSpec("envelope radius must be positive");
    LeibnizReport report;
    for (int j : levels) {
        Atom a = envelope_atom(j, n, SeqSpec::geometric(0.0), 1.0, env_center, env_radius, 1.0);
        // Unit coefficient: measure the raw product.
        a.terms.front().coefficient = 1.0;
        const double h = fd_step(a);
        const auto regions = sample_regions(a);
        double worst = 0.0;
        for (const MultiIndex& alpha : multi_indices(K, n)) {
            const int order = alpha[0] + alpha[1];
            worst = std::max(worst, sup_derivative(a, alpha, h, regions) / std::ldexp(1.0, j * order));
        }
        report.per_level.emplace_back(j, worst);
        report.constant = std::max(report.constant, worst);
    }
    return report;
}

Atom envelope_atom(int j, int n, const SeqSpec& tau, double p, const Point& env_center,
                   double env_radius, double C) {
    Atom a;
    a.n = n;
    a.j = j;
    const double scale = std::ldexp(1.0, j);
    for (int k = 0; k < n; ++k) a.m[k] = static_cast<std::int64_t>(std::floor(env_center[k] * scale + 0.5));
    AtomTerm t;
    t.kind = AtomTerm::Kind::PartitionEnvelope;
    t.j = j;
    t.m = a.m;
    t.center = env_center;
    t.radius = env_radius;
    t.coefficient = std::exp2(-tau.log2_at(static_cast<std::size_t>(j)) + j * n / p) / C;
    Box box = grid_cube(j, a.m, n).box(1.5);
    const Box env = ball_box(env_center, env_radius, n);
    for (int k = 0; k < n; ++k) {
        box.lo[k] = std::max(box.lo[k], env.lo[k]);
        box.hi[k] = std::min(box.hi[k], env.hi[k]);
    }
    t.support = box;
    a.terms.push_back(t);
    return a;
}

double bpq_norm(const CoefGrid& lambda) {
    const double p = lambda.p;
    const double q = lambda.q;
    if (!(p > 0.0) || !(q > 0.0)) throw InvalidSpec("b_{p,q} needs p, q > 0");
    double total = 0.0;
    for (const auto& [j, values] : lambda.levels) {
        double level = 0.0;
        for (double v : values) level = std::isinf(p) ? std::max(level, std::abs(v)) : level + std::pow(std::abs(v), p);
        if (!std::isinf(p)) level = std::pow(level, 1.0 / p);
        total = std::isinf(q) ? std::max(total, level) : total + std::pow(level, q);
    }
    return std::isinf(q) ? total : std::pow(total, 1.0 / q);
}

}  // namespace fractrace
