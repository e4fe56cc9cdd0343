#include "fractrace/dichotomy.hpp"

#include "fractrace/atoms.hpp"
#include "fractrace/errors.hpp"
#include "fractrace/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fractrace {

const char* to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::TraceExists: return "TraceExists";
        case Outcome::Dense: return "Dense";
        case Outcome::ConjecturedDense: return "ConjecturedDense";
        case Outcome::Unknown: return "Unknown";
        case Outcome::OutOfScope: return "OutOfScope";
    }
    return "Unknown";
}

double conjugate_index(double q) {
    if (!(q > 0.0)) throw InvalidSpec("q must be positive");
    if (q <= 1.0) return kInf;
    if (std::isinf(q)) return 1.0;
    return q / (q - 1.0);
}

SeqSpec gauge_power_sequence(const GaugeSpec& h, double p) {
    if (!(p > 0.0)) throw InvalidSpec("p must be positive");
    return SeqSpec::power(h.as_sequence() * SeqSpec::geometric(h.dimension()), 1.0 / p);
}

SeqSpec ambient_smoothness(const ProblemSpec& spec) {
    return spec.sigma * gauge_power_sequence(spec.h, spec.p);
}

namespace {

std::string index_name(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream out;
    out << v;
    return out.str();
}

void validate_pq(double p, double q) {
    if (!(p > 0.0) || !std::isfinite(p)) throw InvalidSpec("p must be a positive finite number");
    if (!(q > 0.0) || !std::isfinite(q)) throw InvalidSpec("q must be a positive finite number");
}

}  // namespace

Verdict decide(const ProblemSpec& spec) {
    validate_pq(spec.p, spec.q);
    const double p = spec.p;
    const double q = spec.q;
    Verdict v;
    auto add = [&](std::string name, Membership m) { v.conditions.push_back({std::move(name), std::move(m)}); };

    const MeasureFunctionReport mf = is_measure_function(spec.h);
    add("h is a measure function", mf.verdict);
    if (mf.verdict.no()) {
        v.outcome = Outcome::OutOfScope;
        v.rule = "gauge fails the measure-function ratio condition";
        return v;
    }
    if (!mf.verdict.decided()) {
        v.outcome = Outcome::Unknown;
        v.rule = "blocked: measure-function check inconclusive";
        return v;
    }

    Membership porous;
    switch (spec.porosity) {
        case PorosityMode::Yes: porous = Membership::exact(true, "declared by caller"); break;
        case PorosityMode::No: porous = Membership::exact(false, "declared by caller"); break;
        case PorosityMode::Auto: porous = porosity_check(spec.h).verdict; break;
    }
    add("porosity", porous);

    // Density constructions need moment-corrected atoms unless L = -1 suffices.
    bool density_allowed = porous.yes();
    if (!density_allowed) {
        Membership no_moments;
        try {
            const KLOrders kl = required_KL(ambient_smoothness(spec), p, spec.h.dimension());
            std::ostringstream why;
            why << "required L = " << kl.L << " for the ambient smoothness";
            no_moments = Membership::exact(kl.L == -1, why.str());
        } catch (const InvalidSpec& e) {
            no_moments = Membership::numeric(Tri::Inconclusive, e.what());
        }
        add("no moment conditions needed (L = -1)", no_moments);
        density_allowed = no_moments.yes();
    }
    auto dense = [&](Outcome outcome, const std::string& rule) {
        if (density_allowed) {
            v.outcome = outcome;
            v.rule = rule;
        } else {
            v.outcome = Outcome::Unknown;
            v.rule = "blocked: " + rule + " needs porosity or L = -1";
        }
    };
    auto attach_couple = [&] {
        if (!porous.yes()) return;
        try {
            v.couple = dichotomy_couple(spec.h, p, q);
        } catch (const HypothesisRejected&) {
        }
    };

    const bool case_a = p >= 1.0 || q <= p;
    if (case_a) {
        const double qp = conjugate_index(q);
        const Membership m = ell_membership(spec.sigma, qp);
        add("sigma^{-1} in l_{q'} (q' = " + index_name(qp) + ")", m);
        if (m.yes()) {
            v.outcome = Outcome::TraceExists;
            v.rule = "p >= 1 or q <= p < 1: trace exists iff sigma^{-1} in l_{q'}";
        } else if (m.no()) {
            dense(Outcome::Dense, "p >= 1 or q <= p < 1: sigma^{-1} not in l_{q'} gives density");
        } else {
            v.outcome = Outcome::Unknown;
            v.rule = "blocked: l_{q'} membership inconclusive";
        }
        attach_couple();
        return v;
    }

    // 0 < p < 1, p < q.
    const double r_max = std::min(q, 1.0);
    std::vector<double> radii{p, r_max};
    for (int i = 1; i < 64; ++i) radii.push_back(p * std::pow(r_max / p, i / 64.0));
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    const SeqSpec hseq = spec.h.as_sequence();
    const SeqSpec inv_sigma = spec.sigma.inverse();
    bool scan_inconclusive = false;
    for (double r : radii) {
        const double inv_v = 1.0 / r - 1.0 / q;
        const double v_r = inv_v <= 0.0 ? kInf : 1.0 / inv_v;
        const SeqSpec x = inv_sigma * SeqSpec::power(hseq, 1.0 / r - 1.0 / p);
        const Membership m = sequence_in_ell(x, v_r);
        if (m.yes()) {
            std::ostringstream name;
            name << "sigma^{-1} h^{1/r-1/p} in l_{v_r} (r = " << r << ", v_r = " << index_name(v_r) << ")";
            add(name.str(), m);
            v.outcome = Outcome::TraceExists;
            v.rule = "0 < p < 1, p < q: sufficient condition at some r in [p, min(q,1)]";
            v.witness_r = r;
            return v;
        }
        if (!m.decided()) scan_inconclusive = true;
    }
    add("sigma^{-1} h^{1/r-1/p} in l_{v_r} for some scanned r",
        scan_inconclusive ? Membership::numeric(Tri::Inconclusive, "some scanned r inconclusive")
                          : Membership::exact(false, "fails at all scanned r"));

    const Membership away = limsup_positive(inv_sigma);
    add("limsup sigma^{-1} > 0", away);
    if (away.yes()) {
        dense(Outcome::Dense, "0 < p < q: limsup sigma^{-1} > 0 gives density");
        return v;
    }
    if (q > 1.0) {
        const double qp = conjugate_index(q);
        const Membership m = ell_membership(spec.sigma, qp);
        add("sigma^{-1} in l_{q'} (q' = " + index_name(qp) + ")", m);
        if (m.no()) {
            dense(Outcome::Dense, "0 < p < q, q > 1: sigma^{-1} not in l_{q'} gives density");
            return v;
        }
    }
    const double inv_vp = 1.0 / p - 1.0 / q;
    const double v_p = 1.0 / inv_vp;
    const Membership extra = tends_to_zero(hseq * SeqSpec::power(spec.sigma, v_p));
    add("h_j sigma_j^{v_p} -> 0 (v_p = " + index_name(v_p) + ")", extra);
    const Membership cond = ell_membership(spec.sigma, v_p);
    add("sigma^{-1} in l_{v_p}", cond);
    if (extra.yes() && cond.no()) {
        dense(Outcome::ConjecturedDense, "conjectured density: h sigma^{v_p} -> 0 and sigma^{-1} not in l_{v_p}");
        return v;
    }
    v.outcome = Outcome::Unknown;
    v.rule = scan_inconclusive || !away.decided() || !extra.decided() || !cond.decided()
                 ? "blocked: an inconclusive membership prevents a decision"
                 : "no sufficient condition applies";
    return v;
}

Couple dichotomy_couple(const GaugeSpec& h, double p, std::optional<double> q) {
    if (!(p > 0.0) || !std::isfinite(p)) throw InvalidSpec("p must be a positive finite number");
    const PorosityReport porous = porosity_check(h);
    if (!porous.verdict.yes()) {
        throw HypothesisRejected("dichotomy couples need a porous set: " + porous.verdict.reason);
    }
    Couple c{gauge_power_sequence(h, p), 1.0, std::nullopt};
    if (p >= 1.0) {
        c.q_D = 1.0;
    } else if (q && *q > 0.0 && *q <= p) {
        c.q_D = p;
    } else {
        throw HypothesisRejected("the couple for 0 < p < 1 is known only for fixed q <= p");
    }
    if (h.family() == GaugeSpec::Family::PowerLog && h.b() == 0.0) {
        c.classical_s = (h.dimension() - h.d()) / p;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Density constructions

SubseqResult density_bound_subseq(const GaugeSpec& h, const SeqSpec& tau, double p, std::size_t jmax,
                                  double threshold) {
    if (!(p > 0.0)) throw InvalidSpec("p must be positive");
    const SeqSpec quantity = tau * gauge_power_sequence(h, p).inverse();
    const Membership bounded = sequence_in_ell(quantity.inverse(), kInf);
    if (bounded.yes()) {
        throw HypothesisRejected("tau^{-1} h^{1/p} <n>^{1/p} is bounded, so no subsequence tends to 0 (" +
                                 bounded.reason + ")");
    }
    SubseqResult out;
    out.threshold = threshold;
    out.truncation = jmax;
    double low = kInf;
    for (std::size_t j = 0; j <= jmax; ++j) {
        const double v = quantity.log2_at(j);
        if (v < low) {
            low = v;
            out.rows.push_back({out.rows.size() + 1, j, std::exp2(v)});
        }
    }
    out.reached = !out.rows.empty() && out.rows.back().value < threshold;
    return out;
}

std::size_t harmonic_k2(std::size_t k) {
    if (k < 1) throw InvalidSpec("k must be >= 1");
    double sum = 0.0;
    std::size_t i = k;
    for (;; ++i) {
        sum += 1.0 / static_cast<double>(i);
        if (sum >= 2.0) return i;
    }
}

std::size_t harmonic_k1(std::size_t k, double N) {
    if (k < 1) throw InvalidSpec("k must be >= 1");
    double sum = 0.0;
    for (std::size_t i = k;; ++i) {
        const double share = N / static_cast<double>(i);
        sum += N < 0x1.0p52 ? std::floor(share) : share;
        if (sum >= N) return i;
        if (share < 1.0 && N < 0x1.0p52) {
            throw HypothesisRejected("sum of floor(N/i) cannot reach N");
        }
    }
}

HarmonicResult density_bound_harmonic(const GaugeSpec& h, const SeqSpec& sigma, double p, double q,
                                      std::size_t k_lo, std::size_t k_hi, std::size_t jmax, double proxy) {
    if (!(p > 0.0) || !(q > 0.0)) throw InvalidSpec("p, q must be positive");
    if (!(p < q)) throw HypothesisRejected("the harmonic construction needs 0 < p < q");
    if (k_lo < 1 || k_hi < k_lo) throw InvalidSpec("need 1 <= k_lo <= k_hi");
    if (!(proxy > 0.0)) throw InvalidSpec("count proxy factor must be positive");
    const Membership away = limsup_positive(sigma.inverse());
    if (away.no()) throw HypothesisRejected("limsup sigma^{-1} = 0: " + away.reason);

    HarmonicResult out;
    out.truncation = jmax;
    double top = -kInf;
    for (std::size_t j = jmax / 2; j <= jmax; ++j) top = std::max(top, -sigma.log2_at(j));
    const double log2_away = top - 1.0;
    out.away = std::exp2(log2_away);
    out.C = 1.0 / out.away;
    std::vector<std::size_t> selected;
    for (std::size_t j = 0; j <= jmax; ++j) {
        if (-sigma.log2_at(j) >= log2_away) selected.push_back(j);
    }
    if (selected.empty()) throw HypothesisRejected("no index with sigma_j^{-1} bounded away from 0");

    const double log2_h0 = h.log2_h(0);
    const double exponent = q / p;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        HarmonicRow row;
        row.k = k;
        row.k2 = harmonic_k2(k);
        const double need = std::log2(2.0 * static_cast<double>(row.k2));
        auto it = std::find_if(selected.begin(), selected.end(), [&](std::size_t j) {
            return std::log2(proxy) + log2_h0 - h.log2_h(j) >= need;
        });
        if (it == selected.end()) {
            std::ostringstream msg;
            msg << "no j <= " << jmax << " with N_j >= 2 k2 = " << 2 * row.k2 << " at k = " << k;
            throw HypothesisRejected(msg.str());
        }
        row.j_k = *it;
        double N = proxy * std::exp2(log2_h0 - h.log2_h(row.j_k));
        if (N < 0x1.0p52) N = std::round(N);
        row.k1 = harmonic_k1(k, N);
        const std::size_t needed = row.k1 - k + 1;
        if (static_cast<std::size_t>(selected.end() - it) < needed) {
            std::ostringstream msg;
            msg << "only " << selected.end() - it << " selected indices beyond j(k) = " << row.j_k << ", need "
                << needed << " (truncation " << jmax << ")";
            throw HypothesisRejected(msg.str());
        }
        double sum = 0.0;
        for (std::size_t i = k; i <= row.k1; ++i, ++it) {
            sum += std::pow(static_cast<double>(i), -exponent) * std::exp2(q * sigma.log2_at(*it));
        }
        row.bound = std::pow(sum, 1.0 / q);
        row.tail = std::pow(power_tail_sum(exponent, k), 1.0 / q);
        row.majorant = out.C * row.tail;
        out.rows.push_back(row);
    }
    return out;
}

BlocksResult density_bound_blocks(const SeqSpec& sigma, double q, std::size_t blocks, std::size_t jmax) {
    if (!(q > 1.0) || !std::isfinite(q)) throw HypothesisRejected("the block construction needs 1 < q < inf");
    if (blocks < 1) throw InvalidSpec("need at least one block");
    BlocksResult out;
    out.q_prime = conjugate_index(q);
    out.truncation = jmax;
    const Membership m = ell_membership(sigma, out.q_prime);
    if (m.yes()) throw HypothesisRejected("sigma^{-1} in l_{q'}: " + m.reason);

    std::vector<std::size_t> starts;
    std::vector<double> sums;
    std::size_t j = 1;
    double running = 0.0;
    for (std::size_t k = 1; k <= blocks; ++k) {
        const std::size_t start = j;
        double s = 0.0;
        while (s < 1.0) {
            if (j > jmax) {
                std::ostringstream msg;
                msg << "block " << k << " starting at j = " << start << " does not reach sum 1 by j = " << jmax;
                throw HypothesisRejected(msg.str());
            }
            s += std::exp2(-out.q_prime * sigma.log2_at(j));
            ++j;
        }
        starts.push_back(start);
        sums.push_back(s);
        running += std::pow(s, 1.0 - q);
        BlockRow row;
        row.k = k;
        row.start = start;
        row.end = j;
        row.block_sum = s;
        row.bound = std::pow(running, 1.0 / q) / static_cast<double>(k);
        row.majorant = std::pow(static_cast<double>(k), -1.0 / out.q_prime);
        out.rows.push_back(row);
    }

    const double k = static_cast<double>(blocks);
    double direct = 0.0;
    for (std::size_t nu = 0; nu < starts.size(); ++nu) {
        const std::size_t end = out.rows[nu].end;
        for (std::size_t l = starts[nu]; l < end; ++l) {
            const double lambda = std::exp2(-out.q_prime * sigma.log2_at(l)) / (k * sums[nu]);
            out.lambda.emplace_back(l, lambda);
            out.lambda_total += lambda;
            direct += std::pow(lambda * std::exp2(sigma.log2_at(l)), q);
        }
    }
    out.direct_bound = std::pow(direct, 1.0 / q);
    return out;
}

}  // namespace fractrace
