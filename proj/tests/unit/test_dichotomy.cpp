#include "fractrace/dichotomy.hpp"
#include "fractrace/errors.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

namespace fractrace {
namespace {

using testing::Gen;
using testing::kCantorD;
using testing::power_log_in_ell;

GaugeSpec cantor() { return GaugeSpec::power_log(kCantorD, 0.0, 1); }

Verdict run(const GaugeSpec& h, const SeqSpec& sigma, double p, double q, PorosityMode mode = PorosityMode::Auto) {
    return decide(ProblemSpec{h, sigma, p, q, mode});
}

bool tends_to_zero(double s, double kappa) { return s < 0.0 || (s == 0.0 && kappa < 0.0); }

// Rule table for h = power_log(d, b), sigma = power_log(s, kappa), porous set.
// Returns nullopt when the r-scan answer hinges on a sliver of r values.
std::optional<Outcome> oracle(double d, double b, double s, double kappa, double p, double q) {
    if (p >= 1.0 || q <= p) {
        const double qp = q <= 1.0 ? INFINITY : q / (q - 1.0);
        return power_log_in_ell(-s, -kappa, qp) ? Outcome::TraceExists : Outcome::Dense;
    }
    const double rmax = std::min(q, 1.0);
    const int kFine = 4000;
    int hits = 0;
    for (int i = 0; i <= kFine; ++i) {
        const double r = p + (rmax - p) * i / kFine;
        const double inv_v = 1.0 / r - 1.0 / q;
        const double v = inv_v <= 0.0 ? INFINITY : 1.0 / inv_v;
        const double w = 1.0 / r - 1.0 / p;
        if (power_log_in_ell(-s - d * w, -kappa + b * w, v)) ++hits;
    }
    if (hits > 0 && hits < kFine / 20) return std::nullopt;
    if (hits > 0) return Outcome::TraceExists;
    if (s < 0.0 || (s == 0.0 && kappa <= 0.0)) return Outcome::Dense;
    if (q > 1.0 && !power_log_in_ell(-s, -kappa, q / (q - 1.0))) return Outcome::Dense;
    const double vp = 1.0 / (1.0 / p - 1.0 / q);
    if (tends_to_zero(-d + s * vp, b + kappa * vp) && !power_log_in_ell(-s, -kappa, vp)) return Outcome::ConjecturedDense;
    return Outcome::Unknown;
}

TEST(Conjugate, Values) {
    EXPECT_EQ(conjugate_index(2.0), 2.0);
    EXPECT_EQ(conjugate_index(3.0), 1.5);
    EXPECT_TRUE(std::isinf(conjugate_index(1.0)));
    EXPECT_TRUE(std::isinf(conjugate_index(0.4)));
    EXPECT_THROW(conjugate_index(0.0), InvalidSpec);
}

TEST(GaugePower, MatchesDefinition) {
    Gen g(61);
    for (int i = 0; i < testing::kCases; ++i) {
        const int n = g.integer(1, 2);
        const GaugeSpec h = g.measure_gauge(n);
        const double p = g.uniform(0.3, 4);
        const SeqSpec s = gauge_power_sequence(h, p);
        for (std::size_t j : {0UL, 1UL, 7UL, 50UL, 300UL}) {
            EXPECT_NEAR(s.log2_at(j), (h.log2_h(j) + double(j) * n) / p, 1e-9 * (1 + j));
        }
    }
}

TEST(Decide, ReferenceExamples) {
    const Verdict a = run(cantor(), SeqSpec::geometric(0.5), 2, 2);
    EXPECT_EQ(a.outcome, Outcome::TraceExists);
    ASSERT_TRUE(a.couple);
    EXPECT_NEAR(*a.couple->classical_s, (1 - kCantorD) / 2, 1e-15);
    EXPECT_EQ(a.couple->q_D, 1.0);

    EXPECT_EQ(run(cantor(), SeqSpec::geometric(0.0), 2, 2).outcome, Outcome::Dense);

    const GaugeSpec lo = GaugeSpec::log_only(-0.5, 1);
    const Verdict b = run(lo, SeqSpec::power_log(0.0, 0.75), 0.5, 1);
    EXPECT_EQ(b.outcome, Outcome::TraceExists);
    ASSERT_TRUE(b.witness_r);
    EXPECT_EQ(run(lo, SeqSpec::power_log(0.0, 0.3), 0.5, 1).outcome, Outcome::ConjecturedDense);
}

TEST(Decide, LogOnlyWindow) {
    // Trace for kappa in (0.5, 1]; the conjecture covers the rest of kappa > 0 when q = 1.
    const GaugeSpec lo = GaugeSpec::log_only(-0.5, 1);
    for (double kappa : {0.55, 0.8, 1.0, 1.7}) EXPECT_EQ(run(lo, SeqSpec::power_log(0, kappa), 0.5, 1).outcome, Outcome::TraceExists);
    for (double kappa : {0.1, 0.45}) EXPECT_EQ(run(lo, SeqSpec::power_log(0, kappa), 0.5, 1).outcome, Outcome::ConjecturedDense);
    EXPECT_EQ(run(lo, SeqSpec::power_log(0, -0.2), 0.5, 1).outcome, Outcome::Dense);
}

TEST(Decide, ClassicalGrid) {
    for (double p : {0.5, 1.0, 2.0}) {
        for (double q : {0.5, 1.0, 2.0}) {
            if (!(p >= 1.0 || q <= p)) continue;
            for (double s : {-0.5, 0.0, 0.5}) {
                const Verdict v = run(cantor(), SeqSpec::geometric(s), p, q);
                const bool trace = s > 0.0 || (s == 0.0 && q <= 1.0);
                EXPECT_EQ(v.outcome, trace ? Outcome::TraceExists : Outcome::Dense) << p << " " << q << " " << s;
            }
        }
    }
}

TEST(Decide, RuleTableRandom) {
    Gen g(62);
    int checked = 0;
    for (int i = 0; i < 400; ++i) {
        const double d = g.uniform(0.1, 0.9);
        const double b = g.uniform(-1.0, std::min(1.0, d * std::log(2.0)));
        const double s = g.coin() ? 0.0 : g.uniform(-1.5, 1.5);
        const double kappa = g.uniform(-2, 2);
        const double p = g.coin() ? g.uniform(0.2, 0.95) : g.uniform(1, 4);
        const double q = g.uniform(0.2, 4);
        const auto want = oracle(d, b, s, kappa, p, q);
        if (!want) continue;
        ++checked;
        const Verdict v = run(GaugeSpec::power_log(d, b, 1), SeqSpec::power_log(s, kappa), p, q, PorosityMode::Yes);
        EXPECT_EQ(v.outcome, *want) << d << " " << b << " " << s << " " << kappa << " " << p << " " << q << " " << v.rule;
        EXPECT_FALSE(v.conditions.empty());
    }
    EXPECT_GT(checked, 350);
}

TEST(Decide, MonotoneUnderDomination) {
    Gen g(63);
    for (int i = 0; i < testing::kCases; ++i) {
        const double s = g.uniform(-1, 1), kappa = g.uniform(-2, 2);
        const double p = g.uniform(1, 3), q = g.uniform(0.3, 4);
        const Verdict v = run(cantor(), SeqSpec::power_log(s, kappa), p, q);
        if (v.outcome != Outcome::TraceExists) continue;
        const Verdict w = run(cantor(), SeqSpec::power_log(s + g.uniform(0, 1), kappa + g.uniform(0, 1)), p, q);
        EXPECT_EQ(w.outcome, Outcome::TraceExists);
    }
}

TEST(Decide, MutualExclusionCaseA) {
    // Density is issued exactly when sigma^{-1} is outside l_{q'}.
    Gen g(64);
    for (int i = 0; i < testing::kCases; ++i) {
        const double s = g.coin() ? 0.0 : g.uniform(-1, 1), kappa = g.uniform(-2, 2);
        const double p = g.uniform(1, 3), q = g.uniform(0.3, 4);
        const Verdict v = run(cantor(), SeqSpec::power_log(s, kappa), p, q);
        const double qp = conjugate_index(q);
        const bool in = power_log_in_ell(-s, -kappa, qp);
        EXPECT_EQ(v.outcome == Outcome::TraceExists, in);
        EXPECT_EQ(v.outcome == Outcome::Dense, !in);
    }
}

TEST(Decide, PorosityNoDowngradesDensity) {
    // Full interval: no holes and the ambient smoothness forces L >= 0.
    const Verdict full = run(GaugeSpec::power_log(1.0, 0.0, 1), SeqSpec::geometric(0.0), 2, 2);
    EXPECT_EQ(full.outcome, Outcome::Unknown);
    EXPECT_NE(full.rule.find("blocked"), std::string::npos);
    EXPECT_FALSE(full.couple);
    EXPECT_EQ(run(GaugeSpec::power_log(1.0, 0.0, 1), SeqSpec::geometric(0.5), 2, 2).outcome, Outcome::TraceExists);
    // Declared non-porous but L = -1 suffices: density survives.
    const GaugeSpec half = GaugeSpec::power_log(0.5, 0.0, 1);
    EXPECT_EQ(run(half, SeqSpec::geometric(0.0), 2, 2, PorosityMode::No).outcome, Outcome::Dense);
    EXPECT_EQ(run(half, SeqSpec::geometric(-1.0), 2, 2, PorosityMode::No).outcome, Outcome::Unknown);
}

TEST(Decide, OutOfScopeAndErrors) {
    EXPECT_EQ(run(GaugeSpec::power_log(1.5, 0.0, 1), SeqSpec::geometric(0), 2, 2).outcome, Outcome::OutOfScope);
    EXPECT_THROW(run(cantor(), SeqSpec::geometric(0), 0.0, 2), InvalidSpec);
    EXPECT_THROW(run(cantor(), SeqSpec::geometric(0), 1.0, INFINITY), InvalidSpec);
}

TEST(Couple, Examples) {
    const Couple c = dichotomy_couple(cantor(), 2.0, std::nullopt);
    EXPECT_EQ(c.q_D, 1.0);
    ASSERT_TRUE(c.classical_s);
    EXPECT_NEAR(*c.classical_s, (1 - kCantorD) / 2, 1e-15);
    const GaugeSpec lo = GaugeSpec::log_only(-0.5, 1);
    const Couple g = dichotomy_couple(lo, 2.0, std::nullopt);
    EXPECT_FALSE(g.classical_s);
    for (std::size_t j : {0UL, 3UL, 40UL}) EXPECT_NEAR(g.boundary.log2_at(j), 0.5 * (lo.log2_h(j) + double(j)), 1e-12);
    EXPECT_EQ(dichotomy_couple(cantor(), 0.5, 0.3).q_D, 0.5);
    EXPECT_THROW(dichotomy_couple(cantor(), 0.5, std::nullopt), HypothesisRejected);
    EXPECT_THROW(dichotomy_couple(cantor(), 0.5, 0.8), HypothesisRejected);
    EXPECT_THROW(dichotomy_couple(GaugeSpec::power_log(1.0, 0.0, 1), 2.0, std::nullopt), HypothesisRejected);
}

TEST(Subseq, GeometricDecay) {
    const GaugeSpec h = cantor();
    const double p = 2.0;
    const SeqSpec tau = SeqSpec::geometric(-0.1) * gauge_power_sequence(h, p);
    const SubseqResult r = density_bound_subseq(h, tau, p, 256, 1e-3);
    EXPECT_TRUE(r.reached);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        EXPECT_NEAR(r.rows[i].value, std::exp2(-0.1 * double(r.rows[i].j)), 1e-12 * r.rows[i].value + 1e-300);
        if (i > 0) EXPECT_LT(r.rows[i].value, r.rows[i - 1].value);
    }
    // 2^{-0.1 j} < 1e-3 first at j = 100.
    const auto first = std::find_if(r.rows.begin(), r.rows.end(), [&](const SubseqRow& row) { return row.value < 1e-3; });
    ASSERT_NE(first, r.rows.end());
    EXPECT_EQ(first->j, 100U);
}

TEST(Subseq, HarmonicDecayAndRejection) {
    const GaugeSpec h = GaugeSpec::log_only(-0.5, 1);
    const SeqSpec tau = SeqSpec::power_log(0, -1) * gauge_power_sequence(h, 1.0);
    const SubseqResult r = density_bound_subseq(h, tau, 1.0, 4096, 1e-3);
    EXPECT_TRUE(r.reached);
    for (const SubseqRow& row : r.rows) EXPECT_NEAR(row.value, 1.0 / (1.0 + double(row.j)), 1e-12);
    EXPECT_THROW(density_bound_subseq(cantor(), gauge_power_sequence(cantor(), 2.0), 2.0, 256), HypothesisRejected);
}

TEST(Harmonic, K2MatchesOracle) {
    for (std::size_t k = 1; k <= 600; ++k) EXPECT_EQ(harmonic_k2(k), testing::harmonic_k2_oracle(k)) << k;
    // 1/3 + ... + 1/11 is only about 1.52; the sum first reaches 2 at 19.
    EXPECT_EQ(harmonic_k2(3), 19U);
}

TEST(Harmonic, K1MatchesBruteForce) {
    Gen g(65);
    for (int i = 0; i < testing::kCases; ++i) {
        const std::size_t k = static_cast<std::size_t>(g.integer(1, 50));
        const double N = std::floor(g.uniform(2.0 * double(harmonic_k2(k)), 5000));
        std::size_t k1 = k;
        double acc = 0;
        for (;; ++k1) {
            acc += std::floor(N / double(k1));
            if (acc >= N) break;
        }
        EXPECT_EQ(harmonic_k1(k, N), k1) << k << " " << N;
    }
}

TEST(Harmonic, ConstantSigmaBounds) {
    const HarmonicResult r = density_bound_harmonic(cantor(), SeqSpec::geometric(0), 0.5, 1.0, 1, 400, 4096);
    ASSERT_EQ(r.rows.size(), 400U);
    for (const HarmonicRow& row : r.rows) {
        // tail = sum_{i >= k} i^{-2}, tail estimated by the integral beyond 10^6.
        double tail = 1e-6;
        for (std::size_t i = row.k; i < 1000000; ++i) tail += 1.0 / (double(i) * double(i));
        EXPECT_NEAR(row.tail, tail, 1e-9 * tail);
        EXPECT_LE(row.bound, row.majorant * (1 + 1e-12));
        EXPECT_GE(row.k1, row.k);
    }
    EXPECT_LT(r.rows.back().bound, 0.05);
    EXPECT_THROW(density_bound_harmonic(cantor(), SeqSpec::geometric(0), 1.0, 1.0, 1, 5, 4096), HypothesisRejected);
    EXPECT_THROW(density_bound_harmonic(cantor(), SeqSpec::geometric(1), 0.5, 1.0, 1, 5, 4096), HypothesisRejected);
}

TEST(Blocks, ConstantSigmaClosedForm) {
    const BlocksResult r = density_bound_blocks(SeqSpec::geometric(0), 2.0, 1000, 1 << 20);
    ASSERT_EQ(r.rows.size(), 1000U);
    for (const BlockRow& row : r.rows) {
        EXPECT_EQ(row.end - row.start, 1U);
        const double want = 1.0 / std::sqrt(double(row.k));
        EXPECT_LT(std::abs(row.bound - want), 1e-12 * want);
        EXPECT_LT(std::abs(row.majorant - want), 1e-12 * want);
    }
}

TEST(Blocks, MinimalBlocksAndMajorant) {
    const double q = 2.0, qp = 2.0;
    const BlocksResult r = density_bound_blocks(SeqSpec::power_log(0, 0.4), q, 60, 1 << 20);
    std::size_t expect_start = r.rows.front().start;
    double inv_sum = 0.0;
    for (const BlockRow& row : r.rows) {
        EXPECT_EQ(row.start, expect_start);
        double s = 0.0, last = 0.0;
        for (std::size_t j = row.start; j < row.end; ++j) s += last = std::pow(1.0 + double(j), -0.4 * qp);
        EXPECT_NEAR(row.block_sum, s, 1e-12 * s);
        EXPECT_GE(s, 1.0);
        EXPECT_LT(s - last, 1.0);
        inv_sum += std::pow(s, 1 - q);
        EXPECT_NEAR(row.bound, std::pow(inv_sum, 1 / q) / double(row.k), 1e-12);
        EXPECT_LE(row.bound, row.majorant * (1 + 1e-12));
        expect_start = row.end;
    }
    EXPECT_GT(r.rows.back().end - r.rows.back().start, r.rows.front().end - r.rows.front().start);
    EXPECT_NEAR(r.lambda_total, 1.0, 1e-12);
    EXPECT_LE(r.direct_bound, r.rows.back().majorant * (1 + 1e-12));
}

TEST(Blocks, Rejections) {
    EXPECT_THROW(density_bound_blocks(SeqSpec::geometric(0.1), 2.0, 10, 4096), HypothesisRejected);
    EXPECT_THROW(density_bound_blocks(SeqSpec::geometric(0), 1.0, 10, 4096), HypothesisRejected);
    EXPECT_THROW(density_bound_blocks(SeqSpec::power_log(0, 0.4), 2.0, 100000, 64), HypothesisRejected);
}

}  // namespace
}  // namespace fractrace
