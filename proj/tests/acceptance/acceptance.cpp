// Acceptance run: one PASS/FAIL line per criterion with pinned tolerances.

#include "fractrace/atoms.hpp"
#include "fractrace/commands.hpp"
#include "fractrace/cover.hpp"
#include "fractrace/dichotomy.hpp"
#include "fractrace/gauge.hpp"
#include "fractrace/hset.hpp"
#include "fractrace/seq.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace fractrace;

namespace {

const double kCantorD = std::log(2.0) / std::log(3.0);
constexpr double kBand = 32.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
        r = body();
    } catch (const std::exception& e) {
        r = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = limit_s <= 0.0 || dt <= limit_s;
    const bool pass = r.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s [%d] %s: %s; %.3f s", pass ? "PASS" : "FAIL", id, title, r.detail.c_str(), dt);
    if (limit_s > 0.0) std::printf(" (limit %.0f s)", limit_s);
    std::printf("\n");
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

GaugeSpec cantor() { return GaugeSpec::power_log(kCantorD, 0.0, 1); }

Outcome cover_law() {
    const HSetApprox set = build_cantor(cantor(), 14);
    const CountLaw law = count_vs_gauge(set, cantor(), 2, 10, kBand);
    // Exhaustive check of each cover at its level.
    bool covers = true;
    for (int j = 2; j <= 10; ++j) covers = covers && verify_cover(set, optimal_cover(set, j)).ok();
    return {law.band_ratio <= kBand && covers,
            fmt("max/min N_j h_j = %.4g over j in [2,10] (<= 32)", law.band_ratio) + (covers ? ", covers verified" : ", cover check failed")};
}

Outcome hset_band() {
    const HSetApprox set = build_cantor(cantor(), 14);
    const HSetVerification v = verify_hset(set, cantor(), 200, 0, kBand);
    return {v.pass && v.c2 / v.c1 <= kBand, fmt("200 samples, c2/c1 = %.4g (<= 32)", v.c2 / v.c1)};
}

Outcome porosity() {
    const GaugeSpec porous = cantor();
    const GaugeSpec full = GaugeSpec::power_log(1.0, 0.0, 1);
    const bool check_yes = porosity_check(porous).verdict.yes();
    const bool check_no = porosity_check(full).verdict.no();
    constexpr int J = 14;
    constexpr double eta = 0.125;
    const HSetApprox a = build_cantor(porous, J);
    const HSetApprox b = build_cantor(full, J);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // On the interval, balls reaching past 0 or 1 hold holes outside the set;
    // porosity fails because balls inside (0, 1) never do.
    int found = 0, resolved = 0, interior = 0, spurious = 0;
    for (int k = 0; k < 50; ++k) {
        // r in [2^{-10}, 1]: holes of radius eta r stay above the resolution 2^{-14}.
        const double r = std::exp2(-10.0 * unit(rng));
        const auto& cells = a.deepest();
        const Point ga = a.corner(J, cells[static_cast<std::size_t>(unit(rng) * cells.size())]);
        const PorositySearch sa = porosity_witness(a, ga, r, eta);
        if (sa.resolved) {
            ++resolved;
            if (sa.witness) ++found;
        }
        const Point gb = b.corner(J, b.deepest()[static_cast<std::size_t>(unit(rng) * b.deepest().size())]);
        if (gb[0] - r < 0.0 || gb[0] + r > 1.0) continue;
        ++interior;
        if (porosity_witness(b, gb, r, eta).witness) ++spurious;
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "check r^d %s, r^n %s; witnesses %d/%d on the d-set, %d/%d on interior interval balls (eta = 1/8)",
                  check_yes ? "Yes" : "not Yes", check_no ? "No" : "not No", found, resolved, spurious, interior);
    return {check_yes && check_no && resolved == 50 && found == 50 && interior > 0 && spurious == 0, buf};
}

Outcome index_calculus() {
    double worst = 0.0;
    bool exact = true, ordered = true;
    for (double s : {-1.0, 0.0, 0.5, 2.0}) {
        for (double kappa : {-2.0, 0.0, 3.0}) {
            const SeqSpec sigma = SeqSpec::power_log(s, kappa);
            const IndexReport a = indices(sigma);
            exact = exact && a.lower == s && a.upper == s && a.boyd_lower == s && a.boyd_upper == s;
            const IndexReport n = numeric_indices(sigma, 64);
            for (double v : {n.lower, n.upper, n.boyd_lower, n.boyd_upper}) worst = std::max(worst, std::abs(v - s));
            for (const IndexReport* r : {&a, &n}) {
                ordered = ordered && r->lower <= r->boyd_lower && r->boyd_lower <= r->boyd_upper && r->boyd_upper <= r->upper;
            }
        }
    }
    return {exact && ordered && worst <= 1e-3,
            std::string(exact ? "analytic exact" : "analytic mismatch") + fmt(", numeric max deviation %.3g at J = 64 (<= 1e-3)", worst) +
                (ordered ? ", ordering holds" : ", ordering violated")};
}

Outcome atoms() {
    const PsiFamily psi = psi_family(1, 1);
    const HSetApprox set = build_cantor(cantor(), 12);
    const Point gamma = set.corner(12, set.deepest()[set.count(12) / 2]);
    std::optional<PorosityWitness> hole;
    for (double r = 1.0 / 16; r > std::ldexp(1.0, -12) && !hole; r /= 2) hole = porosity_witness(set, gamma, r, 0.3).witness;
    if (!hole) return {false, "no porosity hole found"};
    const Atom a = partition_atom(4, {static_cast<std::int64_t>(std::floor(hole->hole[0] * 16 + 0.5)), 0}, 1,
                                  SeqSpec::geometric(0.5), 0.5, 1);
    double moment = 0.0;
    bool unchanged = true;
    for (int L = 0; L <= 1; ++L) {
        const MomentCorrection mc = moment_correct(a, *hole, psi_family(L, 1), &set);
        moment = std::max(moment, mc.moment_after);
        for (int k = 0; k <= 8192; ++k) {
            const double x = -0.25 + 1.5 * k / 8192.0;
            if (std::abs(x - mc.hole_center[0]) < mc.epsilon) continue;
            unchanged = unchanged && mc.corrected({x, 0.0}) == a({x, 0.0});
        }
    }
    const KLOrders k1 = required_KL(SeqSpec::geometric(0.5), 2.0, 1);
    const KLOrders k2 = required_KL(SeqSpec::geometric(0.5), 0.5, 1);
    const KLOrders k3 = required_KL(SeqSpec::geometric(2.0), 1.0, 3);
    const bool kl = k1.K == 1 && k1.L == -1 && k2.K == 1 && k2.L == 0 && k3.K == 3 && k3.L == -1;
    char buf[220];
    std::snprintf(buf, sizeof buf, "biorthogonality %.3g (< 1e-8), corrected moments %.3g (< 1e-8), %s outside hole, required_KL %s",
                  psi.biorthogonality_error, moment, unchanged ? "unchanged" : "CHANGED", kl ? "(1,-1) (1,0) (3,-1)" : "mismatch");
    return {psi.biorthogonality_error < 1e-8 && moment < 1e-8 && unchanged && kl, buf};
}

Outcome density() {
    const BlocksResult blocks = density_bound_blocks(SeqSpec::geometric(0.0), 2.0, 1000, std::size_t{1} << 20);
    double rel = 0.0;
    for (const BlockRow& row : blocks.rows) {
        const double want = 1.0 / std::sqrt(static_cast<double>(row.k));
        rel = std::max(rel, std::abs(row.bound - want) / want);
    }
    const bool blocks_ok = blocks.rows.size() == 1000 && rel < 1e-12;

    const HarmonicResult h = density_bound_harmonic(cantor(), SeqSpec::geometric(0.0), 0.5, 1.0, 1, 400, 4096);
    bool under = true;
    for (const HarmonicRow& row : h.rows) under = under && row.bound <= row.majorant;
    const double last = h.rows.back().bound;
    const bool harmonic_ok = under && last < 0.05 && h.rows.back().k == 400;

    const double p = 2.0;
    const SeqSpec tau = SeqSpec::geometric(-0.1) * gauge_power_sequence(cantor(), p);
    const SubseqResult s = density_bound_subseq(cantor(), tau, p, 256, 1e-3);
    std::size_t first = 0;
    for (const SubseqRow& row : s.rows) {
        if (row.value < 1e-3) {
            first = row.j;
            break;
        }
    }
    const bool subseq_ok = s.reached && first >= 95 && first <= 105;
    char buf[240];
    std::snprintf(buf, sizeof buf, "blocks rel err %.3g (< 1e-12), harmonic bound %.4g at k = 400 (< 0.05, %s majorant), subseq below 1e-3 at j = %zu",
                  rel, last, under ? "<=" : "exceeds", first);
    return {blocks_ok && harmonic_ok && subseq_ok, buf};
}

Outcome decisions() {
    int agree = 0, total = 0;
    for (double p : {0.5, 1.0, 2.0}) {
        for (double q : {0.5, 1.0, 2.0}) {
            if (!(p >= 1.0 || q <= p)) continue;
            for (double s : {-0.5, 0.0, 0.5}) {
                const Verdict v = decide({cantor(), SeqSpec::geometric(s), p, q, PorosityMode::Auto});
                const bool trace = s > 0.0 || (s == 0.0 && q <= 1.0);
                ++total;
                if (v.outcome == (trace ? fractrace::Outcome::TraceExists : fractrace::Outcome::Dense)) ++agree;
            }
        }
    }
    const GaugeSpec lo = GaugeSpec::log_only(-0.5, 1);
    const Verdict a = decide({lo, SeqSpec::power_log(0.0, 0.75), 0.5, 1.0, PorosityMode::Auto});
    const Verdict b = decide({lo, SeqSpec::power_log(0.0, 0.3), 0.5, 1.0, PorosityMode::Auto});
    const bool example = a.outcome == fractrace::Outcome::TraceExists && b.outcome == fractrace::Outcome::ConjecturedDense;
    char buf[200];
    std::snprintf(buf, sizeof buf, "Case A grid %d/%d match, log_only kappa = 0.75 -> %s, kappa = 0.3 -> %s", agree, total,
                  to_string(a.outcome), to_string(b.outcome));
    return {agree == total && example, buf};
}

Outcome determinism() {
    const json cantor_json{{"family", "power_log"}, {"d", kCantorD}, {"b", 0.0}, {"n", 1}};
    const json sigma{{"family", "power_log"}, {"s", 0.5}, {"kappa", 0.0}};
    const std::vector<std::pair<std::string, json>> runs{
        {"analyze", {{"gauge", cantor_json}, {"sigma", sigma}, {"p", 2}, {"q", 2}}},
        {"indices", {{"sigma", sigma}}},
        {"gauge-check", {{"gauge", cantor_json}, {"xi-grid", 16}}},
        {"build-set", {{"gauge", cantor_json}}},
        {"verify-measure", {{"gauge", cantor_json}, {"seed", 11}, {"eta", 0.3}}},
        {"cover", {{"gauge", cantor_json}}},
        {"atom-check", {{"sigma", sigma}, {"p", 2}}},
        {"moment-correct", {{"gauge", cantor_json}, {"sigma", sigma}, {"p", 0.5}}},
        {"density-curve", {{"mode", "blocks"}, {"sigma", {{"family", "power_log"}, {"s", 0.0}, {"kappa", 0.0}}}, {"q", 2}}},
        {"couple", {{"gauge", cantor_json}, {"p", 2}}},
    };
    int identical = 0;
    for (const auto& [name, args] : runs) {
        const CommandResult first = run_command(name, args);
        // Replay from the recorded parameters, as a manifest does.
        const CommandResult again = run_command(name, first.parameters);
        if (render_json(first.document) == render_json(again.document) && first.csv == again.csv &&
            render_json(first.parameters) == render_json(again.parameters)) {
            ++identical;
        }
    }
    return {identical == static_cast<int>(runs.size()),
            std::to_string(identical) + "/" + std::to_string(runs.size()) + " commands replay byte-identical from recorded parameters"};
}

}  // namespace

int main() {
    criterion(1, "cover-count law", 10, cover_law);
    criterion(2, "h-set verification", 10, hset_band);
    criterion(3, "porosity consistency", 5, porosity);
    criterion(4, "index calculus", 0, index_calculus);
    criterion(5, "atom machinery", 0, atoms);
    criterion(6, "density bounds", 0, density);
    criterion(7, "decision-engine regression", 1, decisions);
    criterion(8, "determinism", 0, determinism);
    return failures == 0 ? 0 : 1;
}
