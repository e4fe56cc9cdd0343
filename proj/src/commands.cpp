#include "fractrace/commands.hpp"

#include "fractrace/errors.hpp"
#include "fractrace/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace fractrace {

const char* tool_version() { return FRACTRACE_VERSION; }

namespace {

using K = OptionKind;

std::vector<CommandInfo> make_table() {
    const OptionSpec gauge{"gauge", K::Gauge, true, "gauge function spec (JSON file or inline JSON)"};
    const OptionSpec sigma{"sigma", K::Sequence, true, "smoothness sequence spec (JSON file or inline JSON)"};
    const OptionSpec p{"p", K::Number, true, "integrability p > 0"};
    const OptionSpec q{"q", K::Number, true, "summability q > 0"};
    const OptionSpec depth{"depth", K::Integer, false, "set depth J (default 12)"};
    return {
        {"analyze", "decide trace existence versus density",
         {gauge, sigma, p, q, {"porosity", K::Text, false, "auto|yes|no (default auto)"}}},
        {"indices", "upper/lower and Boyd indices of a sequence",
         {sigma, {"v", K::NumberList, false, "exponents v for l_v membership of sigma^{-1}"}}},
        {"gauge-check", "measure-function, porosity, doubling and xi checks",
         {gauge,
          {"K", K::Integer, false, "lag window for the grid checks (default 32)"},
          {"samples", K::Integer, false, "doubling-check radii (default 1024)"},
          {"xi-grid", K::Integer, false, "xi samples written as CSV (default 0: none)"},
          {"xi-tmax", K::Number, false, "largest -log2 s for xi samples (default 40)"}}},
        {"build-set", "build the dyadic h-set approximation", {gauge, depth}},
        {"verify-measure", "check mu(B(gamma,r)) ~ h(r) on sampled balls",
         {gauge, depth,
          {"samples", K::Integer, false, "sampled (gamma, r) pairs (default 200)"},
          {"eta", K::Number, false, "porosity constant for witness sampling (default 0: skip)"},
          {"porosity-samples", K::Integer, false, "witness searches when eta > 0 (default 50)"}}},
        {"cover", "optimal dyadic cover and cover-count law",
         {gauge, depth,
          {"level", K::Integer, false, "cover level j (default depth/2)"},
          {"j-lo", K::Integer, false, "first level of the count law (default 2)"},
          {"j-hi", K::Integer, false, "last level of the count law (default: finest resolvable)"}}},
        {"atom-check", "validate a partition or constant atom",
         {sigma, p,
          {"n", K::Integer, false, "ambient dimension (default 1)"},
          {"level", K::Integer, false, "atom level j (default 4)"},
          {"m", K::IntegerList, false, "cube index (default: the middle cube)"},
          {"kind", K::Text, false, "partition|constant (default partition)"},
          {"value", K::Number, false, "constant atom value (default 1)"},
          {"K", K::Integer, false, "smoothness order (default: required K, at most 4)"},
          {"L", K::Integer, false, "moment order (default: required L)"}}},
        {"moment-correct", "cancel atom moments inside a porosity hole",
         {gauge, sigma, p,
          {"depth", K::Integer, false, "set depth J (default 10)"},
          {"level", K::Integer, false, "atom level j (default 3)"},
          {"L", K::Integer, false, "moment order (default 1)"},
          {"K", K::Integer, false, "smoothness order (default: required K, at most 4)"},
          {"eta", K::Number, false, "porosity constant (default 0.3)"}}},
        {"density-curve", "vanishing bounds of the density constructions",
         {{"mode", K::Text, true, "subseq|harmonic|blocks"},
          {"gauge", K::Gauge, false, "gauge (subseq, harmonic)"},
          {"sigma", K::Sequence, true, "smoothness sequence"},
          {"p", K::Number, false, "integrability (subseq, harmonic)"},
          {"q", K::Number, false, "summability (harmonic, blocks)"},
          {"threshold", K::Number, false, "subseq target (default 1e-3)"},
          {"k-lo", K::Integer, false, "harmonic first k (default 1)"},
          {"k-hi", K::Integer, false, "harmonic last k (default 400)"},
          {"proxy", K::Number, false, "harmonic count proxy factor (default 1)"},
          {"blocks", K::Integer, false, "number of blocks (default 1000)"}}},
        {"couple", "boundary couple (sigma, q_D) of the dichotomy",
         {gauge, p, {"q", K::Number, false, "summability when 0 < p < 1"}}},
    };
}

class Args {
public:
    Args(const json& raw, const CommandInfo& info) : raw_(raw), info_(info) {
        if (!raw_.is_object()) throw InvalidSpec(info_.name + ": arguments must be a JSON object");
        for (const auto& [key, value] : raw_.items()) {
            const bool known = std::any_of(info_.options.begin(), info_.options.end(),
                                           [&](const OptionSpec& o) { return o.name == key; }) ||
                               std::find(kGlobalKnobs.begin(), kGlobalKnobs.end(), key) != kGlobalKnobs.end();
            if (!known) throw InvalidSpec(info_.name + ": unknown argument '" + key + "'");
            (void)value;
        }
    }

    bool has(const std::string& key) const { return raw_.contains(key) && !raw_[key].is_null(); }

    double number(const std::string& key) {
        const json& v = need(key);
        if (!v.is_number()) throw InvalidSpec(info_.name + ": --" + key + " must be a number");
        const double x = v.get<double>();
        parameters[key] = x;
        return x;
    }

    double number_or(const std::string& key, double fallback) {
        if (!has(key)) {
            parameters[key] = fallback;
            return fallback;
        }
        return number(key);
    }

    std::optional<double> optional_number(const std::string& key) {
        if (!has(key)) {
            parameters[key] = nullptr;
            return std::nullopt;
        }
        return number(key);
    }

    std::int64_t integer(const std::string& key) {
        const json& v = need(key);
        if (!as_integer(v)) throw InvalidSpec(info_.name + ": --" + key + " must be an integer");
        const auto x = v.get<std::int64_t>();
        parameters[key] = x;
        return x;
    }

    std::int64_t integer_or(const std::string& key, std::int64_t fallback) {
        if (!has(key)) {
            parameters[key] = fallback;
            return fallback;
        }
        return integer(key);
    }

    std::size_t count_or(const std::string& key, std::int64_t fallback) {
        const std::int64_t x = integer_or(key, fallback);
        if (x < 0) throw InvalidSpec(info_.name + ": --" + key + " must be non-negative");
        return static_cast<std::size_t>(x);
    }

    std::string text_or(const std::string& key, const std::string& fallback) {
        std::string x = fallback;
        if (has(key)) {
            if (!raw_[key].is_string()) throw InvalidSpec(info_.name + ": --" + key + " must be a string");
            x = raw_[key].get<std::string>();
        }
        parameters[key] = x;
        return x;
    }

    std::string text(const std::string& key) {
        need(key);
        return text_or(key, "");
    }

    std::vector<double> numbers(const std::string& key) {
        std::vector<double> out;
        if (has(key)) {
            const json& v = raw_[key];
            if (!v.is_array()) throw InvalidSpec(info_.name + ": --" + key + " must be a list of numbers");
            for (const json& e : v) {
                if (!e.is_number()) throw InvalidSpec(info_.name + ": --" + key + " must be a list of numbers");
                out.push_back(e.get<double>());
            }
        }
        parameters[key] = out;
        return out;
    }

    std::optional<std::vector<std::int64_t>> integers(const std::string& key) {
        if (!has(key)) {
            parameters[key] = nullptr;
            return std::nullopt;
        }
        const json& v = raw_[key];
        std::vector<std::int64_t> out;
        if (!v.is_array()) throw InvalidSpec(info_.name + ": --" + key + " must be a list of integers");
        for (const json& e : v) {
            if (!as_integer(e)) throw InvalidSpec(info_.name + ": --" + key + " must be a list of integers");
            out.push_back(e.get<std::int64_t>());
        }
        parameters[key] = out;
        return out;
    }

    GaugeSpec gauge(const std::string& key = "gauge") {
        GaugeSpec h = gauge_from_json(need(key), key);
        parameters[key] = raw_[key];
        return h;
    }

    SeqSpec sequence(const std::string& key) {
        SeqSpec s = seq_from_json(need(key), key);
        parameters[key] = raw_[key];
        return s;
    }

    json parameters = json::object();

private:
    static bool as_integer(const json& v) {
        if (v.is_number_integer()) return true;
        return v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() &&
               std::abs(v.get<double>()) < 9e15;
    }

    const json& need(const std::string& key) const {
        if (!has(key)) throw InvalidSpec(info_.name + ": missing required argument --" + key);
        return raw_[key];
    }

    const json& raw_;
    const CommandInfo& info_;
};

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json point_json(const Point& x, int n) { return n == 1 ? json::array({x[0]}) : json::array({x[0], x[1]}); }

int set_depth(Args& a, std::int64_t fallback) {
    const std::int64_t depth = a.integer_or("depth", fallback);
    if (depth < 0 || depth > 60) throw InvalidSpec("--depth must lie in [0, 60]");
    return static_cast<int>(depth);
}

json count_law_json(const CountLaw& law) {
    json rows = json::array();
    for (const CountRow& r : law.rows) {
        rows.push_back({{"j", r.j},
                        {"count", r.count},
                        {"inverse_h", r.inverse_h},
                        {"ratio", r.ratio},
                        {"grid_count", r.grid_count},
                        {"grid_ratio", r.grid_ratio}});
    }
    return {{"rows", rows},
            {"band_ratio", number_or_null(law.band_ratio)},
            {"grid_band_ratio", number_or_null(law.grid_band_ratio)},
            {"pass", law.pass}};
}

json sample_json(const HSetSample& s, int n) {
    return {{"gamma", point_json(s.gamma, n)}, {"r", s.r}, {"ratio", s.ratio}};
}

CommandResult cmd_analyze(Args& a) {
    const GaugeSpec h = a.gauge();
    const SeqSpec sigma = a.sequence("sigma");
    const double p = a.number("p");
    const double q = a.number("q");
    const std::string mode = a.text_or("porosity", "auto");
    PorosityMode porosity = PorosityMode::Auto;
    if (mode == "yes") {
        porosity = PorosityMode::Yes;
    } else if (mode == "no") {
        porosity = PorosityMode::No;
    } else if (mode != "auto") {
        throw InvalidSpec("analyze: --porosity must be auto, yes or no");
    }
    const Verdict v = decide(ProblemSpec{h, sigma, p, q, porosity});
    CommandResult out;
    out.document = to_json(v);
    out.document["gauge"] = h.describe();
    out.document["sigma"] = sigma.describe();
    return out;
}

CommandResult cmd_indices(Args& a) {
    const SeqSpec sigma = a.sequence("sigma");
    const std::size_t jmax = a.count_or("jmax", static_cast<std::int64_t>(kDefaultIndexWindow));
    const double tol = a.number_or("tol", 1e-9);
    const std::vector<double> vs = a.numbers("v");

    const IndexReport r = indices(sigma, jmax);
    const IndexReport est = numeric_indices(sigma, jmax);
    const AdmissibilityWitness w = admissibility_witness(sigma, jmax);
    const bool ordered = r.lower <= r.boyd_lower + tol && r.boyd_lower <= r.boyd_upper + tol &&
                         r.boyd_upper <= r.upper + tol;
    json members = json::array();
    for (double v : vs) {
        json m = to_json(ell_membership(sigma, v));
        m["v"] = v;
        members.push_back(m);
    }
    CommandResult out;
    out.document = {{"sigma", sigma.describe()},
                    {"indices", to_json(r)},
                    {"numeric", to_json(est)},
                    {"numeric_deviation", std::max({std::abs(est.lower - r.lower), std::abs(est.upper - r.upper),
                                                    std::abs(est.boyd_lower - r.boyd_lower),
                                                    std::abs(est.boyd_upper - r.boyd_upper)})},
                    {"ordering_ok", ordered},
                    {"admissibility", {{"d0", w.d0}, {"d1", w.d1}}},
                    {"inverse_memberships", members}};
    return out;
}

CommandResult cmd_gauge_check(Args& a) {
    const GaugeSpec h = a.gauge();
    const std::size_t J = a.count_or("jmax", 64);
    const std::size_t K = a.count_or("K", 32);
    const double band = a.number_or("band", kDefaultBand);
    const std::size_t samples = a.count_or("samples", 1024);
    const std::size_t xi_grid = a.count_or("xi-grid", 0);
    const double xi_tmax = a.number_or("xi-tmax", 40.0);

    const MeasureFunctionReport mf = is_measure_function(h, J, K, band);
    const PorosityReport por = porosity_check(h, J, K);
    const DoublingReport dbl = doubling_check(h, samples);
    json mfj = to_json(mf.verdict);
    mfj["c"] = mf.c;
    mfj["violation"] = mf.violation ? json::array({mf.violation->first, mf.violation->second}) : json(nullptr);
    json porj = to_json(por.verdict);
    porj["c"] = por.c;
    porj["epsilon"] = por.epsilon;
    json hs = json::array();
    for (double x : gauge_sequence(h, 16)) hs.push_back(x);

    CommandResult out;
    out.document = {{"gauge", h.describe()},
                    {"n", h.dimension()},
                    {"h_j", hs},
                    {"measure_function", mfj},
                    {"porosity", porj},
                    {"lebesgue_null", to_json(lebesgue_null(h))},
                    {"doubling", {{"c", dbl.c}, {"r_at_sup", dbl.r_at_sup}}}};
    if (xi_grid > 0) {
        CsvTable table({"s", "xi", "flagged"});
        const auto xs = xi_estimate(h, xi_grid, xi_tmax);
        for (const XiSample& x : xs) table.add({x.s, x.xi, x.flagged ? 1.0 : 0.0});
        out.csv = table.str();
        out.document["xi_samples"] = xs.size();
    }
    return out;
}

CommandResult cmd_build_set(Args& a) {
    const GaugeSpec h = a.gauge();
    const int depth = set_depth(a, 12);
    const HSetApprox set = build_cantor(h, depth);
    CsvTable table({"j", "count", "h_j", "ratio"});
    json counts = json::array();
    for (int j = 0; j <= depth; ++j) {
        const double hj = h.h(static_cast<std::size_t>(j));
        table.add({double(j), double(set.count(j)), hj, double(set.count(j)) * hj});
        counts.push_back(set.count(j));
    }
    CommandResult out;
    out.document = {{"gauge", h.describe()},
                    {"depth", depth},
                    {"counts", counts},
                    {"measure_conserved", set.measure_conserved()},
                    {"set", to_json(set)}};
    out.csv = table.str();
    return out;
}

CommandResult cmd_verify_measure(Args& a) {
    const GaugeSpec h = a.gauge();
    const int depth = set_depth(a, 12);
    const std::size_t samples = a.count_or("samples", 200);
    const auto seed = static_cast<std::uint64_t>(a.integer_or("seed", 0));
    const double band = a.number_or("band", kDefaultBand);
    const double eta = a.number_or("eta", 0.0);
    const std::size_t witness_samples = eta > 0.0 ? a.count_or("porosity-samples", 50) : 0;

    const HSetApprox set = build_cantor(h, depth);
    const int n = set.dimension();
    const HSetVerification v = verify_hset(set, h, samples, seed, band);
    CsvTable table({"gamma_x", "gamma_y", "r", "ratio"});
    for (const HSetSample& s : v.samples) table.add({s.gamma[0], n == 2 ? s.gamma[1] : 0.0, s.r, s.ratio});

    CommandResult out;
    out.document = {{"gauge", h.describe()},
                    {"depth", depth},
                    {"measure_conserved", set.measure_conserved()},
                    {"c1", v.c1},
                    {"c2", v.c2},
                    {"band_ratio", v.c1 > 0.0 ? json(v.c2 / v.c1) : json(nullptr)},
                    {"band", band},
                    {"pass", v.pass},
                    {"samples", v.samples.size()},
                    {"worst_low", sample_json(v.worst_low, n)},
                    {"worst_high", sample_json(v.worst_high, n)}};
    if (witness_samples > 0) {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
        const auto& cells = set.deepest();
        std::size_t found = 0;
        std::size_t resolved = 0;
        const double t_hi = std::max(0, depth - 3);
        for (std::size_t i = 0; i < witness_samples; ++i) {
            const auto idx = std::min(cells.size() - 1, static_cast<std::size_t>(unit_uniform(rng) * cells.size()));
            const Point gamma = set.corner(depth, cells[idx]);
            const double r = std::exp2(-unit_uniform(rng) * t_hi);
            const PorositySearch s = porosity_witness(set, gamma, r, eta);
            if (s.resolved) ++resolved;
            if (s.witness) ++found;
        }
        out.document["porosity_witnesses"] = {
            {"eta", eta}, {"searched", witness_samples}, {"resolved", resolved}, {"found", found}};
    }
    out.csv = table.str();
    out.exit_code = v.pass ? 0 : 3;
    return out;
}

CommandResult cmd_cover(Args& a) {
    const GaugeSpec h = a.gauge();
    const int depth = set_depth(a, 12);
    const int n = h.dimension();
    const int finest = std::max(0, n == 1 ? depth - 1 : depth - 4);
    const int level = static_cast<int>(a.integer_or("level", std::min(depth / 2, finest)));
    const int j_lo = static_cast<int>(a.integer_or("j-lo", std::min(2, finest)));
    const int j_hi = static_cast<int>(a.integer_or("j-hi", finest));
    const double band = a.number_or("band", kDefaultBand);

    const HSetApprox set = build_cantor(h, depth);
    const DyadicCover cover = optimal_cover(set, level);
    const CoverCheck check = verify_cover(set, cover);
    const PartitionSupports supports = partition_supports(set, cover);
    const CountLaw law = count_vs_gauge(set, h, j_lo, j_hi, band);

    CsvTable table({"j", "count", "inverse_h", "ratio", "grid_count", "grid_ratio"});
    for (const CountRow& r : law.rows) {
        table.add({double(r.j), double(r.count), r.inverse_h, r.ratio, double(r.grid_count), r.grid_ratio});
    }
    CommandResult out;
    out.document = {{"gauge", h.describe()},
                    {"depth", depth},
                    {"cover", to_json(cover)},
                    {"check", to_json(check)},
                    {"partition", to_json(supports)},
                    {"count_law", count_law_json(law)}};
    out.csv = table.str();
    out.exit_code = check.ok() && supports.covers && law.pass ? 0 : 3;
    return out;
}

std::optional<KLOrders> maybe_required(const SeqSpec& sigma, double p, int n) {
    if (!sigma.closed_form()) return std::nullopt;
    return required_KL(sigma, p, n);
}

json orders_json(const std::optional<KLOrders>& o) {
    if (!o) return nullptr;
    return {{"K", o->K}, {"L", o->L}};
}

int order_or(Args& a, const char* key, std::optional<int> fallback) {
    if (!fallback && !a.has(key)) throw InvalidSpec(std::string("--") + key + " is required for this sigma");
    const std::int64_t x = a.integer_or(key, fallback.value_or(0));
    if (x < -1 || x > 8) throw InvalidSpec(std::string("--") + key + " out of range");
    return static_cast<int>(x);
}

CommandResult cmd_atom_check(Args& a) {
    const SeqSpec sigma = a.sequence("sigma");
    const double p = a.number("p");
    const int n = static_cast<int>(a.integer_or("n", 1));
    if (n != 1 && n != 2) throw InvalidSpec("atom-check: --n must be 1 or 2");
    const int level = static_cast<int>(a.integer_or("level", 4));
    if (level < 0 || level > 30) throw InvalidSpec("atom-check: --level must lie in [0, 30]");
    CellIndex m{0, 0};
    if (const auto given = a.integers("m")) {
        if (static_cast<int>(given->size()) != n) throw InvalidSpec("atom-check: --m needs n entries");
        for (int i = 0; i < n; ++i) m[i] = (*given)[static_cast<std::size_t>(i)];
    } else {
        for (int i = 0; i < n; ++i) m[i] = level > 0 ? std::int64_t{1} << (level - 1) : 0;
        a.parameters["m"] = n == 1 ? json::array({m[0]}) : json::array({m[0], m[1]});
    }
    const std::string kind = a.text_or("kind", "partition");
    const auto required = maybe_required(sigma, p, n);
    const int K = order_or(a, "K", required ? std::optional<int>(std::min(required->K, 4)) : std::nullopt);
    const int L = order_or(a, "L", required ? std::optional<int>(required->L) : std::nullopt);
    const double tol = a.number_or("tol", 1e-8);

    Atom atom;
    if (kind == "partition") {
        atom = partition_atom(level, m, n, sigma, p, K);
    } else if (kind == "constant") {
        atom = constant_atom(level, m, n, a.number_or("value", 1.0));
    } else {
        throw InvalidSpec("atom-check: --kind must be partition or constant");
    }
    const AtomReport report = atom_validate(atom, sigma, p, K, L, tol);
    CommandResult out;
    out.document = {{"sigma", sigma.describe()},
                    {"required_KL", orders_json(required)},
                    {"K", K},
                    {"L", L},
                    {"kind", kind},
                    {"atom", to_json(atom)},
                    {"report", to_json(report)}};
    out.exit_code = report.valid ? 0 : 3;
    return out;
}

CommandResult cmd_moment_correct(Args& a) {
    const GaugeSpec h = a.gauge();
    const SeqSpec sigma = a.sequence("sigma");
    const double p = a.number("p");
    const int depth = set_depth(a, 10);
    const int level = static_cast<int>(a.integer_or("level", 3));
    if (level < 0 || level > depth) throw InvalidSpec("moment-correct: --level must lie in [0, depth]");
    const int L = order_or(a, "L", 1);
    const int n = h.dimension();
    const auto required = maybe_required(sigma, p, n);
    const int K = order_or(a, "K", std::min(required ? required->K : 2, 4));
    const double eta = a.number_or("eta", 0.3);
    const double tol = a.number_or("tol", 1e-8);

    const HSetApprox set = build_cantor(h, depth);
    const auto& cells = set.deepest();
    const Point gamma = set.corner(depth, cells[cells.size() / 2]);
    CellIndex m{0, 0};
    const double cells_per_axis = std::ldexp(1.0, level);
    for (int i = 0; i < n; ++i) {
        m[i] = static_cast<std::int64_t>(std::min(cells_per_axis - 1.0, std::floor(gamma[i] * cells_per_axis)));
    }
    // Keep the hole inside the 1.5-dilated cube: (1 + eta) r <= 2^{-j}/4.
    double r = std::ldexp(1.0, -level - 3);
    std::optional<PorosityWitness> hole;
    for (; r * eta >= std::ldexp(1.0, -depth); r *= 0.5) {
        const PorositySearch s = porosity_witness(set, gamma, r, eta);
        if (s.witness) {
            hole = s.witness;
            break;
        }
    }
    if (!hole) throw HypothesisRejected("no porosity hole near gamma above the set's resolution");

    const PsiFamily psi = psi_family(L, n);
    const Atom atom = partition_atom(level, m, n, sigma, p, K);
    const MomentCorrection mc = moment_correct(atom, *hole, psi, &set);

    // The correction must not change the atom outside its own ball.
    const Box box = atom.allowed_support();
    const int per_axis = n == 1 ? 4097 : 129;
    const auto xs = midpoint_nodes(box.lo[0], box.hi[0], per_axis);
    const auto ys = n == 2 ? midpoint_nodes(box.lo[1], box.hi[1], per_axis) : std::vector<double>{0.0};
    double change = 0.0;
    std::size_t outside = 0;
    for (double x : xs) {
        for (double y : ys) {
            const Point pt{x, y};
            const double dx = x - mc.hole_center[0];
            const double dy = n == 2 ? y - mc.hole_center[1] : 0.0;
            if (std::sqrt(dx * dx + dy * dy) <= mc.epsilon) continue;
            ++outside;
            change = std::max(change, std::abs(mc.corrected(pt) - atom(pt)));
        }
    }
    const AtomReport report = atom_validate(mc.corrected, sigma, p, K, L, tol);
    json indices = json::array();
    for (const MultiIndex& b : mc.indices) indices.push_back(n == 1 ? json::array({b[0]}) : json::array({b[0], b[1]}));

    CommandResult out;
    out.document = {{"gauge", h.describe()},
                    {"sigma", sigma.describe()},
                    {"gamma", point_json(gamma, n)},
                    {"r", hole->r},
                    {"hole", {{"center", point_json(hole->hole, n)}, {"radius", hole->hole_radius}}},
                    {"epsilon", mc.epsilon},
                    {"indices", indices},
                    {"d", mc.d},
                    {"moment_before", mc.moment_before},
                    {"moment_after", mc.moment_after},
                    {"outside_points", outside},
                    {"max_change_outside", change},
                    {"psi", {{"condition_number", psi.condition_number},
                             {"biorthogonality_error", psi.biorthogonality_error}}},
                    {"atom_constant", report.derivative_ratio},
                    {"report", to_json(report)}};
    out.exit_code = mc.moment_after <= tol && change == 0.0 ? 0 : 3;
    return out;
}

CommandResult cmd_density_curve(Args& a) {
    const std::string mode = a.text("mode");
    CommandResult out;
    if (mode == "subseq") {
        const GaugeSpec h = a.gauge();
        const SeqSpec sigma = a.sequence("sigma");
        const double p = a.number("p");
        const std::size_t jmax = a.count_or("jmax", 256);
        const double threshold = a.number_or("threshold", 1e-3);
        const SeqSpec tau = sigma * gauge_power_sequence(h, p);
        const SubseqResult r = density_bound_subseq(h, tau, p, jmax, threshold);
        CsvTable table({"k", "j", "value"});
        for (const SubseqRow& row : r.rows) table.add({double(row.k), double(row.j), row.value});
        out.csv = table.str();
        json first_below = nullptr;
        for (const SubseqRow& row : r.rows) {
            if (row.value < threshold) {
                first_below = row.j;
                break;
            }
        }
        out.document = {{"mode", mode},
                        {"tau", tau.describe()},
                        {"rows", r.rows.size()},
                        {"threshold", r.threshold},
                        {"reached", r.reached},
                        {"first_j_below", first_below},
                        {"truncation", r.truncation}};
    } else if (mode == "harmonic") {
        const GaugeSpec h = a.gauge();
        const SeqSpec sigma = a.sequence("sigma");
        const double p = a.number("p");
        const double q = a.number("q");
        const std::size_t k_lo = a.count_or("k-lo", 1);
        const std::size_t k_hi = a.count_or("k-hi", 400);
        const std::size_t jmax = a.count_or("jmax", 4096);
        const double proxy = a.number_or("proxy", 1.0);
        const HarmonicResult r = density_bound_harmonic(h, sigma, p, q, k_lo, k_hi, jmax, proxy);
        CsvTable table({"k", "k1", "k2", "j_k", "bound", "tail", "majorant"});
        bool dominated = true;
        bool decreasing = true;
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            const HarmonicRow& row = r.rows[i];
            table.add({double(row.k), double(row.k1), double(row.k2), double(row.j_k), row.bound, row.tail,
                       row.majorant});
            dominated = dominated && row.bound <= row.majorant;
            if (i > 0) decreasing = decreasing && row.majorant <= r.rows[i - 1].majorant;
        }
        out.csv = table.str();
        out.document = {{"mode", mode},
                        {"rows", r.rows.size()},
                        {"away", r.away},
                        {"C", r.C},
                        {"bounded_by_majorant", dominated},
                        {"majorant_decreasing", decreasing},
                        {"final_bound", r.rows.empty() ? json(nullptr) : json(r.rows.back().bound)},
                        {"truncation", r.truncation}};
    } else if (mode == "blocks") {
        const SeqSpec sigma = a.sequence("sigma");
        const double q = a.number("q");
        const std::size_t blocks = a.count_or("blocks", 1000);
        const std::size_t jmax = a.count_or("jmax", 1 << 20);
        const BlocksResult r = density_bound_blocks(sigma, q, blocks, jmax);
        CsvTable table({"k", "start", "end", "block_sum", "bound", "majorant"});
        double worst = 0.0;
        for (const BlockRow& row : r.rows) {
            table.add({double(row.k), double(row.start), double(row.end), row.block_sum, row.bound, row.majorant});
            worst = std::max(worst, std::abs(row.bound - row.majorant) / row.majorant);
        }
        out.csv = table.str();
        out.document = {{"mode", mode},
                        {"rows", r.rows.size()},
                        {"q_prime", number_or_null(r.q_prime)},
                        {"lambda_total", r.lambda_total},
                        {"direct_bound", r.direct_bound},
                        {"max_relative_gap", worst},
                        {"truncation", r.truncation}};
    } else {
        throw InvalidSpec("density-curve: --mode must be subseq, harmonic or blocks");
    }
    return out;
}

CommandResult cmd_couple(Args& a) {
    const GaugeSpec h = a.gauge();
    const double p = a.number("p");
    const std::optional<double> q = a.optional_number("q");
    const Couple c = dichotomy_couple(h, p, q);
    json values = json::array();
    for (std::size_t j = 0; j <= 16; ++j) values.push_back(c.boundary(j));
    CommandResult out;
    out.document = to_json(c);
    out.document["gauge"] = h.describe();
    out.document["boundary_values"] = values;
    return out;
}

}  // namespace

const std::vector<CommandInfo>& command_table() {
    static const std::vector<CommandInfo> table = make_table();
    return table;
}

const CommandInfo& command_info(const std::string& name) {
    for (const CommandInfo& c : command_table()) {
        if (c.name == name) return c;
    }
    throw InvalidSpec("unknown command '" + name + "'");
}

CommandResult run_command(const std::string& name, const json& args) {
    const CommandInfo& info = command_info(name);
    Args a(args, info);
    CommandResult out;
    if (name == "analyze") out = cmd_analyze(a);
    else if (name == "indices") out = cmd_indices(a);
    else if (name == "gauge-check") out = cmd_gauge_check(a);
    else if (name == "build-set") out = cmd_build_set(a);
    else if (name == "verify-measure") out = cmd_verify_measure(a);
    else if (name == "cover") out = cmd_cover(a);
    else if (name == "atom-check") out = cmd_atom_check(a);
    else if (name == "moment-correct") out = cmd_moment_correct(a);
    else if (name == "density-curve") out = cmd_density_curve(a);
    else out = cmd_couple(a);
    out.document["command"] = name;
    out.parameters = std::move(a.parameters);
    return out;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const InvalidSpec*>(&e)) return 2;
    if (dynamic_cast<const HypothesisRejected*>(&e)) return 3;
    if (dynamic_cast<const InfeasibleInput*>(&e) || dynamic_cast<const ResolutionError*>(&e)) return 4;
    return 1;
}

std::string render_json(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace fractrace
