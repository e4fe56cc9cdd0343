#include "fractrace/io.hpp"

#include "fractrace/errors.hpp"
#include "fractrace/numeric.hpp"

#include <cmath>
#include <sstream>

namespace fractrace {

json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t column = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::ostringstream msg;
        msg << origin << ":" << line << ":" << column << ": malformed JSON";
        const std::string what = e.what();
        const auto colon = what.rfind(": ");
        if (colon != std::string::npos) msg << " (" << what.substr(colon + 2) << ")";
        throw InvalidSpec(msg.str());
    }
}

namespace {

const json& field(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw InvalidSpec(path + ": expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw InvalidSpec(path + ": missing field '" + key + "'");
    return *it;
}

double number(const json& j, const char* key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_number()) throw InvalidSpec(path + "." + key + ": expected a number");
    return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    return number(j, key, path);
}

std::string family_of(const json& j, const std::string& path) {
    const json& v = field(j, "family", path);
    if (!v.is_string()) throw InvalidSpec(path + ".family: expected a string");
    return v.get<std::string>();
}

std::vector<double> number_list(const json& j, const char* key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_array()) throw InvalidSpec(path + "." + key + ": expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) {
            throw InvalidSpec(path + "." + key + "[" + std::to_string(i) + "]: expected a number");
        }
        out.push_back(v[i].get<double>());
    }
    return out;
}

int dimension_of(const json& j, const std::string& path) {
    const double n = number_or(j, "n", 1.0, path);
    if (n != std::floor(n) || n < 1.0) throw InvalidSpec(path + ".n: expected a positive integer");
    return static_cast<int>(n);
}

}  // namespace

SeqSpec seq_from_json(const json& j, const std::string& path) {
    const std::string family = family_of(j, path);
    if (family == "power_log") {
        return SeqSpec::power_log(number(j, "s", path), number_or(j, "kappa", 0.0, path));
    }
    if (family == "exp_log") {
        return SeqSpec::exp_log(number_or(j, "s", 0.0, path), number_or(j, "kappa", 0.0, path),
                                number(j, "c", path), number(j, "rho", path));
    }
    if (family == "table") {
        if (j.contains("extend") && j["extend"] != "geometric") {
            throw InvalidSpec(path + ".extend: only \"geometric\" is supported");
        }
        return SeqSpec::table(number_list(j, "values", path));
    }
    if (family == "product") {
        return seq_from_json(field(j, "left", path), path + ".left") *
               seq_from_json(field(j, "right", path), path + ".right");
    }
    if (family == "power") {
        return SeqSpec::power(seq_from_json(field(j, "base", path), path + ".base"), number(j, "r", path));
    }
    throw InvalidSpec(path + ".family: unknown sequence family '" + family + "'");
}

json to_json(const SeqSpec& s) {
    using F = SeqSpec::Family;
    switch (s.family()) {
        case F::PowerLog: {
            const LogProfile p = *s.closed_form();
            return {{"family", "power_log"}, {"s", p.s}, {"kappa", p.kappa}};
        }
        case F::ExpLog: {
            const LogProfile p = *s.closed_form();
            return {{"family", "exp_log"}, {"s", p.s}, {"kappa", p.kappa}, {"c", p.c}, {"rho", p.rho}};
        }
        case F::Table: {
            json values = json::array();
            for (double v : s.table_log2()) values.push_back(std::exp2(v));
            return {{"family", "table"}, {"values", values}, {"extend", "geometric"}};
        }
        case F::Product:
            return {{"family", "product"}, {"left", to_json(*s.left())}, {"right", to_json(*s.right())}};
        case F::Power:
            return {{"family", "power"}, {"base", to_json(*s.left())}, {"r", s.exponent()}};
    }
    return json::object();
}

GaugeSpec gauge_from_json(const json& j, const std::string& path) {
    const std::string family = family_of(j, path);
    if (family == "power_log") {
        return GaugeSpec::power_log(number(j, "d", path), number_or(j, "b", 0.0, path), dimension_of(j, path));
    }
    if (family == "log_only") return GaugeSpec::log_only(number(j, "b", path), dimension_of(j, path));
    if (family == "exp_log") {
        return GaugeSpec::exp_log(number(j, "b", path), number(j, "kappa", path), dimension_of(j, path));
    }
    if (family == "xi_integral") {
        const json& nodes = field(j, "nodes", path);
        if (!nodes.is_array()) throw InvalidSpec(path + ".nodes: expected an array of [s, xi] pairs");
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const json& e = nodes[i];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
                throw InvalidSpec(path + ".nodes[" + std::to_string(i) + "]: expected [s, xi]");
            }
            pairs.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
        return GaugeSpec::xi_integral(std::move(pairs), dimension_of(j, path));
    }
    if (family == "table") return GaugeSpec::table(number_list(j, "values", path), dimension_of(j, path));
    if (family == "product") {
        const json& factors = field(j, "factors", path);
        if (!factors.is_array() || factors.size() != 2) {
            throw InvalidSpec(path + ".factors: expected exactly two gauges");
        }
        return GaugeSpec::product(gauge_from_json(factors[0], path + ".factors[0]"),
                                  gauge_from_json(factors[1], path + ".factors[1]"));
    }
    throw InvalidSpec(path + ".family: unknown gauge family '" + family + "'");
}

json to_json(const GaugeSpec& h) {
    using F = GaugeSpec::Family;
    switch (h.family()) {
        case F::PowerLog:
            return {{"family", "power_log"}, {"d", h.d()}, {"b", h.b()}, {"n", h.dimension()}};
        case F::LogOnly:
            return {{"family", "log_only"}, {"b", h.b()}, {"n", h.dimension()}};
        case F::ExpLog:
            return {{"family", "exp_log"}, {"b", h.b()}, {"kappa", h.kappa()}, {"n", h.dimension()}};
        case F::XiIntegral: {
            json nodes = json::array();
            for (const auto& [s, xi] : h.xi_nodes()) nodes.push_back({s, xi});
            return {{"family", "xi_integral"}, {"nodes", nodes}, {"n", h.dimension()}};
        }
        case F::Table: {
            json values = json::array();
            for (double v : h.table_log2()) values.push_back(std::exp2(v));
            return {{"family", "table"}, {"values", values}, {"n", h.dimension()}};
        }
        case F::Product:
            return {{"family", "product"}, {"factors", {to_json(h.factors()[0]), to_json(h.factors()[1])}}};
    }
    return json::object();
}

std::vector<std::pair<double, double>> xi_nodes_from_csv(const std::string& text, const std::string& origin) {
    std::vector<std::pair<double, double>> nodes;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw InvalidSpec(origin + ":" + std::to_string(number) + ": expected 's,xi'");
        }
        try {
            std::size_t used = 0;
            const double s = std::stod(line.substr(0, comma), &used);
            const double xi = std::stod(line.substr(comma + 1));
            nodes.emplace_back(s, xi);
        } catch (const std::exception&) {
            if (nodes.empty() && number == 1) continue;  // header row
            throw InvalidSpec(origin + ":" + std::to_string(number) + ": expected two numbers");
        }
    }
    if (nodes.empty()) throw InvalidSpec(origin + ": no (s, xi) rows");
    return nodes;
}

json to_json(const Membership& m) {
    return {{"value", to_string(m.value)}, {"reason", m.reason}, {"analytic", m.analytic}};
}

json to_json(const IndexReport& r) {
    return {{"lower", r.lower},
            {"upper", r.upper},
            {"boyd_lower", r.boyd_lower},
            {"boyd_upper", r.boyd_upper},
            {"window", r.window},
            {"method", r.method == IndexMethod::Analytic ? "analytic" : "numeric"}};
}

json to_json(const Couple& c) {
    json out{{"boundary", to_json(c.boundary)}, {"boundary_text", c.boundary.describe()}, {"q_D", c.q_D}};
    out["classical_s"] = c.classical_s ? json(*c.classical_s) : json(nullptr);
    return out;
}

json to_json(const Verdict& v) {
    json conditions = json::array();
    for (const Condition& c : v.conditions) {
        conditions.push_back({{"name", c.name},
                              {"value", to_string(c.value.value)},
                              {"detail", c.value.reason},
                              {"analytic", c.value.analytic}});
    }
    json out{{"outcome", to_string(v.outcome)}, {"rule", v.rule}, {"conditions", conditions}};
    out["couple"] = v.couple ? to_json(*v.couple) : json(nullptr);
    out["witness_r"] = v.witness_r ? json(*v.witness_r) : json(nullptr);
    return out;
}

namespace {

json index_json(const CellIndex& m, int n) {
    return n == 1 ? json::array({m[0]}) : json::array({m[0], m[1]});
}

json point_json(const Point& p, int n) { return n == 1 ? json::array({p[0]}) : json::array({p[0], p[1]}); }

}  // namespace

json to_json(const HSetApprox& set) {
    const int n = set.dimension();
    json levels = json::array();
    for (int j = 0; j <= set.depth(); ++j) {
        json cells = json::array();
        for (const HSetCell& c : set.level(j)) {
            if (c.weight.exp > 63) throw InvalidSpec("weight denominator exceeds 2^63");
            cells.push_back({{"m", index_json(c.m, n)},
                             {"parent", c.parent},
                             {"weight", {{"num", c.weight.num}, {"den", std::uint64_t{1} << c.weight.exp}}}});
        }
        levels.push_back({{"level", j}, {"count", set.count(j)}, {"cells", cells}});
    }
    return {{"n", n}, {"depth", set.depth()}, {"levels", levels}};
}

HSetApprox set_from_json(const json& j) {
    const std::string path = "set";
    const int n = dimension_of(j, path);
    const json& levels = field(j, "levels", path);
    if (!levels.is_array()) throw InvalidSpec("set.levels: expected an array");
    std::vector<std::vector<HSetCell>> out;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const std::string lp = path + ".levels[" + std::to_string(l) + "]";
        const json& cells = field(levels[l], "cells", lp);
        std::vector<HSetCell> level;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const std::string cp = lp + ".cells[" + std::to_string(i) + "]";
            const json& c = cells[i];
            HSetCell cell;
            const json& m = field(c, "m", cp);
            if (!m.is_array() || static_cast<int>(m.size()) != n) throw InvalidSpec(cp + ".m: expected n integers");
            for (int a = 0; a < n; ++a) cell.m[a] = m[static_cast<std::size_t>(a)].get<std::int64_t>();
            cell.parent = c.value("parent", std::int64_t{-1});
            const json& w = field(c, "weight", cp);
            cell.weight.num = field(w, "num", cp + ".weight").get<std::uint64_t>();
            const auto den = field(w, "den", cp + ".weight").get<std::uint64_t>();
            if (den == 0 || (den & (den - 1)) != 0) throw InvalidSpec(cp + ".weight.den: expected a power of two");
            int e = 0;
            while ((std::uint64_t{1} << e) != den) ++e;
            cell.weight.exp = e;
            level.push_back(cell);
        }
        out.push_back(std::move(level));
    }
    return HSetApprox(n, std::move(out));
}

json to_json(const DyadicCover& cover) {
    const int n = cover.n;
    json cubes = json::array();
    for (const BigCube& q : cover.big_cubes) {
        json grid = json::array();
        for (const CellIndex& m : q.stages[2]) grid.push_back(index_json(m, n));
        cubes.push_back({{"i", q.i},
                         {"block", index_json(q.block, n)},
                         {"stage_sizes", {q.stages[0].size(), q.stages[1].size(), q.stages[2].size()}},
                         {"grid_cubes", grid},
                         {"inner_ball", {{"center", point_json(q.center, n)}, {"radius", cover.inner_radius}}}});
    }
    return {{"j", cover.j},
            {"n", n},
            {"N_j", cover.count()},
            {"ball_radius", cover.ball_radius},
            {"grid_count", cover.grid_cubes.size()},
            {"duplicates_removed", cover.duplicates_removed},
            {"big_cubes", cubes}};
}

json to_json(const CoverCheck& check) {
    return {{"coverage", check.coverage},
            {"disjoint_inner_balls", check.disjoint_inner_balls},
            {"multiplicity", check.multiplicity},
            {"min_cubes", check.min_cubes},
            {"max_cubes", check.max_cubes}};
}

json to_json(const PartitionSupports& supports) {
    return {{"j", supports.j},
            {"functions", supports.entries.size()},
            {"derivative_budgets", supports.budgets},
            {"min_multiplicity", supports.min_multiplicity},
            {"max_multiplicity", supports.max_multiplicity},
            {"covers", supports.covers}};
}

json to_json(const AtomReport& r) {
    return {{"support_ok", r.support_ok},
            {"derivative_ratio", r.derivative_ratio},
            {"worst_alpha", {r.worst_alpha[0], r.worst_alpha[1]}},
            {"moment_max", r.moment_max},
            {"worst_beta", {r.worst_beta[0], r.worst_beta[1]}},
            {"moments_ok", r.moments_ok},
            {"resolution_ok", r.resolution_ok},
            {"fd_step", r.fd_step},
            {"valid", r.valid}};
}

json to_json(const Atom& a, int samples_per_axis) {
    const Box box = a.allowed_support();
    const auto xs = midpoint_nodes(box.lo[0], box.hi[0], samples_per_axis);
    json samples = json::array();
    if (a.n == 1) {
        for (double x : xs) samples.push_back(a({x, 0.0}));
    } else {
        const auto ys = midpoint_nodes(box.lo[1], box.hi[1], samples_per_axis);
        for (double x : xs) {
            json row = json::array();
            for (double y : ys) row.push_back(a({x, y}));
            samples.push_back(row);
        }
    }
    return {{"level", a.j},
            {"m", index_json(a.m, a.n)},
            {"b", a.b},
            {"terms", a.terms.size()},
            {"box", {{"lo", point_json(box.lo, a.n)}, {"hi", point_json(box.hi, a.n)}}},
            {"samples", samples}};
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add(const std::vector<double>& row) {
    if (row.size() != header_.size()) throw std::logic_error("CSV row width differs from header");
    rows_.push_back(row);
}

std::string CsvTable::str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ',';
        out += header_[i];
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace fractrace
