#pragma once

#include "fractrace/atoms.hpp"
#include "fractrace/cover.hpp"
#include "fractrace/dichotomy.hpp"
#include "fractrace/gauge.hpp"
#include "fractrace/hset.hpp"
#include "fractrace/seq.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fractrace {

using json = nlohmann::json;

/// Parses JSON text; syntax errors become InvalidSpec with "origin:line:column".
json parse_json_text(const std::string& text, const std::string& origin);

SeqSpec seq_from_json(const json& j, const std::string& path = "sigma");
json to_json(const SeqSpec& s);

GaugeSpec gauge_from_json(const json& j, const std::string& path = "gauge");
json to_json(const GaugeSpec& h);

/// Reads "s,xi" rows (header optional) into xi_integral nodes.
std::vector<std::pair<double, double>> xi_nodes_from_csv(const std::string& text, const std::string& origin);

json to_json(const Membership& m);
json to_json(const IndexReport& r);
json to_json(const Verdict& v);
json to_json(const Couple& c);

json to_json(const HSetApprox& set);
HSetApprox set_from_json(const json& j);

json to_json(const DyadicCover& cover);
json to_json(const CoverCheck& check);
json to_json(const PartitionSupports& supports);
json to_json(const AtomReport& r);
json to_json(const Atom& a, int samples_per_axis = 33);

/// CSV writer with a fixed header and %.17g numbers.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add(const std::vector<double>& row);
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

}  // namespace fractrace
