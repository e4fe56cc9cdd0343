#include "fractrace/commands.hpp"
#include "fractrace/errors.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using fractrace::json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fractrace::InvalidSpec("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fractrace::InvalidSpec("cannot write " + path.string());
    out << text;
}

std::string sha256(const std::string& text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr);
    std::string hex;
    char byte[3];
    for (unsigned int i = 0; i < length; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", digest[i]);
        hex += byte;
    }
    return hex;
}

// xi_integral gauges may point at a CSV of (s, xi) rows instead of listing nodes.
void inline_xi_tables(json& spec, const fs::path& base) {
    if (spec.is_array()) {
        for (json& e : spec) inline_xi_tables(e, base);
        return;
    }
    if (!spec.is_object()) return;
    if (spec.value("family", "") == "xi_integral" && spec.contains("csv") && spec["csv"].is_string()) {
        const fs::path path = base / spec["csv"].get<std::string>();
        json nodes = json::array();
        for (const auto& [s, xi] : fractrace::xi_nodes_from_csv(read_file(path), path.string())) {
            nodes.push_back({s, xi});
        }
        spec.erase("csv");
        spec["nodes"] = nodes;
    }
    for (auto& [key, value] : spec.items()) inline_xi_tables(value, base);
}

json load_spec(const std::string& name, const std::string& text) {
    const auto start = text.find_first_not_of(" \t\r\n");
    json spec;
    fs::path base = fs::current_path();
    if (start != std::string::npos && text[start] == '{') {
        spec = fractrace::parse_json_text(text, "--" + name);
    } else {
        const fs::path path(text);
        spec = fractrace::parse_json_text(read_file(path), path.string());
        base = path.has_parent_path() ? path.parent_path() : fs::current_path();
    }
    inline_xi_tables(spec, base);
    return spec;
}

double parse_number(const std::string& name, const std::string& text) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || !std::isfinite(x)) {
        throw fractrace::InvalidSpec("--" + name + ": expected a finite number, got '" + text + "'");
    }
    return x;
}

std::int64_t parse_integer(const std::string& name, const std::string& text) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size()) throw fractrace::InvalidSpec("--" + name + ": expected an integer, got '" + text + "'");
    return x;
}

json parse_list(const std::string& name, const std::string& text, bool integers) {
    json out = json::array();
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        if (integers) {
            out.push_back(parse_integer(name, item));
        } else {
            out.push_back(parse_number(name, item));
        }
    }
    return out;
}

json convert(const fractrace::OptionSpec& o, const std::string& text) {
    using K = fractrace::OptionKind;
    switch (o.kind) {
        case K::Number: return parse_number(o.name, text);
        case K::Integer: return parse_integer(o.name, text);
        case K::Text: return text;
        case K::Gauge:
        case K::Sequence: return load_spec(o.name, text);
        case K::NumberList: return parse_list(o.name, text, false);
        case K::IntegerList: return parse_list(o.name, text, true);
    }
    return nullptr;
}

struct Outputs {
    std::string json_text;
    std::string csv_text;
    int exit_code = 0;
};

Outputs execute(const std::string& command, const json& args, json* parameters) {
    const fractrace::CommandResult r = fractrace::run_command(command, args);
    if (parameters) *parameters = r.parameters;
    return {fractrace::render_json(r.document), r.csv, r.exit_code};
}

fs::path csv_path_for(const std::string& out, const std::string& csv) {
    if (!csv.empty()) return csv;
    fs::path p(out);
    p.replace_extension(".csv");
    return p;
}

int run(const std::string& command, const json& args, const std::string& out, const std::string& csv) {
    json parameters;
    const Outputs o = execute(command, args, &parameters);
    if (out.empty()) {
        std::cout << o.json_text;
        if (!csv.empty() && !o.csv_text.empty()) write_file(csv, o.csv_text);
        return o.exit_code;
    }
    write_file(out, o.json_text);
    json outputs = json::array({{{"kind", "json"}, {"path", out}, {"sha256", sha256(o.json_text)}}});
    if (!o.csv_text.empty()) {
        const fs::path path = csv_path_for(out, csv);
        write_file(path, o.csv_text);
        outputs.push_back({{"kind", "csv"}, {"path", path.string()}, {"sha256", sha256(o.csv_text)}});
    }
    const json manifest{{"command", command},
                        {"args", parameters},
                        {"tool_version", fractrace::tool_version()},
                        {"exit_code", o.exit_code},
                        {"outputs", outputs}};
    write_file(out + ".manifest.json", fractrace::render_json(manifest));
    return o.exit_code;
}

int replay(const std::string& manifest_path, const std::string& out) {
    const json manifest = fractrace::parse_json_text(read_file(manifest_path), manifest_path);
    if (!manifest.contains("command") || !manifest.contains("args") || !manifest.contains("outputs")) {
        throw fractrace::InvalidSpec(manifest_path + ": not a run manifest");
    }
    const std::string command = manifest["command"].get<std::string>();
    const Outputs o = execute(command, manifest["args"], nullptr);
    bool same = true;
    for (const json& entry : manifest["outputs"]) {
        const std::string kind = entry.at("kind").get<std::string>();
        const std::string& text = kind == "csv" ? o.csv_text : o.json_text;
        const bool match = sha256(text) == entry.at("sha256").get<std::string>();
        std::cout << kind << " " << entry.at("path").get<std::string>() << ": " << (match ? "identical" : "DIFFERS")
                  << "\n";
        same = same && match;
    }
    if (!out.empty()) {
        write_file(out, o.json_text);
        if (!o.csv_text.empty()) write_file(csv_path_for(out, ""), o.csv_text);
    }
    return same ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractrace: traces of generalized smoothness spaces on h-sets"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(fractrace::tool_version()));

    std::string out;
    std::string csv;
    std::map<std::string, std::string> globals;
    app.add_option("--out", out, "write JSON here (plus a .manifest.json next to it)");
    app.add_option("--csv", csv, "CSV path (default: --out with a .csv extension)");
    app.add_option("--seed", globals["seed"], "seed for sampled checks");
    app.add_option("--jmax", globals["jmax"], "truncation level");
    app.add_option("--band", globals["band"], "allowed max/min ratio");
    app.add_option("--tol", globals["tol"], "numeric tolerance");

    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, CLI::App*> subs;
    for (const fractrace::CommandInfo& info : fractrace::command_table()) {
        CLI::App* sub = app.add_subcommand(info.name, info.summary);
        subs[info.name] = sub;
        for (const fractrace::OptionSpec& o : info.options) {
            sub->add_option("--" + o.name, values[info.name][o.name], o.help + (o.required ? " [required]" : ""));
        }
    }
    std::string manifest;
    CLI::App* replay_cmd = app.add_subcommand("replay", "re-run a manifest and compare output digests");
    replay_cmd->add_option("manifest", manifest, "manifest file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (replay_cmd->parsed()) return replay(manifest, out);
        for (const fractrace::CommandInfo& info : fractrace::command_table()) {
            CLI::App* sub = subs[info.name];
            if (!sub->parsed()) continue;
            json args = json::object();
            for (const fractrace::OptionSpec& o : info.options) {
                if (sub->count("--" + o.name) > 0) args[o.name] = convert(o, values[info.name][o.name]);
            }
            using K = fractrace::OptionKind;
            const std::map<std::string, K> global_kinds{
                {"seed", K::Integer}, {"jmax", K::Integer}, {"band", K::Number}, {"tol", K::Number}};
            for (const auto& [name, kind] : global_kinds) {
                if (app.count("--" + name) > 0) args[name] = convert({name, kind, false, ""}, globals[name]);
            }
            return run(info.name, args, out, csv);
        }
    } catch (const std::exception& e) {
        std::cerr << "fractrace: " << e.what() << "\n";
        return fractrace::exit_code_for(e);
    }
    return 2;
}
