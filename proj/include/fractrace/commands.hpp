#pragma once

#include "fractrace/io.hpp"

#include <string>
#include <vector>

namespace fractrace {

const char* tool_version();

enum class OptionKind { Number, Integer, Text, Gauge, Sequence, NumberList, IntegerList };

struct OptionSpec {
    std::string name;
    OptionKind kind = OptionKind::Number;
    bool required = false;
    std::string help;
};

struct CommandInfo {
    std::string name;
    std::string summary;
    std::vector<OptionSpec> options;
};

const std::vector<CommandInfo>& command_table();
const CommandInfo& command_info(const std::string& name);

// Knobs shared by every command; unused ones are ignored.
inline const std::vector<std::string> kGlobalKnobs{"seed", "jmax", "band", "tol"};

struct CommandResult {
    json document;
    std::string csv;       // empty when the command has no table
    json parameters;       // every argument actually used, defaults filled in
    int exit_code = 0;     // 0, or 3 when a checked property failed
};

/// Runs one command on JSON arguments. Throws InvalidSpec, InfeasibleInput,
/// HypothesisRejected or ResolutionError.
CommandResult run_command(const std::string& name, const json& args);

int exit_code_for(const std::exception& e);

/// Serialised forms, stable byte for byte.
std::string render_json(const json& doc);

}  // namespace fractrace
