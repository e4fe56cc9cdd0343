#include "fractrace/commands.hpp"
#include "fractrace/errors.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;

namespace {

py::tuple run(const std::string& command, const std::string& args) {
    const auto parsed = fractrace::parse_json_text(args, "args");
    fractrace::CommandResult r;
    {
        py::gil_scoped_release release;
        r = fractrace::run_command(command, parsed);
    }
    return py::make_tuple(fractrace::render_json(r.document), r.csv, r.parameters.dump(), r.exit_code);
}

std::vector<std::string> commands() {
    std::vector<std::string> out;
    for (const auto& c : fractrace::command_table()) out.push_back(c.name);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "fractrace command layer";
    auto invalid = py::register_exception<fractrace::InvalidSpec>(m, "InvalidSpec", PyExc_ValueError);
    py::register_exception<fractrace::InfeasibleInput>(m, "InfeasibleInput", PyExc_RuntimeError);
    py::register_exception<fractrace::HypothesisRejected>(m, "HypothesisRejected", PyExc_RuntimeError);
    py::register_exception<fractrace::ResolutionError>(m, "ResolutionError", PyExc_RuntimeError);
    (void)invalid;
    m.def("run", &run, py::arg("command"), py::arg("args"),
          "Run a command on JSON arguments; returns (json, csv, parameters_json, exit_code).");
    m.def("commands", &commands);
    m.def("version", &fractrace::tool_version);
}
