#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metadistill/axioms.hpp"
#include "metadistill/diagnostics.hpp"
#include "metadistill/engine.hpp"

namespace metadistill {

using json = nlohmann::json;

enum class TraceFormat { Csv, Json };

// ---- files ----------------------------------------------------------------

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);  // LF, UTF-8

/// Parses JSON text; parse failures carry 1-based line/column positions.
json parse_json_text(const std::string& text, const std::string& origin);

// ---- scenario / config codecs ---------------------------------------------

OperatorConfig operator_config_from_json(const json& j, const std::string& path = "operator");
json operator_config_to_json(const OperatorConfig& config);

ScheduleConfig schedule_from_json(const json& j, const std::string& path = "schedule");
json schedule_to_json(const ScheduleConfig& schedule);

NoiseModel noise_from_json(const json& j, const std::string& path = "noise");
json noise_to_json(const NoiseModel& noise);

Scenario scenario_from_json(const json& j, const std::string& default_label = "");
json scenario_to_json(const Scenario& scenario);

/// Loads and fully validates a scenario file. Errors: ParseError (line/col),
/// ValidationError (field path + reason), UnanchoredWithoutFlag.
Scenario load_scenario(const std::string& path);

/// Loads an operator config file for `check-axioms`.
OperatorConfig load_operator_config(const std::string& path);

// ---- trace / report serialization -------------------------------------------

json trace_to_json(const GenerationTrace& trace,
                   const std::optional<ConvergenceSummary>& diagnostics,
                   const std::optional<Scenario>& scenario_echo);
GenerationTrace trace_from_json(const json& j);

json summary_to_json(const ConvergenceSummary& summary);

std::string trace_to_csv(const GenerationTrace& trace);

/// Writes one trace in the requested format; output is byte-deterministic
/// for a fixed trace (floats at 17 significant digits, LF endings).
void write_trace(const GenerationTrace& trace,
                 const std::optional<ConvergenceSummary>& diagnostics,
                 const std::optional<Scenario>& scenario_echo, TraceFormat format,
                 const std::string& path);

json axiom_report_to_json(const AxiomReport& report);
Counterexample counterexample_from_json(const json& j);

// ---- plotting ----------------------------------------------------------------

/// Self-contained SVG line chart of D versus g, one polyline per trace,
/// linear axes, legend from trace labels.
std::string render_plot_svg(const std::vector<const GenerationTrace*>& traces);
void render_plot(const std::vector<const GenerationTrace*>& traces, const std::string& path);

}  // namespace metadistill
