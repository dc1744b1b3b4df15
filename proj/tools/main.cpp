#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metadistill/diagnostics.hpp"
#include "metadistill/engine.hpp"
#include "metadistill/io.hpp"
#include "metadistill/reference_scenarios.hpp"
#include "metadistill/version.hpp"

namespace md = metadistill;
namespace fs = std::filesystem;

namespace {

int log_level() {
  const char* env = std::getenv("METADISTILL_LOG");
  if (env == nullptr) return 0;
  const std::string v(env);
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

void log_info(const std::string& message) {
  if (log_level() >= 1) std::cerr << "[metadistill] " << message << "\n";
}

std::string alpha_tag(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", alpha);
  return buf;
}

std::optional<md::ConvergenceSummary> try_summarize(const md::GenerationTrace& trace) {
  try {
    return md::summarize(trace);
  } catch (const md::Error&) {
    return std::nullopt;  // short or degenerate traces have no summary
  }
}

struct RunOutputs {
  bool csv = true;
  bool json = true;
  bool plot = false;
};

void emit_trace(const md::GenerationTrace& trace, const md::Scenario& scenario,
                const std::string& out_dir, const RunOutputs& outputs) {
  fs::create_directories(out_dir);
  const auto summary = try_summarize(trace);
  const std::string base = (fs::path(out_dir) / trace.label).string();
  if (outputs.csv) {
    md::write_trace(trace, summary, scenario, md::TraceFormat::Csv, base + ".csv");
    log_info("wrote " + base + ".csv");
  }
  if (outputs.json) {
    md::write_trace(trace, summary, scenario, md::TraceFormat::Json, base + ".json");
    log_info("wrote " + base + ".json");
  }
  if (outputs.plot) {
    md::render_plot({&trace}, base + ".svg");
    log_info("wrote " + base + ".svg");
  }
}

void print_trace_summary(const md::GenerationTrace& trace) {
  const auto summary = try_summarize(trace);
  std::printf("%s: %d generations, D(S_0)=%.9g, final D=%.9g, stop=%s, class=%s\n",
              trace.label.c_str(), trace.generations(), trace.baseline_divergence(),
              trace.final_divergence(), md::stop_reason_name(trace.stop_reason),
              summary ? md::trend_class_name(summary->classification) : "n/a");
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const std::string& format, bool plot, std::optional<std::uint64_t> seed) {
  md::Scenario scenario = md::load_scenario(scenario_path);
  if (seed) scenario.seed = *seed;
  log_info("running scenario '" + scenario.label + "'");
  const md::GenerationTrace trace = md::run(scenario);
  RunOutputs outputs;
  outputs.plot = plot;
  if (format == "csv") outputs.json = false;
  if (format == "json") outputs.csv = false;
  emit_trace(trace, scenario, out_dir, outputs);
  print_trace_summary(trace);
  return 0;
}

int cmd_check_axioms(const std::string& operator_path, int trials, std::uint64_t seed,
                     const std::string& out_path) {
  const md::OperatorConfig config = md::load_operator_config(operator_path);
  log_info("checking axioms: " + std::string(md::operator_kind_name(config.kind)) +
           ", trials=" + std::to_string(trials));
  const md::AxiomReport report = md::check_axioms(config, trials, seed);
  const std::string text = md::axiom_report_to_json(report).dump(2) + "\n";
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    md::write_text_file(out_path, text);
    log_info("wrote " + out_path);
  }
  return 0;
}

int cmd_sweep(const std::string& alpha_spec, const std::string& scenario_path,
              const std::string& out_dir) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  if (std::sscanf(alpha_spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0 ||
      lo <= 0.0 || hi > 1.0 || lo > hi) {
    md::throw_error(md::ErrorCode::ValidationError,
                    "--alpha expects lo:hi:step with 0 < lo <= hi <= 1 and step > 0");
  }
  const md::Scenario base = md::load_scenario(scenario_path);

  std::printf("%-8s %-14s %-14s %-12s %s\n", "alpha", "final_D", "ln_rate", "r_squared",
              "class");
  for (double alpha = lo; alpha <= hi + 1e-12; alpha += step) {
    md::Scenario scenario = base;
    scenario.op.alpha = std::min(alpha, 1.0);
    scenario.op.unanchored = false;
    scenario.label = base.label + "_alpha_" + alpha_tag(scenario.op.alpha);
    const md::GenerationTrace trace = md::run(scenario);
    const auto summary = try_summarize(trace);
    std::printf("%-8.3f %-14.6g %-14.6g %-12.6g %s\n", scenario.op.alpha,
                trace.final_divergence(), summary ? summary->geometric_fit.slope : NAN,
                summary ? summary->geometric_fit.r_squared : NAN,
                summary ? md::trend_class_name(summary->classification) : "n/a");
    if (!out_dir.empty()) {
      emit_trace(trace, scenario, out_dir, RunOutputs{});
    }
  }
  return 0;
}

struct ReproCheck {
  std::string name;
  bool ok;
};

int cmd_repro(const std::string& out_dir) {
  const md::Scenario anchored = md::reference_anchored_scenario();
  const md::Scenario drift = md::reference_drift_scenario();
  const md::GenerationTrace anchored_trace = md::run(anchored);
  const md::GenerationTrace drift_trace = md::run(drift);
  const auto anchored_summary = md::summarize(anchored_trace);
  const auto drift_summary = md::summarize(drift_trace);
  const double d0 = anchored_trace.baseline_divergence();

  std::vector<ReproCheck> checks;
  checks.push_back({"baseline D(S_0) = 0.396058 +- 1e-6",
                    std::abs(d0 - 0.396058) <= 1e-6});

  bool ratios_ok = true;
  for (const auto& row : anchored_trace.rows) {
    if (row.d_actual / d0 > std::pow(0.7, row.generation) + 1e-12) ratios_ok = false;
  }
  checks.push_back({"anchored: D(S_g)/D(S_0) <= 0.7^g for g = 0..10", ratios_ok});

  bool bound_ok = true;
  for (const auto& row : anchored_trace.rows) {
    if (row.d_bound != d0 * std::pow(0.7, row.generation)) bound_ok = false;
  }
  checks.push_back({"anchored: bound column equals 0.7^g * D(S_0) exactly", bound_ok});

  const double reference_ratios[][2] = {{2, 0.49}, {5, 0.168}, {10, 0.0282}};
  bool table_ok = true;
  for (const auto& pr : reference_ratios) {
    const int g = static_cast<int>(pr[0]);
    if (std::abs(anchored_trace.rows[g].d_bound / d0 - pr[1]) > 1e-4) table_ok = false;
  }
  checks.push_back({"anchored: bound ratios match the reference 0.49 / 0.168 / 0.0282", table_ok});

  checks.push_back(
      {"anchored: classified geometric_decay with ln-slope <= ln(0.7)",
       anchored_summary.classification == md::TrendClass::GeometricDecay &&
           anchored_summary.geometric_fit.slope <= std::log(0.7) + 1e-6});

  bool drift_ok = true;
  for (const auto& row : drift_trace.rows) {
    if (std::abs(row.d_actual - (d0 + 0.05 * row.generation)) > 1e-6) drift_ok = false;
  }
  checks.push_back({"drift: D(S_g) = D(S_0) + 0.05 g +- 1e-6 for g = 0..10", drift_ok});

  checks.push_back({"drift: classified linear_growth with slope 0.05 +- 1e-6",
                    drift_summary.classification == md::TrendClass::LinearGrowth &&
                        std::abs(drift_summary.linear_fit.slope - 0.05) <= 1e-6});

  // Reference table alongside computed values.
  std::printf("reference reproduction, 3-token vocabulary\n");
  std::printf("T0 = (0.6, 0.3, 0.1), S0 = (0.2, 0.5, 0.3)\n\n");
  std::printf("%-4s %-16s %-16s %-16s %-16s %-16s\n", "g", "drift(ref)", "drift(computed)",
              "anchored(ref)", "anchored(computed)", "bound 0.7^g*D0");
  const double reference_drift[] = {0.58, 0.68, 0.83, 1.08};
  const double reference_anchor[] = {0.58, 0.29, 0.10, 0.02};
  const int table_gs[] = {0, 2, 5, 10};
  for (int i = 0; i < 4; ++i) {
    const int g = table_gs[i];
    std::printf("%-4d %-16.2f %-16.6f %-16.2f %-16.6f %-16.6f\n", g, reference_drift[i],
                drift_trace.rows[g].d_actual, reference_anchor[i], anchored_trace.rows[g].d_actual,
                anchored_trace.rows[g].d_bound);
  }
  std::printf(
      "\nnote: the reference baseline ~0.584 does not match direct evaluation in either\n"
      "log base: KL(T0||S0) = %.6f nats = %.6f bits. This tool treats the computed\n"
      "value as ground truth; the table's *ratios* (0.7^g) are base-independent and are\n"
      "checked above.\n\n",
      d0, d0 / std::log(2.0));

  bool all_ok = true;
  for (const auto& check : checks) {
    std::printf("[%s] %s\n", check.ok ? "ok" : "MISMATCH", check.name.c_str());
    if (!check.ok) all_ok = false;
  }

  if (!out_dir.empty()) {
    emit_trace(anchored_trace, anchored, out_dir, RunOutputs{});
    emit_trace(drift_trace, drift, out_dir, RunOutputs{});
    md::render_plot({&anchored_trace, &drift_trace},
                    (fs::path(out_dir) / "appendix_a.svg").string());
    log_info("wrote " + (fs::path(out_dir) / "appendix_a.svg").string());
  }

  return all_ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metadistill: anchored recursive distillation laboratory"};
  app.set_version_flag("--version", md::kVersion);
  app.require_subcommand(1);

  std::string scenario_path, out_dir = ".", format = "both", operator_path, out_path,
              alpha_spec, sweep_out;
  bool plot = false;
  int trials = 1000;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> seed_override;

  auto* run_cmd = app.add_subcommand("run", "simulate a scenario and write its trace");
  run_cmd->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
  run_cmd->add_option("--format", format, "csv | json (default: both)")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  run_cmd->add_flag("--plot", plot, "also emit an SVG of D versus g");
  run_cmd->add_option("--seed", seed_override, "override the scenario seed");

  auto* check_cmd =
      app.add_subcommand("check-axioms", "certify an operator config against the axioms");
  check_cmd->add_option("operator", operator_path, "operator config JSON file")->required();
  check_cmd->add_option("--trials", trials, "random trials")->capture_default_str();
  check_cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
  check_cmd->add_option("--out", out_path, "write the report here instead of stdout");

  auto* sweep_cmd = app.add_subcommand("sweep", "grid over the anchor weight alpha");
  sweep_cmd->add_option("--alpha", alpha_spec, "grid spec lo:hi:step, e.g. 0.1:0.9:0.1")
      ->required();
  sweep_cmd->add_option("scenario", scenario_path, "scenario JSON file")->required();
  sweep_cmd->add_option("--out", sweep_out, "write per-alpha traces to this directory");

  std::string repro_out;
  auto* repro_cmd = app.add_subcommand(
      "repro-appendix-a", "run the bundled anchored and drift reference scenarios");
  repro_cmd->add_option("--out", repro_out, "also write traces and a comparison plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems are validation errors
  }

  try {
    if (run_cmd->parsed()) return cmd_run(scenario_path, out_dir, format, plot, seed_override);
    if (check_cmd->parsed()) return cmd_check_axioms(operator_path, trials, seed, out_path);
    if (sweep_cmd->parsed()) return cmd_sweep(alpha_spec, scenario_path, sweep_out);
    if (repro_cmd->parsed()) return cmd_repro(repro_out);
  } catch (const md::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return md::is_validation_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
