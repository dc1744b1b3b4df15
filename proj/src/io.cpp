#include "metadistill/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "metadistill/version.hpp"

namespace metadistill {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json number_or_null(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

double number_from(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

[[noreturn]] void fail(const std::string& path, const std::string& reason) {
  throw_error(ErrorCode::ValidationError, path + ": " + reason);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  return *it;
}

double require_number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

int require_int(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

std::string require_string(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::uint64_t optional_u64(const json& obj, const std::string& key, const std::string& path,
                           std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) fail(path + "." + key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::vector<double> number_array(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) fail(path, "expected a number array");
    out.push_back(x.get<double>());
  }
  return out;
}

/// Runs `fn`, rewriting any library Error into a ValidationError carrying the
/// field path. UnanchoredWithoutFlag keeps its own code (the CLI and tests
/// distinguish it), but still gains the path prefix.
template <typename Fn>
auto at_path(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnanchoredWithoutFlag) {
      throw Error(ErrorCode::UnanchoredWithoutFlag, path + ": " + e.message());
    }
    throw Error(ErrorCode::ValidationError, path + ": " + e.what());
  }
}

Distribution distribution_from(const json& v, const std::string& path,
                               std::size_t expected_vocab = 0) {
  auto probs = number_array(v, path);
  if (expected_vocab != 0 && probs.size() != expected_vocab) {
    fail(path, "expected " + std::to_string(expected_vocab) + " entries, got " +
                   std::to_string(probs.size()));
  }
  return at_path(path, [&] { return Distribution::from_probabilities(std::move(probs)); });
}

}  // namespace

// ---- files ----------------------------------------------------------------

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) throw_error(ErrorCode::IoError, "read failure on '" + path + "'");
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw_error(ErrorCode::IoError, "write failure on '" + path + "'");
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min(e.byte, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw_error(ErrorCode::ParseError, origin + ":" + std::to_string(line) + ":" +
                                           std::to_string(col) + ": " + e.what());
  }
}

// ---- operator / schedule / noise codecs ------------------------------------

OperatorConfig operator_config_from_json(const json& j, const std::string& path) {
  OperatorConfig config;
  config.kind = at_path(path + ".kind",
                        [&] { return operator_kind_from_name(require_string(j, "kind", path)); });
  config.alpha = require_number(j, "alpha", path);
  if (j.contains("teacher_weights")) {
    config.teacher_weights = number_array(j.at("teacher_weights"), path + ".teacher_weights");
  }
  if (j.contains("unanchored")) {
    if (!j.at("unanchored").is_boolean()) fail(path + ".unanchored", "expected a boolean");
    config.unanchored = j.at("unanchored").get<bool>();
  }
  if (j.contains("generation_weight_scheme")) {
    const json& s = j.at("generation_weight_scheme");
    const std::string spath = path + ".generation_weight_scheme";
    const std::string kind = require_string(s, "kind", spath);
    if (kind == "recency") {
      config.generation_scheme = GenerationWeightScheme::recency(require_int(s, "window", spath));
    } else if (kind == "exponential_decay") {
      config.generation_scheme =
          GenerationWeightScheme::exponential_decay(require_number(s, "rate", spath));
    } else if (kind == "explicit") {
      config.generation_scheme = GenerationWeightScheme::explicit_weights_of(
          number_array(require(s, "weights", spath), spath + ".weights"));
    } else {
      fail(spath + ".kind", "unknown scheme '" + kind + "'");
    }
  }
  at_path(path, [&] { config.validate(); });
  return config;
}

json operator_config_to_json(const OperatorConfig& config) {
  json scheme;
  switch (config.generation_scheme.kind) {
    case GenerationWeightScheme::Kind::Recency:
      scheme = {{"kind", "recency"}, {"window", config.generation_scheme.window}};
      break;
    case GenerationWeightScheme::Kind::ExponentialDecay:
      scheme = {{"kind", "exponential_decay"}, {"rate", config.generation_scheme.decay_rate}};
      break;
    case GenerationWeightScheme::Kind::Explicit:
      scheme = {{"kind", "explicit"}, {"weights", config.generation_scheme.explicit_weights}};
      break;
  }
  return json{{"kind", operator_kind_name(config.kind)},
              {"alpha", config.alpha},
              {"teacher_weights", config.teacher_weights},
              {"generation_weight_scheme", scheme},
              {"unanchored", config.unanchored}};
}

ScheduleConfig schedule_from_json(const json& j, const std::string& path) {
  const std::string kind = require_string(j, "kind", path);
  ScheduleConfig schedule;
  if (kind == "constant") {
    schedule = ScheduleConfig::constant();
    if (j.contains("alpha")) schedule.constant_alpha = require_number(j, "alpha", path);
  } else if (kind == "linear") {
    schedule = ScheduleConfig::linear(require_number(j, "from", path),
                                      require_number(j, "to", path),
                                      require_int(j, "over_generations", path));
  } else if (kind == "adaptive") {
    schedule = ScheduleConfig::adaptive(require_number(j, "increase_factor", path),
                                        require_number(j, "trigger_ratio", path));
  } else {
    fail(path + ".kind", "unknown schedule '" + kind + "'");
  }
  at_path(path, [&] { schedule.validate(); });
  return schedule;
}

json schedule_to_json(const ScheduleConfig& schedule) {
  switch (schedule.kind) {
    case ScheduleConfig::Kind::Constant: {
      json j{{"kind", "constant"}};
      if (schedule.constant_alpha) j["alpha"] = *schedule.constant_alpha;
      return j;
    }
    case ScheduleConfig::Kind::Linear:
      return json{{"kind", "linear"},
                  {"from", schedule.from},
                  {"to", schedule.to},
                  {"over_generations", schedule.over_generations}};
    case ScheduleConfig::Kind::Adaptive:
      return json{{"kind", "adaptive"},
                  {"increase_factor", schedule.increase_factor},
                  {"trigger_ratio", schedule.trigger_ratio}};
  }
  return json{{"kind", "constant"}};
}

namespace {

void read_distractor(const json& j, const std::string& path, NoiseModel& noise) {
  const json& d = require(j, "distractor", path);
  if (d.is_string()) {
    if (d.get<std::string>() != "seeded_random") {
      fail(path + ".distractor", "expected a distribution or \"seeded_random\"");
    }
    noise.distractor.reset();
  } else {
    noise.distractor = distribution_from(d, path + ".distractor");
  }
}

}  // namespace

NoiseModel noise_from_json(const json& j, const std::string& path) {
  NoiseModel noise;
  noise.kind = at_path(path + ".kind",
                       [&] { return noise_kind_from_name(require_string(j, "kind", path)); });
  noise.seed = optional_u64(j, "seed", path, 0);
  switch (noise.kind) {
    case NoiseKind::None:
      break;
    case NoiseKind::ArithmeticDistractor:
      noise.delta = require_number(j, "delta", path);
      read_distractor(j, path, noise);
      break;
    case NoiseKind::GeometricTilt:
      noise.target_kl = require_number(j, "target_kl", path);
      if (j.contains("direction")) {
        const json& d = j.at("direction");
        if (!d.is_string() || d.get<std::string>() != "seeded_random") {
          fail(path + ".direction", "only \"seeded_random\" directions are supported");
        }
      }
      break;
    case NoiseKind::CalibratedDrift:
      noise.epsilon = require_number(j, "epsilon", path);
      read_distractor(j, path, noise);
      break;
  }
  return noise;
}

json noise_to_json(const NoiseModel& noise) {
  json j{{"kind", noise_kind_name(noise.kind)}, {"seed", noise.seed}};
  switch (noise.kind) {
    case NoiseKind::None:
      break;
    case NoiseKind::ArithmeticDistractor:
      j["delta"] = noise.delta;
      j["distractor"] = noise.distractor ? json(noise.distractor->probs()) : json("seeded_random");
      break;
    case NoiseKind::GeometricTilt:
      j["target_kl"] = noise.target_kl;
      j["direction"] = "seeded_random";
      break;
    case NoiseKind::CalibratedDrift:
      j["epsilon"] = noise.epsilon;
      j["distractor"] = noise.distractor ? json(noise.distractor->probs()) : json("seeded_random");
      break;
  }
  return j;
}

// ---- scenario ----------------------------------------------------------------

Scenario scenario_from_json(const json& j, const std::string& default_label) {
  if (!j.is_object()) fail("scenario", "expected a JSON object");
  const int vocab_size = require_int(j, "vocab_size", "scenario");
  if (vocab_size < 2) fail("scenario.vocab_size", "must be >= 2");
  const std::size_t vocab = static_cast<std::size_t>(vocab_size);

  const json& contexts = require(j, "contexts", "scenario");
  if (!contexts.is_array() || contexts.empty()) {
    fail("scenario.contexts", "expected a non-empty array");
  }

  std::vector<ConditionalModel::Context> teacher_ctx, student_ctx;
  for (std::size_t x = 0; x < contexts.size(); ++x) {
    const std::string cpath = "scenario.contexts[" + std::to_string(x) + "]";
    const json& c = contexts[x];
    const double weight = require_number(c, "weight", cpath);
    teacher_ctx.push_back(ConditionalModel::Context{
        weight, distribution_from(require(c, "teacher", cpath), cpath + ".teacher", vocab)});
    student_ctx.push_back(ConditionalModel::Context{
        weight, distribution_from(require(c, "student0", cpath), cpath + ".student0", vocab)});
  }

  std::vector<ConditionalModel> extra_teachers;
  if (j.contains("extra_teachers")) {
    const json& extras = j.at("extra_teachers");
    if (!extras.is_array()) fail("scenario.extra_teachers", "expected an array");
    for (std::size_t k = 0; k < extras.size(); ++k) {
      const std::string tpath = "scenario.extra_teachers[" + std::to_string(k) + "]";
      const json& per_ctx = extras[k];
      if (!per_ctx.is_array() || per_ctx.size() != contexts.size()) {
        fail(tpath, "expected one distribution per context");
      }
      std::vector<ConditionalModel::Context> ctx;
      for (std::size_t x = 0; x < per_ctx.size(); ++x) {
        ctx.push_back(ConditionalModel::Context{
            teacher_ctx[x].weight,
            distribution_from(per_ctx[x], tpath + "[" + std::to_string(x) + "]", vocab)});
      }
      extra_teachers.push_back(at_path(
          tpath, [&] { return ConditionalModel::from_contexts(std::move(ctx)); }));
    }
  }

  bool unanchored = false;
  if (j.contains("unanchored")) {
    if (!j.at("unanchored").is_boolean()) fail("scenario.unanchored", "expected a boolean");
    unanchored = j.at("unanchored").get<bool>();
  }

  json op_json = require(j, "operator", "scenario");
  if (unanchored && op_json.is_object() && !op_json.contains("unanchored")) {
    op_json["unanchored"] = true;
  }
  OperatorConfig op = operator_config_from_json(op_json, "scenario.operator");

  ScheduleConfig schedule = ScheduleConfig::constant();
  if (j.contains("schedule")) schedule = schedule_from_json(j.at("schedule"), "scenario.schedule");

  NoiseModel noise;
  if (j.contains("noise")) noise = noise_from_json(j.at("noise"), "scenario.noise");

  DivergenceKind divergence = DivergenceKind::KL;
  if (j.contains("divergence")) {
    divergence = at_path("scenario.divergence", [&] {
      return divergence_kind_from_name(require_string(j, "divergence", "scenario"));
    });
  }

  const int max_generations = require_int(j, "max_generations", "scenario");

  const json& stop_json = require(j, "stop", "scenario");
  StopCriteria stop;
  stop.improvement_tol = require_number(stop_json, "improvement_tol", "scenario.stop");
  stop.max_generations = stop_json.contains("max_generations")
                             ? require_int(stop_json, "max_generations", "scenario.stop")
                             : max_generations;

  const std::uint64_t seed = optional_u64(j, "seed", "scenario", 0);

  std::string label = default_label;
  if (j.contains("label")) label = require_string(j, "label", "scenario");

  Scenario scenario{at_path("scenario.contexts",
                            [&] { return ConditionalModel::from_contexts(std::move(teacher_ctx)); }),
                    std::move(extra_teachers),
                    at_path("scenario.contexts",
                            [&] { return ConditionalModel::from_contexts(std::move(student_ctx)); }),
                    std::move(op),
                    schedule,
                    std::move(noise),
                    divergence,
                    max_generations,
                    stop,
                    seed,
                    std::move(label)};
  at_path("scenario", [&] { scenario.validate(); });
  return scenario;
}

json scenario_to_json(const Scenario& scenario) {
  json contexts = json::array();
  for (std::size_t x = 0; x < scenario.teacher.context_count(); ++x) {
    contexts.push_back(json{{"weight", scenario.teacher.context(x).weight},
                            {"teacher", scenario.teacher.context(x).dist.probs()},
                            {"student0", scenario.student0.context(x).dist.probs()}});
  }
  json extras = json::array();
  for (const auto& t : scenario.extra_teachers) {
    json per_ctx = json::array();
    for (std::size_t x = 0; x < t.context_count(); ++x) per_ctx.push_back(t.context(x).dist.probs());
    extras.push_back(per_ctx);
  }
  return json{{"vocab_size", scenario.teacher.vocab_size()},
              {"contexts", contexts},
              {"extra_teachers", extras},
              {"operator", operator_config_to_json(scenario.op)},
              {"schedule", schedule_to_json(scenario.schedule)},
              {"noise", noise_to_json(scenario.noise)},
              {"divergence", divergence_kind_name(scenario.divergence)},
              {"max_generations", scenario.max_generations},
              {"stop", json{{"improvement_tol", scenario.stop.improvement_tol},
                            {"max_generations", scenario.stop.max_generations}}},
              {"seed", scenario.seed},
              {"unanchored", scenario.op.unanchored},
              {"label", scenario.label}};
}

namespace {

std::string path_stem(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  const std::size_t start = slash == std::string::npos ? 0 : slash + 1;
  const std::size_t dot = path.find_last_of('.');
  const std::size_t end = (dot == std::string::npos || dot < start) ? path.size() : dot;
  return path.substr(start, end - start);
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  const std::string text = read_text_file(path);
  const json j = parse_json_text(text, path);
  return scenario_from_json(j, path_stem(path));
}

OperatorConfig load_operator_config(const std::string& path) {
  const std::string text = read_text_file(path);
  const json j = parse_json_text(text, path);
  return operator_config_from_json(j, "operator");
}

// ---- trace serialization ------------------------------------------------------

namespace {

json model_to_json(const ConditionalModel& model) {
  json out = json::array();
  for (std::size_t x = 0; x < model.context_count(); ++x) {
    out.push_back(json{{"weight", model.context(x).weight},
                       {"probs", model.context(x).dist.probs()}});
  }
  return out;
}

ConditionalModel model_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of contexts");
  std::vector<ConditionalModel::Context> ctx;
  for (std::size_t x = 0; x < j.size(); ++x) {
    const std::string cpath = path + "[" + std::to_string(x) + "]";
    ctx.push_back(ConditionalModel::Context{
        require_number(j[x], "weight", cpath),
        distribution_from(require(j[x], "probs", cpath), cpath + ".probs")});
  }
  return at_path(path, [&] { return ConditionalModel::from_contexts(std::move(ctx)); });
}

}  // namespace

json summary_to_json(const ConvergenceSummary& summary) {
  json betas = json::array();
  for (const auto& b : summary.beta_hat_series) {
    betas.push_back(b ? json(*b) : json(nullptr));
  }
  const auto fit_json = [](const LineFit& f) {
    return json{{"slope", f.slope},
                {"intercept", f.intercept},
                {"r_squared", f.r_squared},
                {"points", f.points}};
  };
  return json{{"classification", trend_class_name(summary.classification)},
              {"beta_hat_series", betas},
              {"geometric_fit", fit_json(summary.geometric_fit)},
              {"linear_fit", fit_json(summary.linear_fit)},
              {"noise_bound_violation_rate", summary.noise_bound_violation_rate
                                                 ? json(*summary.noise_bound_violation_rate)
                                                 : json(nullptr)}};
}

json trace_to_json(const GenerationTrace& trace,
                   const std::optional<ConvergenceSummary>& diagnostics,
                   const std::optional<Scenario>& scenario_echo) {
  json generations = json::array();
  for (const auto& row : trace.rows) {
    json r{{"g", row.generation},
           {"alpha", row.alpha},
           {"d_actual", row.d_actual},
           {"d_bound", row.d_bound},
           {"beta_hat", row.beta_hat ? json(*row.beta_hat) : json(nullptr)},
           {"step_noise_kl", row.step_noise_kl ? json(*row.step_noise_kl) : json(nullptr)},
           {"meta_teacher", row.meta_teacher ? model_to_json(*row.meta_teacher) : json(nullptr)},
           {"next_student", row.next_student ? model_to_json(*row.next_student) : json(nullptr)}};
    generations.push_back(std::move(r));
  }
  return json{{"tool", kToolName},
              {"version", kVersion},
              {"label", trace.label},
              {"seed", trace.seed},
              {"divergence", divergence_kind_name(trace.divergence)},
              {"stop_reason", stop_reason_name(trace.stop_reason)},
              {"generations", generations},
              {"scenario", scenario_echo ? scenario_to_json(*scenario_echo) : json(nullptr)},
              {"diagnostics", diagnostics ? summary_to_json(*diagnostics) : json(nullptr)}};
}

GenerationTrace trace_from_json(const json& j) {
  GenerationTrace trace;
  trace.label = require_string(j, "label", "trace");
  trace.seed = require(j, "seed", "trace").get<std::uint64_t>();
  trace.divergence = divergence_kind_from_name(require_string(j, "divergence", "trace"));
  const std::string reason = require_string(j, "stop_reason", "trace");
  if (reason == "max_generations") {
    trace.stop_reason = StopReason::MaxGenerations;
  } else if (reason == "diminished_improvement") {
    trace.stop_reason = StopReason::DiminishedImprovement;
  } else {
    fail("trace.stop_reason", "unknown stop reason '" + reason + "'");
  }
  const json& generations = require(j, "generations", "trace");
  if (!generations.is_array() || generations.empty()) {
    fail("trace.generations", "expected a non-empty array");
  }
  for (std::size_t g = 0; g < generations.size(); ++g) {
    const std::string rpath = "trace.generations[" + std::to_string(g) + "]";
    const json& r = generations[g];
    StepRecord row;
    row.generation = require_int(r, "g", rpath);
    row.alpha = require_number(r, "alpha", rpath);
    row.d_actual = require_number(r, "d_actual", rpath);
    row.d_bound = require_number(r, "d_bound", rpath);
    if (!require(r, "beta_hat", rpath).is_null()) row.beta_hat = r.at("beta_hat").get<double>();
    if (!require(r, "step_noise_kl", rpath).is_null()) {
      row.step_noise_kl = r.at("step_noise_kl").get<double>();
    }
    if (!require(r, "meta_teacher", rpath).is_null()) {
      row.meta_teacher = model_from_json(r.at("meta_teacher"), rpath + ".meta_teacher");
    }
    if (!require(r, "next_student", rpath).is_null()) {
      row.next_student = model_from_json(r.at("next_student"), rpath + ".next_student");
    }
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

std::string trace_to_csv(const GenerationTrace& trace) {
  std::string out = "g,alpha_g,D_actual,D_bound,beta_hat,step_noise_kl,stop_reason\n";
  for (std::size_t g = 0; g < trace.rows.size(); ++g) {
    const auto& row = trace.rows[g];
    out += std::to_string(row.generation);
    out += ',';
    out += fmt17(row.alpha);
    out += ',';
    out += fmt17(row.d_actual);
    out += ',';
    out += fmt17(row.d_bound);
    out += ',';
    if (row.beta_hat) out += fmt17(*row.beta_hat);
    out += ',';
    if (row.step_noise_kl) out += fmt17(*row.step_noise_kl);
    out += ',';
    if (g + 1 == trace.rows.size()) out += stop_reason_name(trace.stop_reason);
    out += '\n';
  }
  return out;
}

void write_trace(const GenerationTrace& trace,
                 const std::optional<ConvergenceSummary>& diagnostics,
                 const std::optional<Scenario>& scenario_echo, TraceFormat format,
                 const std::string& path) {
  if (format == TraceFormat::Csv) {
    write_text_file(path, trace_to_csv(trace));
  } else {
    write_text_file(path, trace_to_json(trace, diagnostics, scenario_echo).dump(2) + "\n");
  }
}

// ---- axiom report ----------------------------------------------------------

namespace {

json counterexample_to_json(const Counterexample& ce) {
  return json{{"axiom", ce.axiom},
              {"trial_index", ce.trial_index},
              {"trial_seed", ce.trial_seed},
              {"vocab", ce.vocab},
              {"alpha", ce.alpha},
              {"alpha2", ce.alpha2},
              {"teachers", ce.teachers},
              {"students", ce.students},
              {"teachers_perturbed", ce.teachers_perturbed},
              {"students_perturbed", ce.students_perturbed},
              {"output", ce.output},
              {"output2", ce.output2},
              {"observed", number_or_null(ce.observed)},
              {"threshold", ce.threshold},
              {"message", ce.message}};
}

json axiom_check_to_json(const AxiomCheck& check) {
  json ces = json::array();
  for (const auto& ce : check.counterexamples) ces.push_back(counterexample_to_json(ce));
  return json{{"status", axiom_status_name(check.status)},
              {"trials", check.trials},
              {"violations", check.violations},
              {"counterexamples", ces}};
}

}  // namespace

json axiom_report_to_json(const AxiomReport& report) {
  return json{{"operator", operator_config_to_json(report.config)},
              {"trials", report.trials},
              {"seed", report.seed},
              {"effective_anchor_min", number_or_null(report.effective_anchor_min)},
              {"general_anchor_min", number_or_null(report.general_anchor_min)},
              {"continuity_ratio_max", number_or_null(report.continuity_ratio_max)},
              {"all_pass_or_measured", report.all_pass_or_measured()},
              {"axioms", json{{"axiom1_validity", axiom_check_to_json(report.validity)},
                              {"axiom2_positivity", axiom_check_to_json(report.positivity)},
                              {"axiom3_anchoring", axiom_check_to_json(report.anchoring)},
                              {"axiom4_continuity", axiom_check_to_json(report.continuity)},
                              {"axiom5_monotonicity", axiom_check_to_json(report.monotonicity)}}}};
}

Counterexample counterexample_from_json(const json& j) {
  Counterexample ce;
  ce.axiom = require_int(j, "axiom", "counterexample");
  ce.trial_index = require_int(j, "trial_index", "counterexample");
  ce.trial_seed = require(j, "trial_seed", "counterexample").get<std::uint64_t>();
  ce.vocab = require(j, "vocab", "counterexample").get<std::size_t>();
  ce.alpha = require_number(j, "alpha", "counterexample");
  ce.alpha2 = require_number(j, "alpha2", "counterexample");
  ce.teachers = require(j, "teachers", "counterexample").get<std::vector<std::vector<double>>>();
  ce.students = require(j, "students", "counterexample").get<std::vector<std::vector<double>>>();
  ce.teachers_perturbed =
      require(j, "teachers_perturbed", "counterexample").get<std::vector<std::vector<double>>>();
  ce.students_perturbed =
      require(j, "students_perturbed", "counterexample").get<std::vector<std::vector<double>>>();
  ce.output = require(j, "output", "counterexample").get<std::vector<double>>();
  ce.output2 = require(j, "output2", "counterexample").get<std::vector<double>>();
  ce.observed = number_from(require(j, "observed", "counterexample"));
  ce.threshold = require_number(j, "threshold", "counterexample");
  ce.message = require_string(j, "message", "counterexample");
  return ce;
}

// ---- plotting ----------------------------------------------------------------

namespace {

constexpr double kPlotWidth = 720.0;
constexpr double kPlotHeight = 460.0;
constexpr double kMarginLeft = 76.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 24.0;
constexpr double kMarginBottom = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

std::string fmt_tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_plot_svg(const std::vector<const GenerationTrace*>& traces) {
  if (traces.empty()) throw_error(ErrorCode::NoTraces, "no traces to plot");

  double max_g = 1.0, max_d = 0.0;
  for (const auto* t : traces) {
    max_g = std::max(max_g, static_cast<double>(t->generations()));
    for (const auto& row : t->rows) max_d = std::max(max_d, row.d_actual);
  }
  if (max_d <= 0.0) max_d = 1.0;
  const double y_top = max_d * 1.05;
  const double plot_w = kPlotWidth - kMarginLeft - kMarginRight;
  const double plot_h = kPlotHeight - kMarginTop - kMarginBottom;
  const auto x_of = [&](double g) { return kMarginLeft + g / max_g * plot_w; };
  const auto y_of = [&](double d) { return kPlotHeight - kMarginBottom - d / y_top * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(kPlotWidth) +
         "\" height=\"" + fmt2(kPlotHeight) + "\" viewBox=\"0 0 " + fmt2(kPlotWidth) + " " +
         fmt2(kPlotHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // grid and ticks
  for (int i = 0; i <= 5; ++i) {
    const double gx = max_g * i / 5.0;
    const double dy = y_top * i / 5.0;
    svg += "<line x1=\"" + fmt2(x_of(gx)) + "\" y1=\"" + fmt2(y_of(0)) + "\" x2=\"" +
           fmt2(x_of(gx)) + "\" y2=\"" + fmt2(y_of(y_top)) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + fmt2(x_of(0)) + "\" y1=\"" + fmt2(y_of(dy)) + "\" x2=\"" +
           fmt2(x_of(max_g)) + "\" y2=\"" + fmt2(y_of(dy)) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + fmt2(x_of(gx)) + "\" y=\"" + fmt2(kPlotHeight - kMarginBottom + 18) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
           fmt_tick(gx) + "</text>\n";
    svg += "<text x=\"" + fmt2(kMarginLeft - 8) + "\" y=\"" + fmt2(y_of(dy) + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" +
           fmt_tick(dy) + "</text>\n";
  }

  // axes
  svg += "<line x1=\"" + fmt2(x_of(0)) + "\" y1=\"" + fmt2(y_of(0)) + "\" x2=\"" +
         fmt2(x_of(max_g)) + "\" y2=\"" + fmt2(y_of(0)) +
         "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  svg += "<line x1=\"" + fmt2(x_of(0)) + "\" y1=\"" + fmt2(y_of(0)) + "\" x2=\"" +
         fmt2(x_of(0)) + "\" y2=\"" + fmt2(y_of(y_top)) +
         "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  svg += "<text x=\"" + fmt2(kMarginLeft + plot_w / 2) + "\" y=\"" +
         fmt2(kPlotHeight - 14) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">generation g"
         "</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt2(kMarginTop + plot_h / 2) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         fmt2(kMarginTop + plot_h / 2) + ")\">divergence D(S_g)</text>\n";

  // polylines
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const char* color = kPalette[t % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (traces[t]->rows.size() == 1) {
      const auto& row = traces[t]->rows.front();
      svg += "<circle cx=\"" + fmt2(x_of(row.generation)) + "\" cy=\"" +
             fmt2(y_of(row.d_actual)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
      continue;
    }
    std::string points;
    for (const auto& row : traces[t]->rows) {
      points += fmt2(x_of(row.generation)) + "," + fmt2(y_of(row.d_actual)) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
  }

  // legend
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const char* color = kPalette[t % (sizeof(kPalette) / sizeof(kPalette[0]))];
    const double ly = kMarginTop + 14.0 + 18.0 * static_cast<double>(t);
    const double lx = kPlotWidth - kMarginRight - 190.0;
    std::string label = traces[t]->label.empty()
                            ? "trace " + std::to_string(t)
                            : traces[t]->label;
    svg += "<line x1=\"" + fmt2(lx) + "\" y1=\"" + fmt2(ly - 4) + "\" x2=\"" +
           fmt2(lx + 24) + "\" y2=\"" + fmt2(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt2(lx + 30) + "\" y=\"" + fmt2(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + xml_escape(label) + "</text>\n";
  }

  svg += "</svg>\n";
  return svg;
}

void render_plot(const std::vector<const GenerationTrace*>& traces, const std::string& path) {
  write_text_file(path, render_plot_svg(traces));
}

}  // namespace metadistill
