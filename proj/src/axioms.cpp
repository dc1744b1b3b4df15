#include "metadistill/axioms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metadistill/rng.hpp"

namespace metadistill {

namespace {

constexpr std::size_t kMaxCounterexamples = 5;
constexpr std::size_t kVocabChoices[] = {2, 3, 5, 10};

std::vector<double> to_raw(const Distribution& d) { return d.probs(); }

std::vector<Distribution> from_raw(const std::vector<std::vector<double>>& raw) {
  std::vector<Distribution> out;
  out.reserve(raw.size());
  for (const auto& r : raw) out.push_back(Distribution::from_probabilities(r));
  return out;
}

double l1_distance(const Distribution& a, const Distribution& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum;
}

Distribution perturb_on_simplex(const Distribution& p, RngStream& rng, double delta) {
  const auto d = sample_tangent(rng, p.size());
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = std::max(p[i] + delta * d[i], 1e-9);
  }
  return normalize(std::move(out));
}

void record(AxiomCheck& check, Counterexample ce) {
  ++check.violations;
  if (check.counterexamples.size() < kMaxCounterexamples) {
    check.counterexamples.push_back(std::move(ce));
  }
}

bool is_mixture_kind(OperatorKind kind) {
  return kind == OperatorKind::ConvexMixture || kind == OperatorKind::GeneralizedMixture;
}

}  // namespace

const char* axiom_status_name(AxiomStatus status) {
  switch (status) {
    case AxiomStatus::Pass: return "pass";
    case AxiomStatus::Fail: return "fail";
    case AxiomStatus::Measured: return "measured";
  }
  return "pass";
}

bool AxiomReport::all_pass_or_measured() const {
  for (const AxiomCheck* c : {&validity, &positivity, &anchoring, &continuity, &monotonicity}) {
    if (c->status == AxiomStatus::Fail) return false;
  }
  return true;
}

double effective_anchor(const Distribution& q, const Distribution& t0) {
  if (q.size() != t0.size()) {
    throw_error(ErrorCode::DimensionMismatch, "vocabulary sizes differ");
  }
  double min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i) {
    min_ratio = std::min(min_ratio, q[i] / t0[i]);
  }
  return min_ratio;
}

AxiomReport check_axioms(const OperatorConfig& config, int trials, std::uint64_t seed) {
  config.validate();
  if (trials < 1) throw_error(ErrorCode::ValidationError, "trials must be >= 1");

  AxiomReport report;
  report.config = config;
  report.trials = trials;
  report.seed = seed;
  report.effective_anchor_min = std::numeric_limits<double>::infinity();
  report.general_anchor_min = std::numeric_limits<double>::infinity();
  report.continuity_ratio_max = 0.0;

  const std::size_t n_teachers = config.teacher_weights.size();

  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed =
        RngStream::derive(seed, static_cast<std::uint64_t>(trial)).next_u64();
    RngStream rng(trial_seed);

    const std::size_t vocab = kVocabChoices[rng.next_u64() % 4];
    std::size_t n_students;
    if (config.generation_scheme.kind == GenerationWeightScheme::Kind::Explicit) {
      n_students = config.generation_scheme.explicit_weights.size();
    } else {
      n_students = 1 + static_cast<std::size_t>(rng.next_u64() % 4);
    }

    std::vector<Distribution> teachers;
    teachers.reserve(n_teachers);
    for (std::size_t k = 0; k < n_teachers; ++k) {
      teachers.push_back(normalize(sample_simplex(rng, vocab)));
    }
    std::vector<Distribution> students;
    students.reserve(n_students);
    for (std::size_t j = 0; j < n_students; ++j) {
      students.push_back(normalize(sample_simplex(rng, vocab)));
    }

    Counterexample base;
    base.trial_index = trial;
    base.trial_seed = trial_seed;
    base.vocab = vocab;
    base.alpha = config.alpha;
    for (const auto& t : teachers) base.teachers.push_back(to_raw(t));
    for (const auto& s : students) base.students.push_back(to_raw(s));

    for (AxiomCheck* c : {&report.validity, &report.positivity, &report.anchoring,
                          &report.continuity, &report.monotonicity}) {
      ++c->trials;
    }

    // Build the meta-teacher; operator errors become Axiom 1 evidence.
    std::vector<Distribution> built;
    try {
      built.push_back(build_meta_teacher(config, config.alpha, teachers, students));
    } catch (const Error& e) {
      Counterexample ce = base;
      ce.axiom = 1;
      ce.observed = std::numeric_limits<double>::quiet_NaN();
      ce.message = e.what();
      record(report.validity, std::move(ce));
      continue;
    }
    const Distribution& q = built.front();
    base.output = to_raw(q);

    // Axiom 1: valid probability vector.
    {
      double sum = 0.0, worst_neg = 0.0;
      for (double x : q.probs()) {
        sum += x;
        worst_neg = std::min(worst_neg, x);
      }
      const double sum_dev = std::abs(sum - 1.0);
      if (sum_dev > kSumTolerance || worst_neg < 0.0) {
        Counterexample ce = base;
        ce.axiom = 1;
        ce.observed = sum_dev;
        ce.threshold = kSumTolerance;
        ce.message = "output is not a normalized non-negative vector";
        record(report.validity, std::move(ce));
      }
    }

    // Axiom 2: strict positivity inheritance.
    if (!(q.min_entry() > 0.0)) {
      Counterexample ce = base;
      ce.axiom = 2;
      ce.observed = q.min_entry();
      ce.threshold = 0.0;
      ce.message = "output has a zero entry despite strictly positive inputs";
      record(report.positivity, std::move(ce));
    }

    // Axiom 3: teacher anchoring. Certified for the mixture kinds, measured
    // for the projections. The general form min(q, tbar) >= a * min(r, tbar)
    // is also measured, with r = the non-anchor component when one exists,
    // uniform otherwise.
    {
      const Distribution anchor_mix = weighted_sum(
          config.teacher_weights,
          [&] {
            std::vector<const Distribution*> ptrs;
            for (const auto& t : teachers) ptrs.push_back(&t);
            return ptrs;
          }());
      const double ea = effective_anchor(q, anchor_mix);
      report.effective_anchor_min = std::min(report.effective_anchor_min, ea);

      Distribution reference = Distribution::uniform(vocab);
      if (is_mixture_kind(config.kind)) {
        const auto v = generation_weights(config.generation_scheme,
                                          static_cast<int>(students.size()) - 1);
        std::vector<const Distribution*> sptrs;
        for (const auto& s : students) sptrs.push_back(&s);
        reference = weighted_sum(v, sptrs);
      }
      double general = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < vocab; ++i) {
        general = std::min(general, std::min(q[i], anchor_mix[i]) /
                                        std::min(reference[i], anchor_mix[i]));
      }
      report.general_anchor_min = std::min(report.general_anchor_min, general);

      if (is_mixture_kind(config.kind)) {
        const bool unanchored_violation = config.alpha == 0.0;
        if (unanchored_violation || ea < config.alpha - 1e-12) {
          Counterexample ce = base;
          ce.axiom = 3;
          ce.observed = ea;
          ce.threshold = config.alpha;
          ce.message = unanchored_violation
                           ? "axiom requires some alpha > 0; operator is unanchored"
                           : "effective anchor below configured alpha";
          record(report.anchoring, std::move(ce));
        }
      }
    }

    // Axiom 4: joint continuity, audited as an empirical Lipschitz bound.
    {
      std::vector<Distribution> teachers_p, students_p;
      teachers_p.reserve(teachers.size());
      students_p.reserve(students.size());
      for (const auto& t : teachers) teachers_p.push_back(perturb_on_simplex(t, rng, kContinuityDelta));
      for (const auto& s : students) students_p.push_back(perturb_on_simplex(s, rng, kContinuityDelta));
      try {
        const Distribution qp =
            build_meta_teacher(config, config.alpha, teachers_p, students_p);
        const double ratio = l1_distance(q, qp) / kContinuityDelta;
        report.continuity_ratio_max = std::max(report.continuity_ratio_max, ratio);
        if (ratio > kContinuityBound) {
          Counterexample ce = base;
          ce.axiom = 4;
          for (const auto& t : teachers_p) ce.teachers_perturbed.push_back(to_raw(t));
          for (const auto& s : students_p) ce.students_perturbed.push_back(to_raw(s));
          ce.output2 = to_raw(qp);
          ce.observed = ratio;
          ce.threshold = kContinuityBound;
          ce.message = "output L1 change exceeds C * delta";
          record(report.continuity, std::move(ce));
        }
      } catch (const Error& e) {
        Counterexample ce = base;
        ce.axiom = 4;
        ce.observed = std::numeric_limits<double>::quiet_NaN();
        ce.message = e.what();
        record(report.continuity, std::move(ce));
      }
    }

    // Axiom 5: monotonicity in the anchor weight, measured against T0.
    {
      double a = rng.next_unit();
      double b = rng.next_unit();
      const double alpha1 = std::min(a, b);
      const double alpha2 = std::max(a, b);
      try {
        const Distribution q1 = build_meta_teacher(config, alpha1, teachers, students);
        const Distribution q2 = build_meta_teacher(config, alpha2, teachers, students);
        const double kl1 = divergence(DivergenceKind::KL, teachers[0], q1);
        const double kl2 = divergence(DivergenceKind::KL, teachers[0], q2);
        if (kl2 > kl1 + 1e-10) {
          Counterexample ce = base;
          ce.axiom = 5;
          ce.alpha = alpha1;
          ce.alpha2 = alpha2;
          ce.output = to_raw(q1);
          ce.output2 = to_raw(q2);
          ce.observed = kl2 - kl1;
          ce.threshold = 1e-10;
          ce.message = "larger alpha produced a meta-teacher farther from T0";
          record(report.monotonicity, std::move(ce));
        }
      } catch (const Error& e) {
        Counterexample ce = base;
        ce.axiom = 5;
        ce.observed = std::numeric_limits<double>::quiet_NaN();
        ce.message = e.what();
        record(report.monotonicity, std::move(ce));
      }
    }
  }

  report.validity.status = report.validity.violations ? AxiomStatus::Fail : AxiomStatus::Pass;
  report.positivity.status = report.positivity.violations ? AxiomStatus::Fail : AxiomStatus::Pass;
  if (is_mixture_kind(config.kind)) {
    report.anchoring.status = report.anchoring.violations ? AxiomStatus::Fail : AxiomStatus::Pass;
  } else {
    report.anchoring.status = AxiomStatus::Measured;
  }
  report.continuity.status =
      report.continuity.violations ? AxiomStatus::Fail : AxiomStatus::Measured;
  report.monotonicity.status =
      report.monotonicity.violations ? AxiomStatus::Fail : AxiomStatus::Pass;
  return report;
}

double replay_counterexample(const OperatorConfig& config, const Counterexample& ce) {
  if (ce.axiom < 1 || ce.axiom > 5) {
    throw_error(ErrorCode::ValidationError,
                "counterexample axiom index " + std::to_string(ce.axiom));
  }
  const auto teachers = from_raw(ce.teachers);
  const auto students = from_raw(ce.students);
  try {
    switch (ce.axiom) {
      case 1: {
        const Distribution q = build_meta_teacher(config, ce.alpha, teachers, students);
        double sum = 0.0;
        for (double x : q.probs()) sum += x;
        return std::abs(sum - 1.0);
      }
      case 2:
        return build_meta_teacher(config, ce.alpha, teachers, students).min_entry();
      case 3: {
        const Distribution q = build_meta_teacher(config, ce.alpha, teachers, students);
        std::vector<const Distribution*> ptrs;
        for (const auto& t : teachers) ptrs.push_back(&t);
        return effective_anchor(q, weighted_sum(config.teacher_weights, ptrs));
      }
      case 4: {
        const Distribution q = build_meta_teacher(config, ce.alpha, teachers, students);
        const Distribution qp = build_meta_teacher(config, ce.alpha,
                                                   from_raw(ce.teachers_perturbed),
                                                   from_raw(ce.students_perturbed));
        return l1_distance(q, qp) / kContinuityDelta;
      }
      case 5: {
        const Distribution q1 = build_meta_teacher(config, ce.alpha, teachers, students);
        const Distribution q2 = build_meta_teacher(config, ce.alpha2, teachers, students);
        return divergence(DivergenceKind::KL, teachers[0], q2) -
               divergence(DivergenceKind::KL, teachers[0], q1);
      }
      default:
        return std::numeric_limits<double>::quiet_NaN();
    }
  } catch (const Error&) {
    // Counterexamples recorded for operator errors carry observed = NaN;
    // for those, an error on replay is the faithful reproduction.
    if (!std::isnan(ce.observed)) throw;
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace metadistill
