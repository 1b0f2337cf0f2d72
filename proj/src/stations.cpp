#include "bellsim/stations.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "bellsim/error.hpp"
#include "bellsim/format.hpp"
#include "bellsim/rng.hpp"

namespace bellsim {

namespace {

constexpr std::uint64_t kSourceStream = 0x50;
constexpr std::uint64_t kSettingStream = 0x5e;

std::vector<double> cumulative(const std::vector<double>& weights) {
  std::vector<double> c(weights.size());
  double total = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) c[i] = (total += weights[i]);
  return c;
}

}  // namespace

std::string_view to_string(SettingPolicy policy) {
  switch (policy) {
    case SettingPolicy::fixed: return "fixed";
    case SettingPolicy::cycle: return "cycle";
    case SettingPolicy::seeded_random: return "seeded_random";
  }
  return "?";
}

SettingPolicy parse_setting_policy(std::string_view text) {
  for (auto p : {SettingPolicy::fixed, SettingPolicy::cycle, SettingPolicy::seeded_random}) {
    if (to_string(p) == text) return p;
  }
  throw Error(ErrorCode::invalid_schedule, fmt::format("unknown setting policy '{}'", text));
}

void validate_schedule(const Schedule& schedule) {
  if (schedule.trials == 0) throw Error(ErrorCode::invalid_schedule, "schedule needs at least one trial");
  if (schedule.angles_a.empty() || schedule.angles_b.empty()) {
    throw Error(ErrorCode::invalid_schedule, "schedule needs at least one angle per station");
  }
  for (const auto* list : {&schedule.angles_a, &schedule.angles_b}) {
    for (double a : *list) {
      if (!std::isfinite(a)) throw Error(ErrorCode::invalid_schedule, "schedule angle is not finite");
    }
  }
}

StationOutput ModelEngine::compute(Station station, const TrialContext& context) const {
  const Setting& local = station == Station::S1 ? context.a : context.b;
  return model_.evaluate(local, context.lambda, context.slot);
}

std::vector<TrialContext> plan_trials(const SourceSpace& source, const TimeGrid& grid, const Schedule& schedule) {
  validate_schedule(schedule);
  const auto lambda_cdf = cumulative(source.prior());
  rng::Stream source_stream(rng::derive_seed(schedule.seed_source, kSourceStream));
  rng::Stream setting_stream(rng::derive_seed(schedule.seed_settings, kSettingStream));
  const std::size_t na = schedule.angles_a.size();
  const std::size_t nb = schedule.angles_b.size();

  std::vector<TrialContext> plan;
  plan.reserve(schedule.trials);
  for (std::uint64_t t = 0; t < schedule.trials; ++t) {
    std::size_t ia = 0, ib = 0;
    switch (schedule.policy) {
      case SettingPolicy::fixed: break;
      case SettingPolicy::cycle:
        ia = static_cast<std::size_t>(t % na);
        ib = static_cast<std::size_t>((t / na) % nb);
        break;
      case SettingPolicy::seeded_random:
        ia = setting_stream.below(na);
        ib = setting_stream.below(nb);
        break;
    }
    TrialContext ctx;
    ctx.trial = t;
    ctx.slot = static_cast<std::size_t>(t % grid.slot_count());
    ctx.lambda = source_stream.pick(lambda_cdf);
    ctx.a = Setting(Station::S1, schedule.angles_a[ia]);
    ctx.b = Setting(Station::S2, schedule.angles_b[ib]);
    plan.push_back(ctx);
  }
  return plan;
}

std::vector<TrialRecord> run_experiment(const StationEngine& engine, const SourceSpace& source,
                                        const TimeGrid& grid, const Schedule& schedule) {
  const auto plan = plan_trials(source, grid, schedule);
  std::vector<TrialRecord> records;
  records.reserve(plan.size());
  for (const auto& ctx : plan) {
    const StationOutput s1 = engine.compute(Station::S1, ctx);
    const StationOutput s2 = engine.compute(Station::S2, ctx);
    records.push_back({ctx.trial, ctx.slot, ctx.a.angle(), ctx.b.angle(), ctx.lambda, s1.instrument_value,
                       s2.instrument_value, s1.outcome, s2.outcome});
  }
  return records;
}

namespace {

LocalModel scheduled_model(const LocalModel& model, const Schedule& schedule) {
  if (!schedule.seed_s1 && !schedule.seed_s2) return model;
  return model.with_station_seeds(schedule.seed_s1.value_or(model.gen(Station::S1).seed),
                                  schedule.seed_s2.value_or(model.gen(Station::S2).seed));
}

}  // namespace

std::vector<TrialRecord> run_experiment(const LocalModel& model, const Schedule& schedule) {
  const LocalModel seeded = scheduled_model(model, schedule);
  return run_experiment(ModelEngine(seeded), seeded.source(), seeded.grid(), schedule);
}

AuditReport locality_audit(const StationEngine& engine, const SourceSpace& source, const TimeGrid& grid,
                           const Schedule& schedule, std::size_t remote_perturbations) {
  if (remote_perturbations == 0) throw Error(ErrorCode::invalid_schedule, "audit needs at least one perturbation");
  const auto plan = plan_trials(source, grid, schedule);
  AuditReport report;
  const double step = 2 * std::numbers::pi / static_cast<double>(remote_perturbations + 1);
  for (const auto& ctx : plan) {
    ++report.trials_checked;
    const StationOutput s1 = engine.compute(Station::S1, ctx);
    const StationOutput s2 = engine.compute(Station::S2, ctx);
    bool mismatch = false;
    for (std::size_t j = 1; j <= remote_perturbations && !mismatch; ++j) {
      const double offset = step * static_cast<double>(j);
      TrialContext moved_b = ctx;
      moved_b.b = Setting(Station::S2, ctx.b.angle() + offset);
      TrialContext moved_a = ctx;
      moved_a.a = Setting(Station::S1, ctx.a.angle() + offset);
      const bool s1_changed = engine.compute(Station::S1, moved_b) != s1;
      const bool s2_changed = engine.compute(Station::S2, moved_a) != s2;
      if (s1_changed || s2_changed) {
        mismatch = true;
        if (report.first_mismatch.empty()) {
          report.first_mismatch =
              fmt::format("trial {}: {} output changed when the remote setting moved by {}", ctx.trial + 1,
                          s1_changed ? "S1" : "S2", format_real(offset));
        }
      }
    }
    if (mismatch) ++report.mismatches;
  }
  report.pass = report.mismatches == 0;
  return report;
}

AuditReport locality_audit(const LocalModel& model, const Schedule& schedule, std::size_t remote_perturbations) {
  const LocalModel seeded = scheduled_model(model, schedule);
  return locality_audit(ModelEngine(seeded), seeded.source(), seeded.grid(), schedule, remote_perturbations);
}

std::map<std::pair<double, double>, PairStatistics> summarize_trials(std::span<const TrialRecord> records,
                                                                     std::size_t lambda_count) {
  struct Acc {
    std::uint64_t n = 0;
    double ab = 0, ab2 = 0, a = 0, b = 0;
    std::vector<double> sa, sb;
    std::vector<std::uint64_t> hits;
  };
  std::map<std::pair<double, double>, Acc> acc;
  for (const auto& r : records) {
    auto& s = acc[{r.angle_a, r.angle_b}];
    if (s.sa.empty()) {
      s.sa.assign(lambda_count, 0.0);
      s.sb.assign(lambda_count, 0.0);
      s.hits.assign(lambda_count, 0);
    }
    const double ab = r.outcome_a * r.outcome_b;
    ++s.n;
    s.ab += ab;
    s.ab2 += ab * ab;
    s.a += r.outcome_a;
    s.b += r.outcome_b;
    s.sa.at(r.lambda) += r.outcome_a;
    s.sb.at(r.lambda) += r.outcome_b;
    ++s.hits.at(r.lambda);
  }
  std::map<std::pair<double, double>, PairStatistics> out;
  for (const auto& [key, s] : acc) {
    PairStatistics p;
    const double n = static_cast<double>(s.n);
    p.count = s.n;
    p.e_ab = s.ab / n;
    p.marginal_a = s.a / n;
    p.marginal_b = s.b / n;
    if (s.n > 1) p.std_error = std::sqrt(std::max(0.0, (s.ab2 - n * p.e_ab * p.e_ab) / (n - 1)) / n);
    p.cond_a.assign(lambda_count, 0.0);
    p.cond_b.assign(lambda_count, 0.0);
    for (std::size_t l = 0; l < lambda_count; ++l) {
      if (s.hits[l] == 0) continue;
      p.cond_a[l] = s.sa[l] / static_cast<double>(s.hits[l]);
      p.cond_b[l] = s.sb[l] / static_cast<double>(s.hits[l]);
    }
    out.emplace(key, std::move(p));
  }
  return out;
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records, const SourceSpace& source) {
  out << "trial,m,a,b,lambda,lambda_star,lambda_dblstar,A,B\n";
  for (const auto& r : records) {
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", r.trial + 1, r.slot + 1, format_real(r.angle_a),
                       format_real(r.angle_b), source.label(r.lambda), r.lambda_star, r.lambda_dblstar, r.outcome_a,
                       r.outcome_b);
  }
}

}  // namespace bellsim
