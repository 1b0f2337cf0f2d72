#pragma once

// Trial-by-trial execution of an experiment: a source drawing λ, a shared
// slot clock, and two station computations that only see local inputs.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bellsim/model.hpp"

namespace bellsim {

enum class SettingPolicy { fixed, cycle, seeded_random };

std::string_view to_string(SettingPolicy policy);
SettingPolicy parse_setting_policy(std::string_view text);

struct Schedule {
  std::uint64_t trials = 1;
  /// fixed uses the first angle of each list; cycle walks every (a, b)
  /// combination in order; seeded_random picks each side independently.
  SettingPolicy policy = SettingPolicy::cycle;
  std::vector<double> angles_a{kTestAngles.begin(), kTestAngles.end()};
  std::vector<double> angles_b{kTestAngles.begin(), kTestAngles.end()};
  std::uint64_t seed_source = 1;
  std::uint64_t seed_settings = 2;
  /// Optional replacements for the generator seeds stored in the model.
  std::optional<std::uint64_t> seed_s1;
  std::optional<std::uint64_t> seed_s2;
};

void validate_schedule(const Schedule& schedule);

struct TrialRecord {
  std::uint64_t trial = 0;
  std::size_t slot = 0;
  double angle_a = 0;
  double angle_b = 0;
  std::size_t lambda = 0;
  std::size_t lambda_star = 0;
  std::size_t lambda_dblstar = 0;
  int outcome_a = 1;
  int outcome_b = 1;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Everything the harness knows about one trial. Engines receive the whole
/// context; an honest engine reads only its own station's setting from it.
struct TrialContext {
  std::uint64_t trial = 0;
  std::size_t slot = 0;
  std::size_t lambda = 0;
  Setting a{Station::S1, 0};
  Setting b{Station::S2, 0};
};

class StationEngine {
 public:
  virtual ~StationEngine() = default;
  virtual StationOutput compute(Station station, const TrialContext& context) const = 0;
};

/// Evaluates a LocalModel, forwarding only (local setting, λ, m).
class ModelEngine final : public StationEngine {
 public:
  explicit ModelEngine(const LocalModel& model) : model_(model) {}
  StationOutput compute(Station station, const TrialContext& context) const override;

 private:
  const LocalModel& model_;
};

/// Source, clock and setting choices for every trial of a schedule.
std::vector<TrialContext> plan_trials(const SourceSpace& source, const TimeGrid& grid, const Schedule& schedule);

std::vector<TrialRecord> run_experiment(const LocalModel& model, const Schedule& schedule);
std::vector<TrialRecord> run_experiment(const StationEngine& engine, const SourceSpace& source,
                                        const TimeGrid& grid, const Schedule& schedule);

struct AuditReport {
  std::uint64_t trials_checked = 0;
  std::uint64_t mismatches = 0;
  bool pass = true;
  /// Human-readable description of the first mismatch.
  std::string first_mismatch;
};

/// Re-runs each station with `remote_perturbations` alternative remote
/// settings per trial and counts trials whose local output changed.
AuditReport locality_audit(const LocalModel& model, const Schedule& schedule, std::size_t remote_perturbations);
AuditReport locality_audit(const StationEngine& engine, const SourceSpace& source, const TimeGrid& grid,
                           const Schedule& schedule, std::size_t remote_perturbations);

struct PairStatistics {
  std::uint64_t count = 0;
  double e_ab = 0;
  double std_error = 0;
  double marginal_a = 0;
  double marginal_b = 0;
  std::vector<double> cond_a;
  std::vector<double> cond_b;
};

/// Empirical statistics per (angle_a, angle_b) pair.
std::map<std::pair<double, double>, PairStatistics> summarize_trials(std::span<const TrialRecord> records,
                                                                     std::size_t lambda_count);

/// CSV with header `trial,m,a,b,lambda,lambda_star,lambda_dblstar,A,B`; slots
/// 1-based, λ by label, angles with 12 significant digits.
void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records, const SourceSpace& source);

}  // namespace bellsim
