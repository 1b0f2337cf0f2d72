#pragma once

// Finite two-station models: source states, time slots, instrument-parameter
// generators and outcome rules, plus the sign transforms layered on top.
//
// Slots are 0-based internally; every file format and report shows them
// 1-based.

#include <array>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bellsim {

enum class Station { S1, S2 };

std::string_view to_string(Station station);
Station parse_station(std::string_view text);

/// Measurement setting: an angle in [0, 2π) bound to one station.
class Setting {
 public:
  Setting(Station station, double angle);

  Station station() const noexcept { return station_; }
  double angle() const noexcept { return angle_; }

  friend bool operator==(const Setting&, const Setting&) = default;

 private:
  Station station_;
  double angle_;
};

double normalize_angle(double angle);

/// Fixed four-angle test grid; contains the CHSH-optimal configuration for
/// the cosine reference.
inline constexpr std::array<double, 4> kTestAngles = {
    0.0, std::numbers::pi / 4, std::numbers::pi / 2, 3 * std::numbers::pi / 4};

inline constexpr double kMassTolerance = 1e-12;

class SourceSpace {
 public:
  SourceSpace(std::vector<std::string> labels, std::vector<double> prior);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  double weight(std::size_t i) const { return prior_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<double>& prior() const noexcept { return prior_; }
  std::optional<std::size_t> index_of(std::string_view label) const;

 private:
  std::vector<std::string> labels_;
  std::vector<double> prior_;
};

class TimeGrid {
 public:
  /// Uniform weights 1/N.
  explicit TimeGrid(std::size_t slot_count);
  explicit TimeGrid(std::vector<double> weights);

  std::size_t slot_count() const noexcept { return weights_.size(); }
  double weight(std::size_t slot) const { return weights_.at(slot); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  bool is_uniform() const noexcept { return uniform_; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> weights_;
  bool uniform_ = true;
};

enum class GenKind { constant, slot_table, setting_table, setting_slot_table, hashed };

std::string_view to_string(GenKind kind);
GenKind parse_gen_kind(std::string_view text);

/// Deterministic instrument-parameter generator (setting, slot, seed) -> value.
/// Values are the integers 0..value_count-1.
struct InstrumentParamGen {
  Station station = Station::S1;
  GenKind kind = GenKind::constant;
  std::size_t value_count = 1;
  /// constant: one entry; slot_table: [slot]; setting_table: [setting];
  /// setting_slot_table: [setting][slot] row-major. Unused for hashed.
  std::vector<std::size_t> table;
  std::uint64_t seed = 0;

  bool depends_on_slot() const noexcept {
    return kind == GenKind::slot_table || kind == GenKind::setting_slot_table ||
           kind == GenKind::hashed;
  }
};

enum class OutcomeKind { constant, table, cos_threshold };

std::string_view to_string(OutcomeKind kind);
OutcomeKind parse_outcome_kind(std::string_view text);

/// Axes a tabulated outcome rule may depend on, in storage order.
enum OutcomeAxis : unsigned {
  kAxisSetting = 1u << 0,
  kAxisLambda = 1u << 1,
  kAxisValue = 1u << 2,
  kAxisSlot = 1u << 3,
};

std::string axes_to_string(unsigned axes);
unsigned parse_axes(std::string_view text);

/// Deterministic outcome rule (local setting, λ, local instrument value, slot)
/// -> ±1.
///
/// `table` is row-major over the axes in `axes`, ordered setting, λ, value,
/// slot. `cos_threshold` yields polarity * sign(cos(angle - lambda_phase[λ] -
/// value_phase[v])) with sign(0) = +1.
struct OutcomeFn {
  Station station = Station::S1;
  OutcomeKind kind = OutcomeKind::constant;
  int constant = 1;
  unsigned axes = 0;
  std::vector<int> table;
  std::vector<double> lambda_phase;
  std::vector<double> value_phase;
  int polarity = 1;
};

/// ±1 function over the slots of a grid with its weighted mean.
class SignFunction {
 public:
  SignFunction(const TimeGrid& grid, std::vector<int> values);

  int operator()(std::size_t slot) const { return values_.at(slot); }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<int>& values() const noexcept { return values_; }
  double mean() const noexcept { return mean_; }

 private:
  std::vector<int> values_;
  double mean_;
};

enum class SignScope { both, s1_only, s2_only };

std::string_view to_string(SignScope scope);
SignScope parse_sign_scope(std::string_view text);
bool scope_covers(SignScope scope, Station station);

/// Multiplies outcomes by r(m) over the grid that was current when applied.
struct SlotSignTransform {
  SignFunction sign;
  SignScope scope = SignScope::both;
  std::optional<std::uint64_t> seed;
};

/// Negative control: multiplies outcomes by a sign chosen per source state.
struct LambdaSignTransform {
  std::vector<int> signs;
  SignScope scope = SignScope::both;
};

/// Splits slot m into the pair (2m, 2m+1) with half the weight each; the odd
/// member flips both outcomes.
struct LayerDoubleTransform {};

using Transform = std::variant<SlotSignTransform, LambdaSignTransform, LayerDoubleTransform>;

std::string_view transform_name(const Transform& transform);

struct StationOutput {
  std::size_t instrument_value = 0;
  int outcome = 1;

  friend bool operator==(const StationOutput&, const StationOutput&) = default;
};

/// Immutable, validated two-station model.
class LocalModel {
 public:
  LocalModel(std::string name, SourceSpace source, TimeGrid grid, std::vector<double> angles,
             InstrumentParamGen gen1, InstrumentParamGen gen2, OutcomeFn out1, OutcomeFn out2);

  const std::string& name() const noexcept { return name_; }
  const SourceSpace& source() const noexcept { return source_; }
  /// Grid after all transforms.
  const TimeGrid& grid() const noexcept { return grid_; }
  const TimeGrid& base_grid() const noexcept { return base_grid_; }
  /// Setting alphabet used by table-driven rules.
  const std::vector<double>& angles() const noexcept { return angles_; }
  const InstrumentParamGen& gen(Station station) const noexcept;
  const OutcomeFn& out(Station station) const noexcept;
  const std::vector<Transform>& transforms() const noexcept { return transforms_; }

  /// Slot sign installed by time symmetrization, if any.
  const SlotSignTransform* slot_sign() const noexcept;
  const LambdaSignTransform* lambda_sign() const noexcept;
  bool is_layer_doubled() const noexcept;
  /// Per-slot ±1 mask of the doubled grid; empty when not doubled.
  std::vector<int> flip_mask() const;

  /// Position of `angle` in the setting alphabet.
  std::optional<std::size_t> setting_index(double angle) const;

  std::size_t instrument_value(const Setting& setting, std::size_t slot) const;
  int outcome_given_value(const Setting& setting, std::size_t lambda, std::size_t value,
                          std::size_t slot) const;
  StationOutput evaluate(const Setting& setting, std::size_t lambda, std::size_t slot) const;

  /// True when the full outcome (signs included) never varies with the slot
  /// for this setting, for any λ.
  bool slot_invariant(const Setting& setting) const;

  LocalModel with_transform(Transform transform) const;
  LocalModel with_station_seeds(std::uint64_t seed1, std::uint64_t seed2) const;
  LocalModel renamed(std::string name) const;

 private:
  struct Resolved {
    std::size_t base_slot;
    int sign;
  };
  Resolved resolve(Station station, std::size_t lambda, std::size_t slot) const;
  void check_slot(std::size_t slot) const;
  void check_lambda(std::size_t lambda) const;

  std::string name_;
  SourceSpace source_;
  TimeGrid base_grid_;
  TimeGrid grid_;
  std::vector<double> angles_;
  InstrumentParamGen gen1_, gen2_;
  OutcomeFn out1_, out2_;
  std::vector<Transform> transforms_;
};

/// Outcome of `station` for the given local inputs; the setting must belong to
/// `station`.
int evaluate_outcome(const LocalModel& model, Station station, const Setting& setting,
                     std::size_t lambda, std::size_t slot);

}  // namespace bellsim
