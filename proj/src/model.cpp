#include "bellsim/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "bellsim/error.hpp"
#include "bellsim/rng.hpp"

namespace bellsim {

namespace {

constexpr double kAngleMatch = 1e-9;
constexpr double kTwoPi = 2 * std::numbers::pi;

void check_distribution(const std::vector<double>& weights, std::string_view what) {
  if (weights.empty()) throw Error(ErrorCode::invalid_weights, fmt::format("{} is empty", what));
  double total = 0;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) {
      throw Error(ErrorCode::invalid_weights, fmt::format("{} has a negative or non-finite weight", what));
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw Error(ErrorCode::invalid_weights, fmt::format("{} sums to {} instead of 1", what, total));
  }
}

void check_sign(int value, std::string_view what) {
  if (value != 1 && value != -1) {
    throw Error(ErrorCode::codomain_violation, fmt::format("{} yields {}, expected +1 or -1", what, value));
  }
}

std::size_t axis_extent(unsigned axis, std::size_t settings, std::size_t lambdas, std::size_t values,
                        std::size_t slots) {
  switch (axis) {
    case kAxisSetting: return settings;
    case kAxisLambda: return lambdas;
    case kAxisValue: return values;
    case kAxisSlot: return slots;
  }
  return 1;
}

constexpr std::array<unsigned, 4> kAxisOrder = {kAxisSetting, kAxisLambda, kAxisValue, kAxisSlot};

}  // namespace

std::string_view to_string(Station station) { return station == Station::S1 ? "S1" : "S2"; }

Station parse_station(std::string_view text) {
  if (text == "S1" || text == "s1" || text == "1") return Station::S1;
  if (text == "S2" || text == "s2" || text == "2") return Station::S2;
  throw Error(ErrorCode::config_error, fmt::format("unknown station '{}'", text));
}

double normalize_angle(double angle) {
  if (!std::isfinite(angle)) throw Error(ErrorCode::config_error, "non-finite angle");
  double a = std::fmod(angle, kTwoPi);
  if (a < 0) a += kTwoPi;
  if (a >= kTwoPi) a = 0;
  return a;
}

Setting::Setting(Station station, double angle) : station_(station), angle_(normalize_angle(angle)) {}

SourceSpace::SourceSpace(std::vector<std::string> labels, std::vector<double> prior)
    : labels_(std::move(labels)), prior_(std::move(prior)) {
  if (labels_.empty()) throw Error(ErrorCode::invalid_weights, "source space has no states");
  if (labels_.size() != prior_.size()) {
    throw Error(ErrorCode::invalid_weights,
                fmt::format("{} source labels but {} prior weights", labels_.size(), prior_.size()));
  }
  std::set<std::string> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) throw Error(ErrorCode::invalid_model, "duplicate source label");
  check_distribution(prior_, "source prior");
}

std::optional<std::size_t> SourceSpace::index_of(std::string_view label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

TimeGrid::TimeGrid(std::size_t slot_count) {
  if (slot_count == 0) throw Error(ErrorCode::invalid_weights, "time grid needs at least one slot");
  weights_.assign(slot_count, 1.0 / static_cast<double>(slot_count));
}

TimeGrid::TimeGrid(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw Error(ErrorCode::invalid_weights, "time grid needs at least one slot");
  check_distribution(weights_, "slot weights");
  uniform_ = std::all_of(weights_.begin(), weights_.end(),
                         [&](double w) { return w == weights_.front(); });
}

std::string_view to_string(GenKind kind) {
  switch (kind) {
    case GenKind::constant: return "constant";
    case GenKind::slot_table: return "slot_table";
    case GenKind::setting_table: return "setting_table";
    case GenKind::setting_slot_table: return "setting_slot_table";
    case GenKind::hashed: return "hashed";
  }
  return "?";
}

GenKind parse_gen_kind(std::string_view text) {
  for (auto k : {GenKind::constant, GenKind::slot_table, GenKind::setting_table,
                 GenKind::setting_slot_table, GenKind::hashed}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::config_error, fmt::format("unknown generator kind '{}'", text));
}

std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::constant: return "constant";
    case OutcomeKind::table: return "table";
    case OutcomeKind::cos_threshold: return "cos_threshold";
  }
  return "?";
}

OutcomeKind parse_outcome_kind(std::string_view text) {
  for (auto k : {OutcomeKind::constant, OutcomeKind::table, OutcomeKind::cos_threshold}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::config_error, fmt::format("unknown outcome kind '{}'", text));
}

std::string axes_to_string(unsigned axes) {
  std::string s;
  const auto add = [&](unsigned bit, std::string_view name) {
    if (!(axes & bit)) return;
    if (!s.empty()) s += ',';
    s += name;
  };
  add(kAxisSetting, "setting");
  add(kAxisLambda, "lambda");
  add(kAxisValue, "value");
  add(kAxisSlot, "slot");
  return s;
}

unsigned parse_axes(std::string_view text) {
  unsigned axes = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find(',', pos), text.size());
    auto token = text.substr(pos, end - pos);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (token == "setting") axes |= kAxisSetting;
    else if (token == "lambda") axes |= kAxisLambda;
    else if (token == "value") axes |= kAxisValue;
    else if (token == "slot") axes |= kAxisSlot;
    else if (!token.empty()) throw Error(ErrorCode::config_error, fmt::format("unknown outcome axis '{}'", token));
    pos = end + 1;
  }
  return axes;
}

SignFunction::SignFunction(const TimeGrid& grid, std::vector<int> values) : values_(std::move(values)) {
  if (values_.size() != grid.slot_count()) {
    throw Error(ErrorCode::grid_mismatch,
                fmt::format("sign function has {} values for {} slots", values_.size(), grid.slot_count()));
  }
  double mean = 0;
  long balance = 0;
  for (std::size_t m = 0; m < values_.size(); ++m) {
    check_sign(values_[m], "sign function");
    mean += grid.weight(m) * values_[m];
    balance += values_[m];
  }
  // Uniform grids get the exact ratio so that a balanced r has mean 0.
  mean_ = grid.is_uniform() ? static_cast<double>(balance) / static_cast<double>(values_.size()) : mean;
}

std::string_view to_string(SignScope scope) {
  switch (scope) {
    case SignScope::both: return "both";
    case SignScope::s1_only: return "S1";
    case SignScope::s2_only: return "S2";
  }
  return "?";
}

SignScope parse_sign_scope(std::string_view text) {
  if (text == "both") return SignScope::both;
  if (text == "S1" || text == "s1") return SignScope::s1_only;
  if (text == "S2" || text == "s2") return SignScope::s2_only;
  throw Error(ErrorCode::config_error, fmt::format("unknown sign scope '{}'", text));
}

bool scope_covers(SignScope scope, Station station) {
  return scope == SignScope::both || (scope == SignScope::s1_only && station == Station::S1) ||
         (scope == SignScope::s2_only && station == Station::S2);
}

std::string_view transform_name(const Transform& transform) {
  struct Visitor {
    std::string_view operator()(const SlotSignTransform&) const { return "time_symmetrize"; }
    std::string_view operator()(const LambdaSignTransform&) const { return "lambda_sign"; }
    std::string_view operator()(const LayerDoubleTransform&) const { return "layer_double"; }
  };
  return std::visit(Visitor{}, transform);
}

LocalModel::LocalModel(std::string name, SourceSpace source, TimeGrid grid, std::vector<double> angles,
                       InstrumentParamGen gen1, InstrumentParamGen gen2, OutcomeFn out1, OutcomeFn out2)
    : name_(std::move(name)),
      source_(std::move(source)),
      base_grid_(grid),
      grid_(std::move(grid)),
      angles_(std::move(angles)),
      gen1_(std::move(gen1)),
      gen2_(std::move(gen2)),
      out1_(std::move(out1)),
      out2_(std::move(out2)) {
  if (name_.empty()) throw Error(ErrorCode::invalid_model, "model needs a name");
  if (angles_.empty()) throw Error(ErrorCode::invalid_model, "setting alphabet is empty");
  for (auto& a : angles_) a = normalize_angle(a);
  for (std::size_t i = 0; i < angles_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(angles_[i] - angles_[j]) < kAngleMatch) {
        throw Error(ErrorCode::invalid_model, "setting alphabet has duplicate angles");
      }
    }
  }
  if (gen1_.station != Station::S1 || out1_.station != Station::S1 || gen2_.station != Station::S2 ||
      out2_.station != Station::S2) {
    throw Error(ErrorCode::station_mismatch, "gen1/out1 must belong to S1 and gen2/out2 to S2");
  }

  const std::size_t settings = angles_.size();
  const std::size_t lambdas = source_.size();
  const std::size_t slots = grid_.slot_count();

  for (const InstrumentParamGen* gen : {&gen1_, &gen2_}) {
    const auto who = fmt::format("gen{}", gen->station == Station::S1 ? 1 : 2);
    if (gen->value_count == 0) throw Error(ErrorCode::invalid_model, who + " has an empty value space");
    std::size_t expected = 0;
    switch (gen->kind) {
      case GenKind::constant: expected = 1; break;
      case GenKind::slot_table: expected = slots; break;
      case GenKind::setting_table: expected = settings; break;
      case GenKind::setting_slot_table: expected = settings * slots; break;
      case GenKind::hashed: expected = 0; break;
    }
    if (gen->table.size() != expected) {
      throw Error(ErrorCode::invalid_model,
                  fmt::format("{} table has {} entries, expected {}", who, gen->table.size(), expected));
    }
    for (auto v : gen->table) {
      if (v >= gen->value_count) {
        throw Error(ErrorCode::invalid_model,
                    fmt::format("{} produces value {} outside its {}-value space", who, v, gen->value_count));
      }
    }
  }

  for (const OutcomeFn* out : {&out1_, &out2_}) {
    const auto who = fmt::format("out{}", out->station == Station::S1 ? 1 : 2);
    const std::size_t values = gen(out->station).value_count;
    switch (out->kind) {
      case OutcomeKind::constant:
        check_sign(out->constant, who);
        break;
      case OutcomeKind::table: {
        std::size_t expected = 1;
        for (unsigned axis : kAxisOrder) {
          if (out->axes & axis) expected *= axis_extent(axis, settings, lambdas, values, slots);
        }
        if (out->table.size() != expected) {
          throw Error(ErrorCode::invalid_model, fmt::format("{} table has {} entries, expected {}", who,
                                                            out->table.size(), expected));
        }
        for (int v : out->table) check_sign(v, who);
        break;
      }
      case OutcomeKind::cos_threshold:
        check_sign(out->polarity, who + " polarity");
        if (out->lambda_phase.size() != lambdas) {
          throw Error(ErrorCode::invalid_model, who + " needs one phase per source state");
        }
        if (!out->value_phase.empty() && out->value_phase.size() != values) {
          throw Error(ErrorCode::invalid_model, who + " needs one value phase per instrument value");
        }
        break;
    }
  }
}

const InstrumentParamGen& LocalModel::gen(Station station) const noexcept {
  return station == Station::S1 ? gen1_ : gen2_;
}

const OutcomeFn& LocalModel::out(Station station) const noexcept {
  return station == Station::S1 ? out1_ : out2_;
}

const SlotSignTransform* LocalModel::slot_sign() const noexcept {
  for (const auto& t : transforms_) {
    if (const auto* s = std::get_if<SlotSignTransform>(&t)) return s;
  }
  return nullptr;
}

const LambdaSignTransform* LocalModel::lambda_sign() const noexcept {
  for (const auto& t : transforms_) {
    if (const auto* s = std::get_if<LambdaSignTransform>(&t)) return s;
  }
  return nullptr;
}

bool LocalModel::is_layer_doubled() const noexcept {
  return std::any_of(transforms_.begin(), transforms_.end(),
                     [](const Transform& t) { return std::holds_alternative<LayerDoubleTransform>(t); });
}

std::vector<int> LocalModel::flip_mask() const {
  if (!is_layer_doubled()) return {};
  std::vector<int> mask(grid_.slot_count());
  for (std::size_t j = 0; j < mask.size(); ++j) mask[j] = (j % 2 == 0) ? 1 : -1;
  return mask;
}

std::optional<std::size_t> LocalModel::setting_index(double angle) const {
  const double a = normalize_angle(angle);
  for (std::size_t i = 0; i < angles_.size(); ++i) {
    const double d = std::abs(a - angles_[i]);
    if (d < kAngleMatch || std::abs(d - kTwoPi) < kAngleMatch) return i;
  }
  return std::nullopt;
}

void LocalModel::check_slot(std::size_t slot) const {
  if (slot >= grid_.slot_count()) {
    throw Error(ErrorCode::invalid_model, fmt::format("slot {} outside grid of {}", slot + 1, grid_.slot_count()));
  }
}

void LocalModel::check_lambda(std::size_t lambda) const {
  if (lambda >= source_.size()) {
    throw Error(ErrorCode::invalid_model, fmt::format("source state {} outside source space", lambda));
  }
}

LocalModel::Resolved LocalModel::resolve(Station station, std::size_t lambda, std::size_t slot) const {
  Resolved r{slot, 1};
  for (auto it = transforms_.rbegin(); it != transforms_.rend(); ++it) {
    if (const auto* s = std::get_if<SlotSignTransform>(&*it)) {
      if (scope_covers(s->scope, station)) r.sign *= s->sign(r.base_slot);
    } else if (const auto* l = std::get_if<LambdaSignTransform>(&*it)) {
      if (scope_covers(l->scope, station)) r.sign *= l->signs.at(lambda);
    } else {
      if (r.base_slot % 2 == 1) r.sign = -r.sign;
      r.base_slot /= 2;
    }
  }
  return r;
}

namespace {

std::size_t require_index(const LocalModel& model, const Setting& setting) {
  const auto idx = model.setting_index(setting.angle());
  if (!idx) {
    throw Error(ErrorCode::setting_off_grid,
                fmt::format("angle {} is not in the setting alphabet of model '{}'", setting.angle(), model.name()));
  }
  return *idx;
}

std::size_t gen_value(const LocalModel& model, const InstrumentParamGen& gen, const Setting& setting,
                      std::size_t base_slot) {
  const std::size_t slots = model.base_grid().slot_count();
  switch (gen.kind) {
    case GenKind::constant: return gen.table.front();
    case GenKind::slot_table: return gen.table[base_slot];
    case GenKind::setting_table: return gen.table[require_index(model, setting)];
    case GenKind::setting_slot_table: return gen.table[require_index(model, setting) * slots + base_slot];
    case GenKind::hashed: {
      const std::uint64_t h = rng::splitmix64(gen.seed ^ rng::splitmix64(std::bit_cast<std::uint64_t>(setting.angle())) ^
                                              rng::splitmix64(0x5851f42d4c957f2dULL * (base_slot + 1)));
      return static_cast<std::size_t>(h % gen.value_count);
    }
  }
  return 0;
}

int base_outcome(const LocalModel& model, const OutcomeFn& out, const Setting& setting, std::size_t lambda,
                 std::size_t value, std::size_t base_slot) {
  switch (out.kind) {
    case OutcomeKind::constant: return out.constant;
    case OutcomeKind::table: {
      const std::size_t extents[4] = {model.angles().size(), model.source().size(),
                                      model.gen(out.station).value_count, model.base_grid().slot_count()};
      std::size_t index = 0;
      for (std::size_t k = 0; k < 4; ++k) {
        if (!(out.axes & kAxisOrder[k])) continue;
        std::size_t coord = 0;
        switch (kAxisOrder[k]) {
          case kAxisSetting: coord = require_index(model, setting); break;
          case kAxisLambda: coord = lambda; break;
          case kAxisValue: coord = value; break;
          case kAxisSlot: coord = base_slot; break;
        }
        index = index * extents[k] + coord;
      }
      return out.table[index];
    }
    case OutcomeKind::cos_threshold: {
      double phase = setting.angle() - out.lambda_phase[lambda];
      if (!out.value_phase.empty()) phase -= out.value_phase[value];
      return std::cos(phase) >= 0 ? out.polarity : -out.polarity;
    }
  }
  return 1;
}

}  // namespace

std::size_t LocalModel::instrument_value(const Setting& setting, std::size_t slot) const {
  check_slot(slot);
  const auto r = resolve(setting.station(), 0, slot);
  return gen_value(*this, gen(setting.station()), setting, r.base_slot);
}

int LocalModel::outcome_given_value(const Setting& setting, std::size_t lambda, std::size_t value,
                                    std::size_t slot) const {
  check_slot(slot);
  check_lambda(lambda);
  const Station station = setting.station();
  if (value >= gen(station).value_count) {
    throw Error(ErrorCode::invalid_model, fmt::format("instrument value {} outside value space", value));
  }
  const auto r = resolve(station, lambda, slot);
  return r.sign * base_outcome(*this, out(station), setting, lambda, value, r.base_slot);
}

StationOutput LocalModel::evaluate(const Setting& setting, std::size_t lambda, std::size_t slot) const {
  check_slot(slot);
  check_lambda(lambda);
  const Station station = setting.station();
  const auto r = resolve(station, lambda, slot);
  const std::size_t value = gen_value(*this, gen(station), setting, r.base_slot);
  return {value, r.sign * base_outcome(*this, out(station), setting, lambda, value, r.base_slot)};
}

bool LocalModel::slot_invariant(const Setting& setting) const {
  for (std::size_t l = 0; l < source_.size(); ++l) {
    const int first = evaluate(setting, l, 0).outcome;
    for (std::size_t m = 1; m < grid_.slot_count(); ++m) {
      if (evaluate(setting, l, m).outcome != first) return false;
    }
  }
  return true;
}

LocalModel LocalModel::with_transform(Transform transform) const {
  LocalModel next = *this;
  if (auto* s = std::get_if<SlotSignTransform>(&transform)) {
    if (slot_sign()) throw Error(ErrorCode::already_signed, fmt::format("model '{}' already carries a slot sign", name_));
    if (s->sign.size() != grid_.slot_count()) {
      throw Error(ErrorCode::grid_mismatch, fmt::format("sign function has {} slots, model grid has {}",
                                                        s->sign.size(), grid_.slot_count()));
    }
    if (std::abs(SignFunction(grid_, s->sign.values()).mean() - s->sign.mean()) > kMassTolerance) {
      throw Error(ErrorCode::grid_mismatch, "sign function was built for a grid with different weights");
    }
  } else if (auto* l = std::get_if<LambdaSignTransform>(&transform)) {
    if (lambda_sign()) throw Error(ErrorCode::already_signed, fmt::format("model '{}' already carries a source sign", name_));
    if (l->signs.size() != source_.size()) {
      throw Error(ErrorCode::invalid_model, "source sign needs one entry per source state");
    }
    for (int v : l->signs) check_sign(v, "source sign");
  } else {
    if (is_layer_doubled()) throw Error(ErrorCode::already_doubled, fmt::format("model '{}' is already layer-doubled", name_));
    std::vector<double> weights;
    weights.reserve(2 * grid_.slot_count());
    for (double w : grid_.weights()) {
      weights.push_back(w / 2);
      weights.push_back(w / 2);
    }
    next.grid_ = TimeGrid(std::move(weights));
  }
  next.transforms_.push_back(std::move(transform));
  return next;
}

LocalModel LocalModel::with_station_seeds(std::uint64_t seed1, std::uint64_t seed2) const {
  LocalModel next = *this;
  next.gen1_.seed = seed1;
  next.gen2_.seed = seed2;
  return next;
}

LocalModel LocalModel::renamed(std::string name) const {
  if (name.empty()) throw Error(ErrorCode::invalid_model, "model needs a name");
  LocalModel next = *this;
  next.name_ = std::move(name);
  return next;
}

int evaluate_outcome(const LocalModel& model, Station station, const Setting& setting, std::size_t lambda,
                     std::size_t slot) {
  if (setting.station() != station) {
    throw Error(ErrorCode::station_mismatch, fmt::format("{} setting passed to {} evaluation",
                                                         to_string(setting.station()), to_string(station)));
  }
  return model.evaluate(setting, lambda, slot).outcome;
}

}  // namespace bellsim
