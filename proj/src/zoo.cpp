#include "bellsim/zoo.hpp"

#include <fmt/format.h>

#include "bellsim/error.hpp"
#include "bellsim/rng.hpp"

namespace bellsim {

namespace {

std::vector<double> test_angles() { return {kTestAngles.begin(), kTestAngles.end()}; }

InstrumentParamGen constant_gen(Station station) { return {station, GenKind::constant, 1, {0}, 0}; }

OutcomeFn constant_out(Station station, int value) {
  OutcomeFn out;
  out.station = station;
  out.kind = OutcomeKind::constant;
  out.constant = value;
  return out;
}

OutcomeFn table_out(Station station, unsigned axes, std::vector<int> table) {
  OutcomeFn out;
  out.station = station;
  out.kind = OutcomeKind::table;
  out.axes = axes;
  out.table = std::move(table);
  return out;
}

OutcomeFn cos_out(Station station, std::vector<double> lambda_phase, std::vector<double> value_phase,
                  int polarity) {
  OutcomeFn out;
  out.station = station;
  out.kind = OutcomeKind::cos_threshold;
  out.lambda_phase = std::move(lambda_phase);
  out.value_phase = std::move(value_phase);
  out.polarity = polarity;
  return out;
}

LocalModel constant_plus() {
  return LocalModel("constant_plus", SourceSpace({"l0"}, {1.0}), TimeGrid(4), test_angles(),
                    constant_gen(Station::S1), constant_gen(Station::S2), constant_out(Station::S1, 1),
                    constant_out(Station::S2, 1));
}

// Instrument values depend on the local setting only; outcomes are Bell-style
// threshold functions of (setting, λ).
LocalModel bell_product_basic() {
  constexpr double pi = std::numbers::pi;
  return LocalModel("bell_product_basic", SourceSpace({"l0", "l1"}, {0.5, 0.5}), TimeGrid(4), test_angles(),
                    {Station::S1, GenKind::setting_table, 4, {0, 1, 2, 3}, 0},
                    {Station::S2, GenKind::setting_table, 4, {3, 2, 1, 0}, 0},
                    cos_out(Station::S1, {0.0, pi / 2}, {}, 1), cos_out(Station::S2, {0.0, pi / 2}, {}, -1));
}

// Both stations read the same clock-driven parameter f(m) = m.
LocalModel hp_time_correlated() {
  std::vector<int> out1(16), out2(16);
  for (int s = 0; s < 4; ++s) {
    for (int v = 0; v < 4; ++v) {
      out1[s * 4 + v] = (s + v) % 4 < 2 ? 1 : -1;
      out2[s * 4 + v] = (s + 3 * v) % 4 < 2 ? -1 : 1;
    }
  }
  return LocalModel("hp_time_correlated", SourceSpace({"l0"}, {1.0}), TimeGrid(4), test_angles(),
                    {Station::S1, GenKind::slot_table, 4, {0, 1, 2, 3}, 0},
                    {Station::S2, GenKind::slot_table, 4, {0, 1, 2, 3}, 0},
                    table_out(Station::S1, kAxisSetting | kAxisValue, out1),
                    table_out(Station::S2, kAxisSetting | kAxisValue, out2));
}

// Instrument values depend on both the local setting and the slot, so the
// tabulated joint density changes with the setting pair.
LocalModel setting_dependent() {
  std::vector<std::size_t> g1(16), g2(16);
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t m = 0; m < 4; ++m) {
      g1[s * 4 + m] = (s + m) % 4;
      g2[s * 4 + m] = (2 * s + m) % 4;
    }
  }
  std::vector<int> out1(8), out2(8);
  for (int l = 0; l < 2; ++l) {
    for (int v = 0; v < 4; ++v) {
      out1[l * 4 + v] = (v + l) % 2 == 0 ? 1 : -1;
      out2[l * 4 + v] = v < 2 ? (l == 0 ? 1 : -1) : (l == 0 ? -1 : 1);
    }
  }
  return LocalModel("setting_dependent", SourceSpace({"l0", "l1"}, {0.25, 0.75}), TimeGrid(4), test_angles(),
                    {Station::S1, GenKind::setting_slot_table, 4, g1, 0},
                    {Station::S2, GenKind::setting_slot_table, 4, g2, 0},
                    table_out(Station::S1, kAxisLambda | kAxisValue, out1),
                    table_out(Station::S2, kAxisLambda | kAxisValue, out2));
}

// Outcomes tabulated on (setting, λ) with no instrument parameters at all.
LocalModel bell_lambda_only() {
  const std::vector<int> out1 = {1, 1, -1, 1,   //
                                 1, -1, -1, 1,  //
                                 -1, 1, 1, 1,   //
                                 1, 1, 1, -1};
  const std::vector<int> out2 = {-1, 1, 1, -1,  //
                                 -1, -1, 1, 1,  //
                                 1, -1, -1, 1,  //
                                 -1, 1, -1, -1};
  return LocalModel("bell_lambda_only", SourceSpace({"l0", "l1", "l2", "l3"}, {0.1, 0.2, 0.3, 0.4}), TimeGrid(2),
                    test_angles(), constant_gen(Station::S1), constant_gen(Station::S2),
                    table_out(Station::S1, kAxisSetting | kAxisLambda, out1),
                    table_out(Station::S2, kAxisSetting | kAxisLambda, out2));
}

// Seeded hash generators of (setting, slot) on each side feeding threshold
// outcome rules.
LocalModel hashed_clock() {
  constexpr double pi = std::numbers::pi;
  std::vector<double> vphase(8);
  for (std::size_t v = 0; v < 8; ++v) vphase[v] = static_cast<double>(v) * pi / 4;
  return LocalModel("hashed_clock", SourceSpace({"l0", "l1", "l2"}, {1.0 / 3, 1.0 / 3, 1.0 / 3}), TimeGrid(8),
                    test_angles(), {Station::S1, GenKind::hashed, 8, {}, 11}, {Station::S2, GenKind::hashed, 8, {}, 23},
                    cos_out(Station::S1, {0.0, 2 * pi / 3, 4 * pi / 3}, vphase, 1),
                    cos_out(Station::S2, {0.0, 2 * pi / 3, 4 * pi / 3}, vphase, -1));
}

}  // namespace

const std::vector<ZooEntry>& zoo_entries() {
  static const std::vector<ZooEntry> entries = {
      {"constant_plus", "A = B = +1 everywhere; single source state, 4 slots"},
      {"bell_product_basic", "setting-only instrument parameters, threshold outcomes on (setting, lambda)"},
      {"hp_time_correlated", "gen1 = gen2 = f(m) = m on 4 slots; outcomes read the shared parameter"},
      {"setting_dependent", "instrument parameters depend on setting and slot; setting-dependent density"},
      {"bell_lambda_only", "tabulated outcomes on (setting, lambda), four weighted source states"},
      {"hashed_clock", "seeded hash generators of (setting, slot), threshold outcomes, 8 slots"},
  };
  return entries;
}

LocalModel make_model(std::string_view zoo_name) {
  if (zoo_name == "constant_plus") return constant_plus();
  if (zoo_name == "bell_product_basic") return bell_product_basic();
  if (zoo_name == "hp_time_correlated") return hp_time_correlated();
  if (zoo_name == "setting_dependent") return setting_dependent();
  if (zoo_name == "bell_lambda_only") return bell_lambda_only();
  if (zoo_name == "hashed_clock") return hashed_clock();
  throw Error(ErrorCode::unknown_zoo_entry, fmt::format("no zoo model named '{}'", zoo_name));
}

std::vector<LocalModel> all_zoo_models() {
  std::vector<LocalModel> models;
  for (const auto& e : zoo_entries()) models.push_back(make_model(e.name));
  return models;
}

LocalModel random_model(std::uint64_t seed, const RandomModelLimits& limits, bool factorized) {
  rng::Stream stream(rng::derive_seed(seed, 0x7a00));
  const std::size_t lambdas = 1 + stream.below(limits.max_lambdas);
  const std::size_t slots = 1 + stream.below(limits.max_slots);
  const std::size_t k1 = 1 + stream.below(limits.max_values);
  const std::size_t k2 = 1 + stream.below(limits.max_values);
  const std::size_t settings = kTestAngles.size();

  std::vector<double> prior(lambdas);
  double total = 0;
  for (auto& w : prior) total += (w = 0.05 + stream.uniform());
  for (auto& w : prior) w /= total;
  std::vector<std::string> labels;
  for (std::size_t l = 0; l < lambdas; ++l) labels.push_back(fmt::format("l{}", l));

  const auto make_gen = [&](Station station, std::size_t k) {
    InstrumentParamGen gen{station, factorized ? GenKind::setting_table : GenKind::setting_slot_table, k, {}, 0};
    gen.table.resize(factorized ? settings : settings * slots);
    for (auto& v : gen.table) v = stream.below(k);
    return gen;
  };
  const auto make_out = [&](Station station, std::size_t k) {
    std::vector<int> table(settings * lambdas * k * slots);
    for (auto& v : table) v = stream.below(2) == 0 ? 1 : -1;
    return table_out(station, kAxisSetting | kAxisLambda | kAxisValue | kAxisSlot, std::move(table));
  };
  auto gen1 = make_gen(Station::S1, k1);
  auto gen2 = make_gen(Station::S2, k2);
  auto out1 = make_out(Station::S1, k1);
  auto out2 = make_out(Station::S2, k2);
  return LocalModel(fmt::format("random_{}{}", factorized ? "factorized_" : "", seed),
                    SourceSpace(std::move(labels), std::move(prior)), TimeGrid(slots), test_angles(),
                    std::move(gen1), std::move(gen2), std::move(out1), std::move(out2));
}

}  // namespace bellsim
