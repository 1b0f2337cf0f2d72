#pragma once

#include <cmath>
#include <string>

#include "bellsim/model.hpp"
#include "bellsim/stations.hpp"

namespace bellsim::testing {

inline InstrumentParamGen constant_gen(Station station, std::size_t value = 0, std::size_t count = 1) {
  return {station, GenKind::constant, count, {value}, 0};
}

inline OutcomeFn constant_out(Station station, int value) {
  OutcomeFn out;
  out.station = station;
  out.constant = value;
  return out;
}

/// A = a_value, B = b_value everywhere, one source state.
inline LocalModel constant_model(int a_value, int b_value, std::size_t slots) {
  return LocalModel("constant", SourceSpace({"l0"}, {1.0}), TimeGrid(slots), {kTestAngles.begin(), kTestAngles.end()},
                    constant_gen(Station::S1), constant_gen(Station::S2), constant_out(Station::S1, a_value),
                    constant_out(Station::S2, b_value));
}

inline Setting s1(double angle) { return Setting(Station::S1, angle); }
inline Setting s2(double angle) { return Setting(Station::S2, angle); }

/// Test fixture that breaks locality: S1's outcome also reads the remote
/// setting b.
class LeakyEngine final : public StationEngine {
 public:
  explicit LeakyEngine(const LocalModel& model) : model_(model) {}

  StationOutput compute(Station station, const TrialContext& ctx) const override {
    if (station == Station::S2) return model_.evaluate(ctx.b, ctx.lambda, ctx.slot);
    StationOutput out = model_.evaluate(ctx.a, ctx.lambda, ctx.slot);
    if (std::cos(ctx.a.angle() - ctx.b.angle()) < 0) out.outcome = -out.outcome;
    return out;
  }

 private:
  const LocalModel& model_;
};

}  // namespace bellsim::testing
