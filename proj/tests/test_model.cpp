#include <doctest.h>

#include <numbers>

#include "bellsim/error.hpp"
#include "bellsim/model.hpp"
#include "bellsim/symmetry.hpp"
#include "bellsim/zoo.hpp"
#include "support.hpp"

using namespace bellsim;
using namespace bellsim::testing;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::config_error;
}

}  // namespace

TEST_CASE("settings are normalized into [0, 2pi)") {
  CHECK(Setting(Station::S1, -std::numbers::pi / 2).angle() == doctest::Approx(3 * std::numbers::pi / 2));
  CHECK(Setting(Station::S2, 2 * std::numbers::pi).angle() == 0.0);
  CHECK(Setting(Station::S2, 5 * std::numbers::pi).angle() == doctest::Approx(std::numbers::pi));
  CHECK(Setting(Station::S1, 1.0).station() == Station::S1);
}

TEST_CASE("source and grid validation") {
  CHECK(code_of([] { SourceSpace({"a", "b"}, {0.6, 0.6}); }) == ErrorCode::invalid_weights);
  CHECK(code_of([] { SourceSpace({"a"}, {-1.0}); }) == ErrorCode::invalid_weights);
  CHECK(code_of([] { SourceSpace({}, {}); }) == ErrorCode::invalid_weights);
  CHECK(code_of([] { TimeGrid(0); }) == ErrorCode::invalid_weights);
  CHECK(code_of([] { TimeGrid(std::vector<double>{0.5, 0.4}); }) == ErrorCode::invalid_weights);
  CHECK(TimeGrid(std::vector<double>{0.25, 0.75}).is_uniform() == false);
  CHECK(TimeGrid(3).is_uniform());
}

TEST_CASE("model construction rejects codomain violations") {
  CHECK(code_of([] { constant_model(0, 1, 2); }) == ErrorCode::codomain_violation);
  CHECK(code_of([] { constant_model(1, 2, 2); }) == ErrorCode::codomain_violation);

  OutcomeFn bad;
  bad.station = Station::S1;
  bad.kind = OutcomeKind::table;
  bad.axes = kAxisLambda;
  bad.table = {1, 3};
  CHECK(code_of([&] {
          LocalModel("m", SourceSpace({"a", "b"}, {0.5, 0.5}), TimeGrid(2), {0.0}, constant_gen(Station::S1),
                     constant_gen(Station::S2), bad, constant_out(Station::S2, 1));
        }) == ErrorCode::codomain_violation);

  bad.table = {1};
  CHECK(code_of([&] {
          LocalModel("m", SourceSpace({"a", "b"}, {0.5, 0.5}), TimeGrid(2), {0.0}, constant_gen(Station::S1),
                     constant_gen(Station::S2), bad, constant_out(Station::S2, 1));
        }) == ErrorCode::invalid_model);
}

TEST_CASE("generators and outcome rules are station typed") {
  CHECK(code_of([] {
          LocalModel("m", SourceSpace({"a"}, {1.0}), TimeGrid(1), {0.0}, constant_gen(Station::S2),
                     constant_gen(Station::S2), constant_out(Station::S1, 1), constant_out(Station::S2, 1));
        }) == ErrorCode::station_mismatch);
}

TEST_CASE("make_model knows the zoo and rejects other names") {
  for (const auto& entry : zoo_entries()) CHECK(make_model(entry.name).name() == entry.name);
  CHECK(code_of([] { make_model("no_such_model"); }) == ErrorCode::unknown_zoo_entry);
  CHECK(all_zoo_models().size() >= 4);
}

TEST_CASE("evaluate_outcome: constants, sign installation and the station guard") {
  const auto model = constant_model(1, 1, 4);
  for (std::size_t m = 0; m < 4; ++m) {
    for (double angle : kTestAngles) CHECK(evaluate_outcome(model, Station::S1, s1(angle), 0, m) == 1);
  }

  // r(m) = (-1)^m with 1-based m: -1, +1, -1, +1 on internal slots 0..3.
  const SignFunction r(model.grid(), {-1, 1, -1, 1});
  const auto signed_model = time_symmetrize(model, r);
  for (std::size_t m = 0; m < 4; ++m) {
    const int expected = (m + 1) % 2 == 0 ? 1 : -1;
    CHECK(evaluate_outcome(signed_model, Station::S1, s1(0), 0, m) == expected);
    CHECK(evaluate_outcome(signed_model, Station::S2, s2(0), 0, m) == expected);
  }

  CHECK(code_of([&] { evaluate_outcome(model, Station::S1, s2(0), 0, 0); }) == ErrorCode::station_mismatch);
  CHECK(code_of([&] { evaluate_outcome(model, Station::S2, s1(0), 0, 0); }) == ErrorCode::station_mismatch);
}

TEST_CASE("table rules refuse settings outside the alphabet") {
  const auto model = make_model("bell_lambda_only");
  CHECK(code_of([&] { model.evaluate(s1(0.3), 0, 0); }) == ErrorCode::setting_off_grid);
  CHECK(model.setting_index(2 * std::numbers::pi + std::numbers::pi / 4) == std::optional<std::size_t>(1));
}

TEST_CASE("zoo evaluation is deterministic with codomain exactly +-1") {
  for (const auto& model : all_zoo_models()) {
    for (double angle : kTestAngles) {
      for (Station st : {Station::S1, Station::S2}) {
        const Setting setting(st, angle);
        for (std::size_t l = 0; l < model.source().size(); ++l) {
          for (std::size_t m = 0; m < model.grid().slot_count(); ++m) {
            const auto first = model.evaluate(setting, l, m);
            CHECK((first.outcome == 1 || first.outcome == -1));
            CHECK(first.instrument_value < model.gen(st).value_count);
            CHECK(model.evaluate(setting, l, m) == first);
          }
        }
      }
    }
  }
}

TEST_CASE("hp_time_correlated stations read the same clock parameter") {
  const auto model = make_model("hp_time_correlated");
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(model.instrument_value(s1(0), m) == m);
    CHECK(model.instrument_value(s2(std::numbers::pi / 2), m) == m);
  }
}

TEST_CASE("random models respect their limits") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto model = random_model(seed);
    CHECK(model.source().size() <= 8);
    CHECK(model.grid().slot_count() <= 8);
    CHECK(model.gen(Station::S1).value_count <= 16);
    CHECK(model.gen(Station::S2).value_count <= 16);
    CHECK_FALSE(model.gen(Station::S1).depends_on_slot());
    CHECK(random_model(seed, {}, false).gen(Station::S1).depends_on_slot());
  }
}
