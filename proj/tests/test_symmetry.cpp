#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bellsim/density.hpp"
#include "bellsim/error.hpp"
#include "bellsim/inequality.hpp"
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

std::vector<LocalModel> sample_models() {
  std::vector<LocalModel> models = all_zoo_models();
  for (std::uint64_t seed = 0; seed < 100; ++seed) models.push_back(random_model(seed, {}, seed % 3 != 0));
  return models;
}

}  // namespace

TEST_CASE("sign functions hit their mean exactly") {
  const auto balanced = make_sign_function(TimeGrid(4), 0.0, 7);
  CHECK(std::count(balanced.values().begin(), balanced.values().end(), 1) == 2);
  CHECK(balanced.mean() == 0.0);

  const auto three_quarters = make_sign_function(TimeGrid(4), 0.5, 7);
  CHECK(std::count(three_quarters.values().begin(), three_quarters.values().end(), 1) == 3);
  CHECK(three_quarters.mean() == 0.5);

  CHECK(make_sign_function(TimeGrid(4), 1.0, 3).values() == std::vector<int>{1, 1, 1, 1});
  CHECK(make_sign_function(TimeGrid(4), -1.0, 3).values() == std::vector<int>{-1, -1, -1, -1});

  CHECK(code_of([] { make_sign_function(TimeGrid(3), 0.0, 1); }) == ErrorCode::infeasible_mean);
  CHECK(code_of([] { make_sign_function(TimeGrid(4), 0.3, 1); }) == ErrorCode::infeasible_mean);
  CHECK(code_of([] { make_sign_function(TimeGrid(4), 1.5, 1); }) == ErrorCode::infeasible_mean);
  CHECK(code_of([] { make_sign_function(TimeGrid(std::vector<double>{0.5, 0.25, 0.25}), 0.0, 1); }) ==
        ErrorCode::infeasible_mean);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto r = make_sign_function(TimeGrid(16), 0.25, seed);
    CHECK(std::accumulate(r.values().begin(), r.values().end(), 0) == 4);
    CHECK(r.values() == make_sign_function(TimeGrid(16), 0.25, seed).values());
  }
  CHECK(make_sign_function(TimeGrid(16), 0.0, 1).values() != make_sign_function(TimeGrid(16), 0.0, 2).values());
}

TEST_CASE("balanced time symmetrization zeroes marginals and keeps correlations") {
  for (const auto& model : sample_models()) {
    if (model.grid().slot_count() % 2 != 0) continue;
    CAPTURE(model.name());
    const auto sym = time_symmetrize(model, make_sign_function(model.grid(), 0.0, 5));
    for (double x : model.angles()) {
      for (double y : model.angles()) {
        const auto before = correlate(model, s1(x), s2(y));
        const auto after = correlate(sym, s1(x), s2(y));
        CHECK(std::abs(after.e_ab - before.e_ab) <= 1e-12);
      }
      for (const auto& st : {s1(x), s2(x)}) {
        if (!model.slot_invariant(st)) continue;
        CHECK(std::abs(exact_marginal(sym, st)) <= 1e-12);
        for (double c : conditional_expectations(sym, st)) CHECK(std::abs(c) <= 1e-12);
      }
    }
  }
}

TEST_CASE("an unbalanced sign function scales a constant marginal") {
  const auto model = constant_model(1, 1, 4);
  const auto sym = time_symmetrize(model, make_sign_function(model.grid(), 0.5, 9));
  CHECK(exact_marginal(sym, s1(0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(exact_marginal(sym, s2(0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(correlate(sym, s1(0), s2(0)).e_ab == 1.0);
}

TEST_CASE("one-sided scope scales pair correlations") {
  const auto model = constant_model(1, -1, 4);
  const auto r = make_sign_function(model.grid(), 0.5, 4);
  const auto left = time_symmetrize(model, r, SignScope::s1_only);
  CHECK(std::abs(correlate(left, s1(0), s2(0)).e_ab - (-0.5)) <= 1e-12);
  CHECK(exact_marginal(left, s2(0)) == -1.0);
  const auto right = time_symmetrize(model, r, SignScope::s2_only);
  CHECK(exact_marginal(right, s1(0)) == 1.0);
  CHECK(std::abs(exact_marginal(right, s2(0)) - (-0.5)) <= 1e-12);
}

TEST_CASE("time symmetrization rejects misuse") {
  const auto model = make_model("bell_product_basic");
  const auto sym = time_symmetrize(model, make_sign_function(model.grid(), 0.0, 1));
  CHECK(code_of([&] { time_symmetrize(sym, make_sign_function(model.grid(), 0.0, 2)); }) ==
        ErrorCode::already_signed);
  CHECK(code_of([&] { time_symmetrize(model, make_sign_function(TimeGrid(6), 0.0, 2)); }) ==
        ErrorCode::grid_mismatch);
  CHECK(model.transforms().empty());
}

TEST_CASE("target marginal") {
  const auto model = constant_model(1, 1, 4);
  SUBCASE("alpha zero") {
    const auto [out, t] = target_marginal(model, s1(0), 0.0, 3);
    CHECK(t.feasible);
    CHECK(t.base == 1.0);
    CHECK(t.sign_mean == 0.0);
    CHECK(std::abs(t.achieved) <= 1e-12);
    CHECK(std::abs(exact_marginal(out, s1(0))) <= 1e-12);
  }
  SUBCASE("alpha equal to the base marginal is the identity") {
    const auto [out, t] = target_marginal(model, s1(0), 1.0, 3);
    CHECK(t.achieved == 1.0);
    for (std::size_t m = 0; m < 4; ++m) CHECK(out.evaluate(s1(0), 0, m) == model.evaluate(s1(0), 0, m));
  }
  SUBCASE("negative alpha") {
    const auto [out, t] = target_marginal(model, s2(0), -0.5, 3);
    CHECK(std::abs(exact_marginal(out, s2(0)) - (-0.5)) <= 1e-12);
  }
  SUBCASE("alpha beyond the base marginal is infeasible") {
    const LocalModel direct("half", SourceSpace({"a", "b", "c", "d"}, {0.25, 0.25, 0.25, 0.25}), TimeGrid(4),
                            {0.0}, constant_gen(Station::S1), constant_gen(Station::S2),
                            [] {
                              OutcomeFn f;
                              f.station = Station::S1;
                              f.kind = OutcomeKind::table;
                              f.axes = kAxisLambda;
                              f.table = {1, 1, 1, -1};
                              return f;
                            }(),
                            constant_out(Station::S2, 1));
    CHECK(exact_marginal(direct, s1(0)) == 0.5);
    CHECK(code_of([&] { target_marginal(direct, s1(0), 0.75, 1); }) == ErrorCode::infeasible_target);
    const auto [ok, t] = target_marginal(direct, s1(0), 0.25, 1);
    CHECK(std::abs(t.achieved - 0.25) <= 1e-12);
  }
  SUBCASE("unrepresentable means fail unless rounding is requested") {
    CHECK(code_of([&] { target_marginal(model, s1(0), 0.3, 1); }) == ErrorCode::infeasible_target);
    TargetOptions options;
    options.round = true;
    const auto [out, t] = target_marginal(model, s1(0), 0.3, 1, options);
    CHECK(t.sign_mean == 0.5);
    CHECK(std::abs(t.achieved - 0.5) <= 1e-12);
  }
}

TEST_CASE("layer doubling") {
  for (const auto& model : sample_models()) {
    CAPTURE(model.name());
    const auto doubled = layer_double(model);
    const std::size_t n = model.grid().slot_count();
    REQUIRE(doubled.grid().slot_count() == 2 * n);
    double mass = 0;
    for (double w : doubled.grid().weights()) mass += w;
    CHECK(std::abs(mass - 1.0) <= 1e-12);
    CHECK(doubled.flip_mask()[0] == 1);
    CHECK(doubled.flip_mask()[1] == -1);

    for (double x : model.angles()) {
      for (const auto& st : {s1(x), s2(x)}) {
        for (std::size_t l = 0; l < model.source().size(); ++l) {
          for (std::size_t m = 0; m < n; ++m) {
            const auto even = doubled.evaluate(st, l, 2 * m);
            const auto odd = doubled.evaluate(st, l, 2 * m + 1);
            CHECK(even.outcome + odd.outcome == 0);
            CHECK(even.outcome == model.evaluate(st, l, m).outcome);
            CHECK(even.instrument_value == odd.instrument_value);
          }
        }
        CHECK(std::abs(exact_marginal(doubled, st)) <= 1e-12);
        for (double c : conditional_expectations(doubled, st)) CHECK(std::abs(c) <= 1e-12);
      }
      for (double y : model.angles()) {
        CHECK(std::abs(correlate(doubled, s1(x), s2(y)).e_ab - correlate(model, s1(x), s2(y)).e_ab) <= 1e-12);
      }
    }
    CHECK(code_of([&] { layer_double(doubled); }) == ErrorCode::already_doubled);
  }
}

TEST_CASE("flipping twice restores the original outcomes") {
  const auto model = make_model("hashed_clock");
  const auto doubled = layer_double(model);
  for (std::size_t j = 0; j < doubled.grid().slot_count(); ++j) {
    const int flip = doubled.flip_mask()[j];
    for (std::size_t l = 0; l < 3; ++l) {
      CHECK(flip * flip * model.evaluate(s1(0), l, j / 2).outcome == model.evaluate(s1(0), l, j / 2).outcome);
      CHECK(flip * doubled.evaluate(s1(0), l, j).outcome == model.evaluate(s1(0), l, j / 2).outcome);
    }
  }
}

TEST_CASE("CHSH is invariant under both transforms") {
  for (const auto& model : sample_models()) {
    CAPTURE(model.name());
    const auto& ang = model.angles();
    if (ang.size() < 2) continue;
    const ChshSettings settings{s1(ang[0]), s1(ang[1]), s2(ang[ang.size() - 2]), s2(ang.back())};
    const double base = chsh(model, settings).s_value;
    CHECK(std::abs(chsh(layer_double(model), settings).s_value - base) <= 1e-12);
    if (model.grid().slot_count() % 2 == 0) {
      const auto sym = time_symmetrize(model, make_sign_function(model.grid(), 0.0, 11));
      CHECK(std::abs(chsh(sym, settings).s_value - base) <= 1e-12);
      CHECK(std::abs(chsh(layer_double(sym), settings).s_value - base) <= 1e-12);
    }
  }
}

TEST_CASE("lambda signs are a different transform") {
  const auto model = constant_model(1, 1, 4);
  const auto signed_model = lambda_symmetrize(model, {-1});
  CHECK(exact_marginal(signed_model, s1(0)) == -1.0);
  CHECK(code_of([&] { lambda_symmetrize(model, {1, -1}); }) == ErrorCode::invalid_model);
  CHECK(code_of([&] { lambda_symmetrize(model, {2}); }) == ErrorCode::codomain_violation);
}
