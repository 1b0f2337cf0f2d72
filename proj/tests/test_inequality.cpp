#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bellsim/density.hpp"
#include "bellsim/error.hpp"
#include "bellsim/inequality.hpp"
#include "bellsim/symmetry.hpp"
#include "bellsim/zoo.hpp"
#include "support.hpp"

using namespace bellsim;
using namespace bellsim::testing;

namespace {

constexpr double kPi = std::numbers::pi;

// Brute-force oracle: maximum of the CHSH combination over every ±1
// assignment, written as four nested loops per side.
double brute_force_two_setting_bound() {
  double best = -10;
  for (int a0 : {-1, 1})
    for (int a1 : {-1, 1})
      for (int b0 : {-1, 1})
        for (int b1 : {-1, 1}) best = std::max(best, double(a0 * b0 - a0 * b1 + a1 * b0 + a1 * b1));
  return best;
}

}  // namespace

TEST_CASE("constant outcomes give the product correlation") {
  const auto model = constant_model(1, -1, 4);
  const auto r = correlate(model, s1(0), s2(kPi / 2));
  CHECK(r.e_ab == -1.0);
  CHECK(r.marginal_a == 1.0);
  CHECK(r.marginal_b == -1.0);
  CHECK(r.cond_a == std::vector<double>{1.0});
  CHECK(r.std_error == 0.0);
}

TEST_CASE("a doubled constant model keeps AB = 1 with zero marginals") {
  const auto doubled = layer_double(constant_model(1, 1, 4));
  const auto r = correlate(doubled, s1(0), s2(0));
  CHECK(r.e_ab == 1.0);
  CHECK(r.marginal_a == 0.0);
  CHECK(r.marginal_b == 0.0);
}

TEST_CASE("Monte Carlo agrees with the exact sum") {
  const auto model = make_model("hashed_clock");
  const auto exact = correlate(model, s1(0), s2(kPi / 4));
  int outside = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto mc = correlate(model, s1(0), s2(kPi / 4), Method::monte_carlo, 20000, seed);
    CHECK(mc.trials == 20000);
    CHECK(mc.std_error > 0);
    if (std::abs(mc.e_ab - exact.e_ab) > 5 * mc.std_error) ++outside;
  }
  CHECK(outside == 0);
  CHECK(correlate(model, s1(0), s2(0), Method::monte_carlo, 100, 4).e_ab ==
        correlate(model, s1(0), s2(0), Method::monte_carlo, 100, 4).e_ab);
}

TEST_CASE("Monte Carlo error shrinks with the trial count") {
  const auto model = make_model("setting_dependent");
  const auto exact = correlate(model, s1(kPi / 4), s2(kPi / 2)).e_ab;
  std::vector<double> medians;
  for (std::uint64_t trials : {1000u, 10000u, 100000u}) {
    std::vector<double> errors;
    for (std::uint64_t seed = 0; seed < 21; ++seed) {
      errors.push_back(
          std::abs(correlate(model, s1(kPi / 4), s2(kPi / 2), Method::monte_carlo, trials, seed).e_ab - exact));
    }
    std::nth_element(errors.begin(), errors.begin() + 10, errors.end());
    medians.push_back(errors[10]);
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

TEST_CASE("zero Monte Carlo trials is an error") {
  try {
    correlate(make_model("constant_plus"), s1(0), s2(0), Method::monte_carlo, 0, 1);
    FAIL("expected zero-trials");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::zero_trials);
  }
}

TEST_CASE("deterministic strategies saturate the bound") {
  const auto model = constant_model(1, 1, 1);
  const auto r = chsh(model, ChshSettings{s1(0), s1(kPi / 2), s2(kPi / 4), s2(3 * kPi / 4)});
  CHECK(r.s_value == 2.0);
  CHECK(r.within_local_bound);
  CHECK(chsh_from_correlations({}, {1, -1, 1, 1}).s_value == 4.0);
  CHECK_FALSE(chsh_from_correlations({}, {1, -1, 1, 1}).within_local_bound);
  CHECK(chsh_from_correlations({}, {1, -1, 1, 1 + 1e-10}).s_value > 4.0);
}

TEST_CASE("enumerated bound") {
  const auto two = deterministic_bound(2);
  CHECK(two.bound == brute_force_two_setting_bound());
  CHECK(two.bound == 2.0);
  CHECK(two.strategies_visited == 16);
  const auto three = deterministic_bound(3);
  CHECK(three.bound == 2.0);
  CHECK(three.strategies_visited == 64);
  for (int bad : {0, 1, 4}) {
    try {
      deterministic_bound(bad);
      FAIL("expected unsupported-size");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::unsupported_size);
    }
  }
}

TEST_CASE("singlet reference") {
  CHECK(reference_correlation(s1(0), s2(0)) == -1.0);
  CHECK(std::abs(reference_correlation(s1(0), s2(kPi / 2))) <= 1e-15);
  CHECK(std::abs(reference_correlation(s1(0), s2(kPi / 4)) + std::sqrt(0.5)) <= 1e-15);
  const auto r = reference_chsh(optimal_chsh_settings());
  CHECK(std::abs(r.s_value + 2 * std::numbers::sqrt2) <= 1e-12);
  CHECK(std::abs(std::abs(r.s_value) - 2.0 * std::numbers::sqrt2) <= 1e-12);
  CHECK_FALSE(r.within_local_bound);
}

TEST_CASE("local models never exceed the bound") {
  const auto settings = optimal_chsh_settings();
  for (const auto& model : all_zoo_models()) {
    CAPTURE(model.name());
    const auto r = chsh(model, settings);
    CHECK(std::abs(r.s_value) <= 2 + kBoundTolerance);
    CHECK(r.within_local_bound);
  }
  CHECK(chsh(make_model("bell_product_basic"), settings).s_value == doctest::Approx(-2.0).epsilon(1e-12));
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    for (bool factorized : {true, false}) {
      const auto model = random_model(seed, {}, factorized);
      const auto& ang = model.angles();
      for (std::size_t i = 0; i + 1 < ang.size(); ++i) {
        const ChshSettings s{s1(ang[i]), s1(ang[i + 1]), s2(ang[ang.size() - 1 - i]), s2(ang[0])};
        CHECK(std::abs(chsh(model, s).s_value) <= 2 + kBoundTolerance);
      }
    }
  }
}

TEST_CASE("chsh rejects non-positive tolerances") {
  for (double tol : {0.0, -1e-9}) {
    try {
      chsh(make_model("constant_plus"), optimal_chsh_settings(), Method::exact, 0, 0, tol);
      FAIL("expected invalid-tolerance");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_tolerance);
    }
  }
}

TEST_CASE("table-based correlations match the direct sum") {
  std::vector<LocalModel> models = all_zoo_models();
  for (std::uint64_t seed = 0; seed < 30; ++seed) models.push_back(random_model(seed, {}, false));
  for (const auto& model : models) {
    for (double x : model.angles()) {
      for (double y : model.angles()) {
        const auto direct = correlate(model, s1(x), s2(y));
        const auto tabled = correlate_from_table(model, tabulate_joint(model, s1(x), s2(y)));
        CHECK(std::abs(direct.e_ab - tabled.e_ab) <= 1e-12);
        CHECK(std::abs(direct.marginal_a - tabled.marginal_a) <= 1e-12);
        for (std::size_t l = 0; l < direct.cond_a.size(); ++l) {
          CHECK(std::abs(direct.cond_a[l] - tabled.cond_a[l]) <= 1e-12);
          CHECK(std::abs(direct.cond_b[l] - tabled.cond_b[l]) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("source signs leave conditional expectations nonzero") {
  const auto model = make_model("bell_lambda_only");
  const auto by_lambda = lambda_symmetrize(model, {1, -1, 1, -1});
  const auto by_slot = time_symmetrize(model, make_sign_function(model.grid(), 0.0, 2));
  for (double x : model.angles()) {
    const auto cl = conditional_expectations(by_lambda, s1(x));
    CHECK(std::all_of(cl.begin(), cl.end(), [](double c) { return std::abs(c) >= 0.5; }));
    const auto ct = conditional_expectations(by_slot, s1(x));
    CHECK(std::all_of(ct.begin(), ct.end(), [](double c) { return std::abs(c) <= 1e-12; }));
  }
}

TEST_CASE("method names") {
  CHECK(parse_method("exact") == Method::exact);
  CHECK(parse_method("mc") == Method::monte_carlo);
  CHECK(parse_method(to_string(Method::monte_carlo)) == Method::monte_carlo);
  CHECK_THROWS_AS(parse_method("guess"), Error);
}
