#pragma once

// Marginal-zeroing transforms. Each returns a new model and leaves the input
// untouched.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "bellsim/model.hpp"

namespace bellsim {

/// ±1 function on a uniform grid with exactly k slots at +1, where
/// target_mean = (2k - N) / N. The +1 slots are placed by a seeded shuffle.
SignFunction make_sign_function(const TimeGrid& grid, double target_mean, std::uint64_t seed);

/// Multiplies outcomes by r(m). The default scope applies the same r at both
/// stations so r(m)^2 = 1 leaves every product AB unchanged; a one-sided scope
/// scales pair correlations instead.
LocalModel time_symmetrize(const LocalModel& model, const SignFunction& sign, SignScope scope = SignScope::both,
                           std::optional<std::uint64_t> seed = std::nullopt);

struct MarginalTarget {
  double alpha = 0;
  /// One-sided marginal before the transform.
  double base = 0;
  double achieved = 0;
  double sign_mean = 0;
  bool feasible = false;
};

struct TargetOptions {
  /// Round alpha/base to the nearest mean representable on the grid instead of
  /// failing.
  bool round = false;
  SignScope scope = SignScope::both;
};

/// Installs a sign function with mean alpha/base so that the one-sided
/// marginal at `setting` becomes alpha. Exact when the outcome at `setting`
/// does not vary with the slot; `achieved` always reports the exact value.
std::pair<LocalModel, MarginalTarget> target_marginal(const LocalModel& model, const Setting& setting, double alpha,
                                                      std::uint64_t seed, const TargetOptions& options = {});

/// Each slot m becomes the pair (m, m') with half the weight each and both
/// outcomes negated on m'.
LocalModel layer_double(const LocalModel& model);

/// Negative control: sign chosen per source state rather than per slot.
LocalModel lambda_symmetrize(const LocalModel& model, std::vector<int> signs, SignScope scope = SignScope::both);

}  // namespace bellsim
