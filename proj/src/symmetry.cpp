#include "bellsim/symmetry.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "bellsim/error.hpp"
#include "bellsim/inequality.hpp"
#include "bellsim/rng.hpp"

namespace bellsim {

namespace {

constexpr double kRepresentable = 1e-9;

std::optional<std::size_t> plus_count(std::size_t slots, double mean) {
  const double k = (mean + 1.0) * static_cast<double>(slots) / 2.0;
  const double rounded = std::round(k);
  if (std::abs(k - rounded) > kRepresentable || rounded < 0 || rounded > static_cast<double>(slots)) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

SignFunction make_sign_function(const TimeGrid& grid, double target_mean, std::uint64_t seed) {
  if (!grid.is_uniform()) throw Error(ErrorCode::infeasible_mean, "sign functions need a uniform grid");
  const std::size_t n = grid.slot_count();
  const auto k = plus_count(n, target_mean);
  if (!k) {
    throw Error(ErrorCode::infeasible_mean,
                fmt::format("mean {} is not of the form (2k - {}) / {} for integer k", target_mean, n, n));
  }
  std::vector<int> values(n, -1);
  std::fill_n(values.begin(), *k, 1);
  rng::Stream stream(seed);
  rng::shuffle(std::span<int>(values), stream);
  return SignFunction(grid, std::move(values));
}

LocalModel time_symmetrize(const LocalModel& model, const SignFunction& sign, SignScope scope,
                           std::optional<std::uint64_t> seed) {
  return model.with_transform(SlotSignTransform{sign, scope, seed});
}

std::pair<LocalModel, MarginalTarget> target_marginal(const LocalModel& model, const Setting& setting, double alpha,
                                                      std::uint64_t seed, const TargetOptions& options) {
  if (!(std::abs(alpha) <= 1)) throw Error(ErrorCode::infeasible_target, fmt::format("alpha {} outside [-1, 1]", alpha));
  MarginalTarget target;
  target.alpha = alpha;
  target.base = exact_marginal(model, setting);
  if (std::abs(alpha) > std::abs(target.base) + kRepresentable) {
    throw Error(ErrorCode::infeasible_target,
                fmt::format("|alpha| = {} exceeds the base marginal |{}|", std::abs(alpha), target.base));
  }
  target.feasible = true;

  const std::size_t n = model.grid().slot_count();
  double mean = std::abs(target.base) < kRepresentable ? 1.0 : alpha / target.base;
  mean = std::clamp(mean, -1.0, 1.0);
  if (options.round) {
    const double k = std::round((mean + 1.0) * static_cast<double>(n) / 2.0);
    mean = (2.0 * k - static_cast<double>(n)) / static_cast<double>(n);
  } else if (!plus_count(n, mean)) {
    throw Error(ErrorCode::infeasible_target,
                fmt::format("sign mean {} is not representable on {} slots", mean, n));
  }

  SignFunction sign = [&] {
    try {
      return make_sign_function(model.grid(), mean, seed);
    } catch (const Error& e) {
      throw Error(ErrorCode::infeasible_target, e.what());
    }
  }();
  target.sign_mean = sign.mean();
  LocalModel transformed = time_symmetrize(model, sign, options.scope, seed);
  target.achieved = exact_marginal(transformed, setting);
  return {std::move(transformed), target};
}

LocalModel layer_double(const LocalModel& model) { return model.with_transform(LayerDoubleTransform{}); }

LocalModel lambda_symmetrize(const LocalModel& model, std::vector<int> signs, SignScope scope) {
  return model.with_transform(LambdaSignTransform{std::move(signs), scope});
}

}  // namespace bellsim
