#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bellsim/model.hpp"

namespace bellsim {

struct ZooEntry {
  std::string name;
  std::string summary;
};

/// Catalogue of built-in models, in listing order.
const std::vector<ZooEntry>& zoo_entries();

/// Builds a catalogue model; throws unknown-zoo-entry for other names.
LocalModel make_model(std::string_view zoo_name);

std::vector<LocalModel> all_zoo_models();

struct RandomModelLimits {
  std::size_t max_lambdas = 8;
  std::size_t max_slots = 8;
  std::size_t max_values = 16;
};

/// Seeded random model over the test angle grid with tabulated outcome rules
/// depending on every local input. With `factorized`, the instrument
/// parameters depend on the setting only, so they are conditionally
/// independent given λ; otherwise they depend on setting and slot.
LocalModel random_model(std::uint64_t seed, const RandomModelLimits& limits = {}, bool factorized = true);

}  // namespace bellsim
