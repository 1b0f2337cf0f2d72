#pragma once

// Plain-text model and schedule descriptors.
//
//   [model]      name, angles (setting alphabet)
//   [source]     states, prior
//   [grid]       slots, optional weights
//   [gen1|gen2]  kind, values, table | table_file, seed
//   [out1|out2]  kind; constant: value; table: axes, table | table_file;
//                cos_threshold: lambda_phase, value_phase, polarity
//   [transform]  steps, stepK = time_symmetrize | lambda_sign | layer_double,
//                stepK_scope, stepK_signs, stepK_seed, stepK_mean
//   [schedule]   trials, policy, angles_a, angles_b, seed_source,
//                seed_settings, seed_s1, seed_s2
//
// Lists are comma separated. `table_file` paths are relative to the
// descriptor and hold comma/newline separated numbers.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "bellsim/model.hpp"
#include "bellsim/stations.hpp"

namespace bellsim {

LocalModel parse_model(std::istream& in, const std::filesystem::path& base_dir = {});
LocalModel load_model(const std::filesystem::path& path);

/// Writes a descriptor that parse_model reads back to an identical model.
/// `comment` lines are emitted first, each prefixed with "; ".
void write_model(std::ostream& out, const LocalModel& model, std::string_view comment = {});
std::string model_to_string(const LocalModel& model);

/// Zoo name, or a path to a descriptor file.
LocalModel resolve_model(std::string_view name_or_path);

/// Reads the [schedule] section, starting from `defaults`; a descriptor
/// without one yields `defaults` unchanged.
Schedule parse_schedule(std::istream& in, Schedule defaults = {});
Schedule load_schedule(const std::filesystem::path& path, Schedule defaults = {});

void write_schedule(std::ostream& out, const Schedule& schedule);

}  // namespace bellsim
