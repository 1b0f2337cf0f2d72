#include "bellsim/descriptor.hpp"

#include <fstream>
#include <optional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "bellsim/error.hpp"
#include "bellsim/format.hpp"
#include "bellsim/zoo.hpp"

namespace bellsim {

namespace pt = boost::property_tree;

namespace {

pt::ptree read_tree(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::config_error, fmt::format("descriptor line {}: {}", e.line(), e.message()));
  }
  return tree;
}

class Section {
 public:
  Section(const pt::ptree& tree, std::string name, std::filesystem::path base_dir)
      : name_(std::move(name)), base_dir_(std::move(base_dir)) {
    if (const auto child = tree.get_child_optional(name_)) node_ = &*child;
  }

  bool present() const { return node_ != nullptr; }

  std::optional<std::string> find(std::string_view key) const {
    if (!node_) return std::nullopt;
    const auto it = node_->find(std::string(key));
    if (it == node_->not_found()) return std::nullopt;
    return it->second.data();
  }

  std::string get(std::string_view key) const {
    auto v = find(key);
    if (!v) throw Error(ErrorCode::config_error, fmt::format("[{}] is missing '{}'", name_, key));
    return *v;
  }

  std::uint64_t get_uint(std::string_view key) const { return to_uint(get(key), key); }

  std::optional<std::uint64_t> find_uint(std::string_view key) const {
    auto v = find(key);
    if (!v) return std::nullopt;
    return to_uint(*v, key);
  }

  std::vector<double> get_reals(std::string_view key) const { return parse_real_list(get(key)); }

  /// Inline list under `key`, or the contents of the file under `key_file`.
  std::string list_text(std::string_view key) const {
    if (auto inline_text = find(key)) return *inline_text;
    const auto file_key = std::string(key) + "_file";
    auto path = find(file_key);
    if (!path) throw Error(ErrorCode::config_error, fmt::format("[{}] needs '{}' or '{}'", name_, key, file_key));
    std::filesystem::path p(*path);
    if (p.is_relative()) p = base_dir_ / p;
    std::ifstream f(p);
    if (!f) throw Error(ErrorCode::io_error, fmt::format("cannot read table file {}", p.string()));
    std::string text, line;
    while (std::getline(f, line)) {
      if (!line.empty() && line.front() == '#') continue;
      text += line;
      text += ',';
    }
    return text;
  }

  template <class Int>
  std::vector<Int> get_ints(std::string_view key) const {
    std::vector<Int> out;
    for (const auto& token : split_list(list_text(key))) {
      long long v = 0;
      std::size_t pos = 0;
      try {
        v = std::stoll(token, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != token.size()) {
        throw Error(ErrorCode::config_error, fmt::format("[{}] {}: '{}' is not an integer", name_, key, token));
      }
      if constexpr (std::is_unsigned_v<Int>) {
        if (v < 0) throw Error(ErrorCode::config_error, fmt::format("[{}] {}: negative entry", name_, key));
      }
      out.push_back(static_cast<Int>(v));
    }
    return out;
  }

  const std::string& name() const { return name_; }

 private:
  std::uint64_t to_uint(const std::string& text, std::string_view key) const {
    std::uint64_t v = 0;
    std::size_t pos = 0;
    try {
      if (!text.empty() && text.front() != '-') v = std::stoull(text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != text.size()) {
      throw Error(ErrorCode::config_error, fmt::format("[{}] {}: '{}' is not a non-negative integer", name_, key, text));
    }
    return v;
  }

  const pt::ptree* node_ = nullptr;
  std::string name_;
  std::filesystem::path base_dir_;
};

InstrumentParamGen read_gen(const Section& s, Station station) {
  if (!s.present()) throw Error(ErrorCode::config_error, fmt::format("descriptor has no [{}] section", s.name()));
  InstrumentParamGen gen;
  gen.station = station;
  gen.kind = parse_gen_kind(s.get("kind"));
  gen.value_count = static_cast<std::size_t>(s.get_uint("values"));
  gen.seed = s.find_uint("seed").value_or(0);
  if (gen.kind == GenKind::constant) {
    gen.table = {static_cast<std::size_t>(s.find_uint("value").value_or(0))};
  } else if (gen.kind != GenKind::hashed) {
    gen.table = s.get_ints<std::size_t>("table");
  }
  return gen;
}

OutcomeFn read_out(const Section& s, Station station) {
  if (!s.present()) throw Error(ErrorCode::config_error, fmt::format("descriptor has no [{}] section", s.name()));
  OutcomeFn out;
  out.station = station;
  out.kind = parse_outcome_kind(s.get("kind"));
  switch (out.kind) {
    case OutcomeKind::constant: {
      const auto v = s.get_ints<int>("value");
      if (v.size() != 1) throw Error(ErrorCode::config_error, fmt::format("[{}] value must be one integer", s.name()));
      out.constant = v.front();
      break;
    }
    case OutcomeKind::table:
      out.axes = parse_axes(s.find("axes").value_or(""));
      out.table = s.get_ints<int>("table");
      break;
    case OutcomeKind::cos_threshold:
      out.lambda_phase = s.get_reals("lambda_phase");
      if (auto v = s.find("value_phase")) out.value_phase = parse_real_list(*v);
      if (s.find("polarity")) {
        const auto v = s.get_ints<int>("polarity");
        out.polarity = v.size() == 1 ? v.front() : 0;
      }
      break;
  }
  return out;
}

std::string join_ints(const auto& values) {
  std::string s;
  for (const auto& v : values) {
    if (!s.empty()) s += ',';
    s += fmt::format("{}", v);
  }
  return s;
}

std::string join_reals(const std::vector<double>& values) {
  std::string s;
  for (double v : values) {
    if (!s.empty()) s += ',';
    s += format_exact(v);
  }
  return s;
}

}  // namespace

LocalModel parse_model(std::istream& in, const std::filesystem::path& base_dir) {
  const pt::ptree tree = read_tree(in);
  const Section model_s(tree, "model", base_dir);
  const Section source_s(tree, "source", base_dir);
  const Section grid_s(tree, "grid", base_dir);
  if (!source_s.present() || !grid_s.present()) {
    throw Error(ErrorCode::config_error, "descriptor needs [source] and [grid] sections");
  }

  const std::string name = model_s.find("name").value_or("unnamed");
  std::vector<double> angles(kTestAngles.begin(), kTestAngles.end());
  if (auto a = model_s.find("angles")) angles = parse_real_list(*a);

  SourceSpace source(split_list(source_s.get("states")), source_s.get_reals("prior"));
  const auto slots = grid_s.get_uint("slots");
  TimeGrid grid = grid_s.find("weights") ? TimeGrid(grid_s.get_reals("weights")) : TimeGrid(slots);
  if (grid.slot_count() != slots) {
    throw Error(ErrorCode::invalid_weights, fmt::format("{} slot weights for {} slots", grid.slot_count(), slots));
  }

  LocalModel model(name, std::move(source), std::move(grid), std::move(angles),
                   read_gen(Section(tree, "gen1", base_dir), Station::S1),
                   read_gen(Section(tree, "gen2", base_dir), Station::S2),
                   read_out(Section(tree, "out1", base_dir), Station::S1),
                   read_out(Section(tree, "out2", base_dir), Station::S2));

  const Section transform_s(tree, "transform", base_dir);
  if (transform_s.present()) {
    const auto steps = transform_s.get_uint("steps");
    for (std::uint64_t k = 1; k <= steps; ++k) {
      const auto key = fmt::format("step{}", k);
      const auto op = transform_s.get(key);
      const auto scope = parse_sign_scope(transform_s.find(key + "_scope").value_or("both"));
      if (op == "time_symmetrize") {
        SignFunction sign(model.grid(), transform_s.get_ints<int>(key + "_signs"));
        model = model.with_transform(SlotSignTransform{std::move(sign), scope, transform_s.find_uint(key + "_seed")});
      } else if (op == "lambda_sign") {
        model = model.with_transform(LambdaSignTransform{transform_s.get_ints<int>(key + "_signs"), scope});
      } else if (op == "layer_double") {
        model = model.with_transform(LayerDoubleTransform{});
      } else {
        throw Error(ErrorCode::config_error, fmt::format("unknown transform '{}'", op));
      }
    }
  }
  return model;
}

LocalModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, fmt::format("cannot open descriptor {}", path.string()));
  return parse_model(in, path.parent_path());
}

void write_model(std::ostream& out, const LocalModel& model, std::string_view comment) {
  for (const auto& line : split_list(comment, '\n')) out << "; " << line << '\n';
  out << "[model]\n";
  out << "name = " << model.name() << '\n';
  out << "angles = " << join_reals(model.angles()) << "\n\n";

  out << "[source]\n";
  out << "states = " << join_ints(model.source().labels()) << '\n';
  out << "prior = " << join_reals(model.source().prior()) << "\n\n";

  const auto& grid = model.base_grid();
  out << "[grid]\n";
  out << "slots = " << grid.slot_count() << '\n';
  if (!grid.is_uniform()) out << "weights = " << join_reals(grid.weights()) << '\n';
  out << '\n';

  for (Station station : {Station::S1, Station::S2}) {
    const auto& gen = model.gen(station);
    out << fmt::format("[gen{}]\n", station == Station::S1 ? 1 : 2);
    out << "kind = " << to_string(gen.kind) << '\n';
    out << "values = " << gen.value_count << '\n';
    if (gen.kind == GenKind::constant) {
      out << "value = " << gen.table.front() << '\n';
    } else if (gen.kind != GenKind::hashed) {
      out << "table = " << join_ints(gen.table) << '\n';
    }
    out << "seed = " << gen.seed << "\n\n";
  }
  for (Station station : {Station::S1, Station::S2}) {
    const auto& o = model.out(station);
    out << fmt::format("[out{}]\n", station == Station::S1 ? 1 : 2);
    out << "kind = " << to_string(o.kind) << '\n';
    switch (o.kind) {
      case OutcomeKind::constant: out << "value = " << o.constant << '\n'; break;
      case OutcomeKind::table:
        out << "axes = " << axes_to_string(o.axes) << '\n';
        out << "table = " << join_ints(o.table) << '\n';
        break;
      case OutcomeKind::cos_threshold:
        out << "lambda_phase = " << join_reals(o.lambda_phase) << '\n';
        if (!o.value_phase.empty()) out << "value_phase = " << join_reals(o.value_phase) << '\n';
        out << "polarity = " << o.polarity << '\n';
        break;
    }
    out << '\n';
  }

  const auto& transforms = model.transforms();
  if (transforms.empty()) return;
  out << "[transform]\n";
  out << "steps = " << transforms.size() << '\n';
  for (std::size_t i = 0; i < transforms.size(); ++i) {
    const auto key = fmt::format("step{}", i + 1);
    out << key << " = " << transform_name(transforms[i]) << '\n';
    if (const auto* s = std::get_if<SlotSignTransform>(&transforms[i])) {
      out << key << "_scope = " << to_string(s->scope) << '\n';
      out << key << "_signs = " << join_ints(s->sign.values()) << '\n';
      if (s->seed) out << key << "_seed = " << *s->seed << '\n';
      out << key << "_mean = " << format_real(s->sign.mean()) << '\n';
    } else if (const auto* l = std::get_if<LambdaSignTransform>(&transforms[i])) {
      out << key << "_scope = " << to_string(l->scope) << '\n';
      out << key << "_signs = " << join_ints(l->signs) << '\n';
    }
  }
}

std::string model_to_string(const LocalModel& model) {
  std::ostringstream ss;
  write_model(ss, model);
  return ss.str();
}

LocalModel resolve_model(std::string_view name_or_path) {
  const std::filesystem::path p(name_or_path);
  std::error_code ec;
  if (std::filesystem::is_regular_file(p, ec)) return load_model(p);
  if (name_or_path.find('/') != std::string_view::npos || p.has_extension()) {
    throw Error(ErrorCode::io_error, fmt::format("descriptor file {} not found", p.string()));
  }
  return make_model(name_or_path);
}

Schedule parse_schedule(std::istream& in, Schedule defaults) {
  const pt::ptree tree = read_tree(in);
  const Section s(tree, "schedule", {});
  if (!s.present()) return defaults;
  Schedule schedule = std::move(defaults);
  if (auto v = s.find_uint("trials")) schedule.trials = *v;
  if (auto v = s.find("policy")) schedule.policy = parse_setting_policy(*v);
  if (auto v = s.find("angles_a")) schedule.angles_a = parse_real_list(*v);
  if (auto v = s.find("angles_b")) schedule.angles_b = parse_real_list(*v);
  if (auto v = s.find_uint("seed_source")) schedule.seed_source = *v;
  if (auto v = s.find_uint("seed_settings")) schedule.seed_settings = *v;
  if (auto v = s.find_uint("seed_s1")) schedule.seed_s1 = *v;
  if (auto v = s.find_uint("seed_s2")) schedule.seed_s2 = *v;
  validate_schedule(schedule);
  return schedule;
}

Schedule load_schedule(const std::filesystem::path& path, Schedule defaults) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, fmt::format("cannot open schedule {}", path.string()));
  return parse_schedule(in, std::move(defaults));
}

void write_schedule(std::ostream& out, const Schedule& schedule) {
  out << "[schedule]\n";
  out << "trials = " << schedule.trials << '\n';
  out << "policy = " << to_string(schedule.policy) << '\n';
  out << "angles_a = " << join_reals(schedule.angles_a) << '\n';
  out << "angles_b = " << join_reals(schedule.angles_b) << '\n';
  out << "seed_source = " << schedule.seed_source << '\n';
  out << "seed_settings = " << schedule.seed_settings << '\n';
  if (schedule.seed_s1) out << "seed_s1 = " << *schedule.seed_s1 << '\n';
  if (schedule.seed_s2) out << "seed_s2 = " << *schedule.seed_s2 << '\n';
}

}  // namespace bellsim
