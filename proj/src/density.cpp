#include "bellsim/density.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "bellsim/error.hpp"

namespace bellsim {

JointTable::JointTable(Setting a, Setting b, std::size_t value_count1, std::size_t value_count2,
                       std::vector<std::string> lambda_labels, std::size_t slot_count,
                       std::map<JointKey, double> entries)
    : a_(a),
      b_(b),
      value_count1_(value_count1),
      value_count2_(value_count2),
      lambda_labels_(std::move(lambda_labels)),
      slot_count_(slot_count),
      entries_(std::move(entries)) {
  if (a_.station() != Station::S1 || b_.station() != Station::S2) {
    throw Error(ErrorCode::station_mismatch, "joint table settings must be (S1, S2)");
  }
  double total = 0;
  for (const auto& [key, p] : entries_) {
    if (key.value1 >= value_count1_ || key.value2 >= value_count2_ || key.lambda >= lambda_labels_.size() ||
        key.slot >= slot_count_) {
      throw Error(ErrorCode::invalid_model, "joint table entry outside its axes");
    }
    if (!(p >= 0) || !std::isfinite(p)) throw Error(ErrorCode::invalid_weights, "joint table has a negative entry");
    total += p;
  }
  if (!entries_.empty() && std::abs(total - 1.0) > kMassTolerance) {
    throw Error(ErrorCode::invalid_weights, fmt::format("joint table mass is {} instead of 1", total));
  }
}

double JointTable::at(const JointKey& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? 0.0 : it->second;
}

double JointTable::total_mass() const {
  double total = 0;
  for (const auto& [key, p] : entries_) total += p;
  return total;
}

std::map<JointKey, double> JointTable::marginal(unsigned keep) const {
  std::map<JointKey, double> out;
  for (const auto& [key, p] : entries_) {
    JointKey k{(keep & 1u) ? key.value1 : 0, (keep & 2u) ? key.value2 : 0, (keep & 4u) ? key.lambda : 0,
               (keep & 8u) ? key.slot : 0};
    out[k] += p;
  }
  return out;
}

JointTable JointTable::swapped() const {
  std::map<JointKey, double> entries;
  for (const auto& [key, p] : entries_) entries[{key.value2, key.value1, key.lambda, key.slot}] = p;
  JointTable t = *this;
  std::swap(t.value_count1_, t.value_count2_);
  t.entries_ = std::move(entries);
  return t;
}

JointTable tabulate_joint(const LocalModel& model, const Setting& a, const Setting& b) {
  if (a.station() != Station::S1 || b.station() != Station::S2) {
    throw Error(ErrorCode::station_mismatch, "tabulate_joint needs an S1 setting and an S2 setting");
  }
  const auto& source = model.source();
  const auto& grid = model.grid();
  std::map<JointKey, double> entries;
  for (std::size_t l = 0; l < source.size(); ++l) {
    for (std::size_t m = 0; m < grid.slot_count(); ++m) {
      const double p = source.weight(l) * grid.weight(m);
      if (p <= 0) continue;
      entries[{model.instrument_value(a, m), model.instrument_value(b, m), l, m}] += p;
    }
  }
  return JointTable(a, b, model.gen(Station::S1).value_count, model.gen(Station::S2).value_count, source.labels(),
                    grid.slot_count(), std::move(entries));
}

std::string_view to_string(FactorMode mode) {
  return mode == FactorMode::given_lambda ? "given_lambda" : "given_lambda_and_m";
}

FactorMode parse_factor_mode(std::string_view text) {
  if (text == "given_lambda") return FactorMode::given_lambda;
  if (text == "given_lambda_and_m") return FactorMode::given_lambda_and_m;
  throw Error(ErrorCode::config_error, fmt::format("unknown factorization mode '{}'", text));
}

FactorizationReport check_factorization(const JointTable& table, FactorMode mode, double tol) {
  if (!(tol > 0) || !std::isfinite(tol)) {
    throw Error(ErrorCode::invalid_tolerance, fmt::format("tolerance {} must be positive", tol));
  }
  if (table.empty()) throw Error(ErrorCode::empty_table, "joint table has no entries");

  struct Condition {
    double mass = 0;
    std::map<std::pair<std::size_t, std::size_t>, double> joint;
    std::map<std::size_t, double> first, second;
  };
  const bool per_slot = mode == FactorMode::given_lambda_and_m;
  std::map<std::pair<std::size_t, std::size_t>, Condition> conditions;
  for (const auto& [key, p] : table.entries()) {
    if (p <= 0) continue;
    auto& c = conditions[{key.lambda, per_slot ? key.slot : 0}];
    c.mass += p;
    c.joint[{key.value1, key.value2}] += p;
    c.first[key.value1] += p;
    c.second[key.value2] += p;
  }

  FactorizationReport report;
  report.mode = mode;
  report.tol = tol;
  for (const auto& [cond, c] : conditions) {
    if (c.mass <= 0) continue;
    double dev = 0, tv = 0;
    for (const auto& [x, px] : c.first) {
      for (const auto& [y, py] : c.second) {
        const auto it = c.joint.find({x, y});
        const double joint = it == c.joint.end() ? 0.0 : it->second / c.mass;
        const double d = std::abs(joint - (px / c.mass) * (py / c.mass));
        dev = std::max(dev, d);
        tv += d;
      }
    }
    const auto& label = table.lambda_labels()[cond.first];
    const auto name = per_slot ? fmt::format("lambda={},m={}", label, cond.second + 1) : fmt::format("lambda={}", label);
    report.deviations[name] = dev;
    report.max_deviation = std::max(report.max_deviation, dev);
    report.max_total_variation = std::max(report.max_total_variation, tv / 2);
  }
  report.pass = report.max_deviation <= tol;
  return report;
}

void write_joint_csv(std::ostream& out, const JointTable& table) {
  out << "lambda_star,lambda_dblstar,lambda,m,prob\n";
  for (const auto& [key, p] : table.entries()) {
    if (p <= 0) continue;
    out << fmt::format("{},{},{},{},{}\n", key.value1, key.value2, table.lambda_labels()[key.lambda], key.slot + 1, p);
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    fields.push_back(field);
  }
  return fields;
}

std::size_t parse_index(const std::string& text, std::size_t line_no) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || text.empty() || text.front() == '-') {
    throw Error(ErrorCode::config_error, fmt::format("line {}: '{}' is not a non-negative integer", line_no, text));
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

JointTable read_joint_csv(std::istream& in, const Setting& a, const Setting& b) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<std::string> labels;
  std::map<JointKey, double> entries;
  std::size_t k1 = 0, k2 = 0, slots = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#' || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"lambda_star", "lambda_dblstar", "lambda", "m", "prob"}) {
        throw Error(ErrorCode::config_error, fmt::format("line {}: unexpected joint table header", line_no));
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 5) throw Error(ErrorCode::config_error, fmt::format("line {}: expected 5 fields", line_no));
    JointKey key;
    key.value1 = parse_index(fields[0], line_no);
    key.value2 = parse_index(fields[1], line_no);
    auto it = std::find(labels.begin(), labels.end(), fields[2]);
    if (it == labels.end()) {
      labels.push_back(fields[2]);
      it = labels.end() - 1;
    }
    key.lambda = static_cast<std::size_t>(it - labels.begin());
    const std::size_t m = parse_index(fields[3], line_no);
    if (m == 0) throw Error(ErrorCode::config_error, fmt::format("line {}: slots are 1-based", line_no));
    key.slot = m - 1;
    double p = 0;
    try {
      std::size_t pos = 0;
      p = std::stod(fields[4], &pos);
      if (pos != fields[4].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::config_error, fmt::format("line {}: bad probability '{}'", line_no, fields[4]));
    }
    if (entries.contains(key)) throw Error(ErrorCode::config_error, fmt::format("line {}: duplicate cell", line_no));
    entries[key] = p;
    k1 = std::max(k1, key.value1 + 1);
    k2 = std::max(k2, key.value2 + 1);
    slots = std::max(slots, m);
  }
  if (!header_seen) throw Error(ErrorCode::config_error, "joint table CSV has no header");
  return JointTable(a, b, k1, k2, std::move(labels), slots, std::move(entries));
}

}  // namespace bellsim
