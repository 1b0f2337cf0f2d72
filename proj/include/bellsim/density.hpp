#pragma once

// Tabulated setting-dependent joint distribution over
// (λ*, λ**, λ, m) and the product-form test applied to it.

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bellsim/model.hpp"

namespace bellsim {

struct JointKey {
  std::size_t value1 = 0;  // λ*
  std::size_t value2 = 0;  // λ**
  std::size_t lambda = 0;
  std::size_t slot = 0;

  friend auto operator<=>(const JointKey&, const JointKey&) = default;
};

class JointTable {
 public:
  JointTable() = default;
  /// Validates non-negative entries inside the axes and unit total mass
  /// (unless `entries` is empty).
  JointTable(Setting a, Setting b, std::size_t value_count1, std::size_t value_count2,
             std::vector<std::string> lambda_labels, std::size_t slot_count, std::map<JointKey, double> entries);

  const Setting& setting_a() const noexcept { return a_; }
  const Setting& setting_b() const noexcept { return b_; }
  std::size_t value_count1() const noexcept { return value_count1_; }
  std::size_t value_count2() const noexcept { return value_count2_; }
  const std::vector<std::string>& lambda_labels() const noexcept { return lambda_labels_; }
  std::size_t slot_count() const noexcept { return slot_count_; }
  const std::map<JointKey, double>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  double at(const JointKey& key) const;
  double total_mass() const;

  /// Marginal over the axes selected by `keep` (bits: 1 = λ*, 2 = λ**, 4 = λ,
  /// 8 = m), keyed by the full JointKey with dropped axes set to 0.
  std::map<JointKey, double> marginal(unsigned keep) const;

  /// Same table with the two station axes exchanged.
  JointTable swapped() const;

 private:
  Setting a_{Station::S1, 0};
  Setting b_{Station::S2, 0};
  std::size_t value_count1_ = 0;
  std::size_t value_count2_ = 0;
  std::vector<std::string> lambda_labels_;
  std::size_t slot_count_ = 0;
  std::map<JointKey, double> entries_;
};

JointTable tabulate_joint(const LocalModel& model, const Setting& a, const Setting& b);

enum class FactorMode { given_lambda, given_lambda_and_m };

std::string_view to_string(FactorMode mode);
FactorMode parse_factor_mode(std::string_view text);

struct FactorizationReport {
  FactorMode mode = FactorMode::given_lambda_and_m;
  double tol = 0;
  /// Largest |p(λ*, λ**|c) - p(λ*|c) p(λ**|c)| over every condition c and cell.
  double max_deviation = 0;
  bool pass = true;
  /// Largest total-variation distance between the conditional joint and the
  /// product of its marginals.
  double max_total_variation = 0;
  /// L∞ deviation per condition, keyed "lambda=<label>" or
  /// "lambda=<label>,m=<slot>".
  std::map<std::string, double> deviations;
};

/// Conditions on (λ, m) or on λ alone (pooling the slots); conditions with
/// zero mass are skipped.
FactorizationReport check_factorization(const JointTable& table, FactorMode mode = FactorMode::given_lambda_and_m,
                                        double tol = 1e-9);

/// CSV with header `lambda_star,lambda_dblstar,lambda,m,prob`; one row per
/// positive entry, slots 1-based, λ by label.
void write_joint_csv(std::ostream& out, const JointTable& table);

/// Reads the CSV above. Lines starting with '#' are skipped. Axis sizes are
/// taken from the largest index seen; λ labels in order of first appearance.
JointTable read_joint_csv(std::istream& in, const Setting& a, const Setting& b);

}  // namespace bellsim
