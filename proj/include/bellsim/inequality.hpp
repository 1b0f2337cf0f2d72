#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bellsim/model.hpp"

namespace bellsim {

class JointTable;

enum class Method { exact, monte_carlo };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

/// Pair correlation, one-sided marginals and conditional expectations given
/// λ for one setting pair.
struct CorrelationReport {
  Setting a{Station::S1, 0};
  Setting b{Station::S2, 0};
  double e_ab = 0;
  double marginal_a = 0;
  double marginal_b = 0;
  /// E{A|λ}, E{B|λ} indexed by source state. Monte-Carlo entries for states
  /// that were never drawn are 0.
  std::vector<double> cond_a;
  std::vector<double> cond_b;
  Method method = Method::exact;
  std::uint64_t trials = 0;
  /// Standard error of e_ab; 0 for the exact method.
  double std_error = 0;
};

/// Exact: weighted sum over every (λ, m). Monte Carlo: `trials` i.i.d. draws
/// of (λ, m) from a stream seeded by `seed`.
CorrelationReport correlate(const LocalModel& model, const Setting& a, const Setting& b,
                            Method method = Method::exact, std::uint64_t trials = 0, std::uint64_t seed = 0);

/// Exact correlations summed over a tabulated joint distribution, reading the
/// instrument values from the table instead of the generators.
CorrelationReport correlate_from_table(const LocalModel& model, const JointTable& table);

/// Exact one-sided marginal E{A_a} (or E{B_b}).
double exact_marginal(const LocalModel& model, const Setting& setting);

/// Exact E{A|λ} for every source state.
std::vector<double> conditional_expectations(const LocalModel& model, const Setting& setting);

struct ChshSettings {
  Setting a{Station::S1, 0};
  Setting a_prime{Station::S1, 0};
  Setting b{Station::S2, 0};
  Setting b_prime{Station::S2, 0};
};

/// a = 0, a' = π/2, b = π/4, b' = 3π/4.
ChshSettings optimal_chsh_settings();

inline constexpr double kBoundTolerance = 1e-9;

struct ChshResult {
  ChshSettings settings;
  /// e(a,b), e(a,b'), e(a',b), e(a',b').
  std::array<double, 4> correlations{};
  std::array<double, 4> std_errors{};
  double s_value = 0;
  double local_bound = 2;
  double tol = kBoundTolerance;
  bool within_local_bound = true;
};

/// S = e(a,b) - e(a,b') + e(a',b) + e(a',b'). Each pair draws from its own
/// stream derived from (seed, pair index), so results do not depend on the
/// evaluation order.
ChshResult chsh(const LocalModel& model, const ChshSettings& settings, Method method = Method::exact,
                std::uint64_t trials = 0, std::uint64_t seed = 0, double tol = kBoundTolerance);

ChshResult chsh_from_correlations(const ChshSettings& settings, const std::array<double, 4>& correlations,
                                  double tol = kBoundTolerance);

/// Singlet reference -cos(a - b).
double reference_correlation(const Setting& a, const Setting& b);

ChshResult reference_chsh(const ChshSettings& settings, double tol = kBoundTolerance);

struct BoundResult {
  double bound = 0;
  std::size_t strategies_visited = 0;
};

/// Largest CHSH value over every deterministic ±1 assignment of outcomes to
/// `settings_per_side` settings per side (2 or 3). For 3 settings the CHSH
/// combination is maximized over every embedded 2x2 block.
BoundResult deterministic_bound(int settings_per_side = 2);

}  // namespace bellsim
