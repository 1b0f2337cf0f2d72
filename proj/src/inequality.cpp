#include "bellsim/inequality.hpp"

#include <cmath>

#include <fmt/format.h>

#include "bellsim/density.hpp"
#include "bellsim/error.hpp"
#include "bellsim/rng.hpp"

namespace bellsim {

namespace {

void require_pair(const Setting& a, const Setting& b) {
  if (a.station() != Station::S1 || b.station() != Station::S2) {
    throw Error(ErrorCode::station_mismatch, "setting pair must be (S1, S2)");
  }
}

std::vector<double> cumulative(const std::vector<double>& weights) {
  std::vector<double> c(weights.size());
  double total = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) c[i] = (total += weights[i]);
  return c;
}

CorrelationReport exact_report(const LocalModel& model, const Setting& a, const Setting& b) {
  CorrelationReport r;
  r.a = a;
  r.b = b;
  const auto& source = model.source();
  const auto& grid = model.grid();
  r.cond_a.assign(source.size(), 0.0);
  r.cond_b.assign(source.size(), 0.0);
  for (std::size_t l = 0; l < source.size(); ++l) {
    double ab = 0;
    for (std::size_t m = 0; m < grid.slot_count(); ++m) {
      const int ya = model.evaluate(a, l, m).outcome;
      const int yb = model.evaluate(b, l, m).outcome;
      const double w = grid.weight(m);
      r.cond_a[l] += w * ya;
      r.cond_b[l] += w * yb;
      ab += w * ya * yb;
    }
    r.e_ab += source.weight(l) * ab;
    r.marginal_a += source.weight(l) * r.cond_a[l];
    r.marginal_b += source.weight(l) * r.cond_b[l];
  }
  return r;
}

CorrelationReport monte_carlo_report(const LocalModel& model, const Setting& a, const Setting& b,
                                     std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) throw Error(ErrorCode::zero_trials, "Monte-Carlo estimation needs at least one trial");
  CorrelationReport r;
  r.a = a;
  r.b = b;
  r.method = Method::monte_carlo;
  r.trials = trials;
  const auto& source = model.source();
  const auto lambda_cdf = cumulative(source.prior());
  const auto slot_cdf = cumulative(model.grid().weights());
  rng::Stream stream(seed);

  std::vector<double> sum_a(source.size(), 0.0), sum_b(source.size(), 0.0);
  std::vector<std::uint64_t> hits(source.size(), 0);
  double sum_ab = 0, sum_ab2 = 0, total_a = 0, total_b = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::size_t l = stream.pick(lambda_cdf);
    const std::size_t m = stream.pick(slot_cdf);
    const int ya = model.evaluate(a, l, m).outcome;
    const int yb = model.evaluate(b, l, m).outcome;
    const double ab = ya * yb;
    sum_ab += ab;
    sum_ab2 += ab * ab;
    total_a += ya;
    total_b += yb;
    sum_a[l] += ya;
    sum_b[l] += yb;
    ++hits[l];
  }
  const double n = static_cast<double>(trials);
  r.e_ab = sum_ab / n;
  r.marginal_a = total_a / n;
  r.marginal_b = total_b / n;
  if (trials > 1) {
    const double var = std::max(0.0, (sum_ab2 - n * r.e_ab * r.e_ab) / (n - 1));
    r.std_error = std::sqrt(var / n);
  }
  r.cond_a.assign(source.size(), 0.0);
  r.cond_b.assign(source.size(), 0.0);
  for (std::size_t l = 0; l < source.size(); ++l) {
    if (hits[l] == 0) continue;
    r.cond_a[l] = sum_a[l] / static_cast<double>(hits[l]);
    r.cond_b[l] = sum_b[l] / static_cast<double>(hits[l]);
  }
  return r;
}

}  // namespace

std::string_view to_string(Method method) { return method == Method::exact ? "exact" : "monte_carlo"; }

Method parse_method(std::string_view text) {
  if (text == "exact") return Method::exact;
  if (text == "monte_carlo" || text == "mc") return Method::monte_carlo;
  throw Error(ErrorCode::config_error, fmt::format("unknown method '{}'", text));
}

CorrelationReport correlate(const LocalModel& model, const Setting& a, const Setting& b, Method method,
                            std::uint64_t trials, std::uint64_t seed) {
  require_pair(a, b);
  if (method == Method::exact) return exact_report(model, a, b);
  return monte_carlo_report(model, a, b, trials, seed);
}

CorrelationReport correlate_from_table(const LocalModel& model, const JointTable& table) {
  CorrelationReport r;
  r.a = table.setting_a();
  r.b = table.setting_b();
  require_pair(r.a, r.b);
  const std::size_t lambdas = model.source().size();
  if (table.lambda_labels() != model.source().labels()) {
    throw Error(ErrorCode::invalid_model, "joint table and model disagree on the source states");
  }
  r.cond_a.assign(lambdas, 0.0);
  r.cond_b.assign(lambdas, 0.0);
  std::vector<double> lambda_mass(lambdas, 0.0);
  for (const auto& [key, p] : table.entries()) {
    const int ya = model.outcome_given_value(r.a, key.lambda, key.value1, key.slot);
    const int yb = model.outcome_given_value(r.b, key.lambda, key.value2, key.slot);
    r.e_ab += p * ya * yb;
    r.marginal_a += p * ya;
    r.marginal_b += p * yb;
    r.cond_a[key.lambda] += p * ya;
    r.cond_b[key.lambda] += p * yb;
    lambda_mass[key.lambda] += p;
  }
  for (std::size_t l = 0; l < lambdas; ++l) {
    if (lambda_mass[l] <= 0) continue;
    r.cond_a[l] /= lambda_mass[l];
    r.cond_b[l] /= lambda_mass[l];
  }
  return r;
}

double exact_marginal(const LocalModel& model, const Setting& setting) {
  const auto cond = conditional_expectations(model, setting);
  double total = 0;
  for (std::size_t l = 0; l < cond.size(); ++l) total += model.source().weight(l) * cond[l];
  return total;
}

std::vector<double> conditional_expectations(const LocalModel& model, const Setting& setting) {
  const auto& grid = model.grid();
  std::vector<double> cond(model.source().size(), 0.0);
  for (std::size_t l = 0; l < cond.size(); ++l) {
    for (std::size_t m = 0; m < grid.slot_count(); ++m) {
      cond[l] += grid.weight(m) * model.evaluate(setting, l, m).outcome;
    }
  }
  return cond;
}

ChshSettings optimal_chsh_settings() {
  return {Setting(Station::S1, kTestAngles[0]), Setting(Station::S1, kTestAngles[2]),
          Setting(Station::S2, kTestAngles[1]), Setting(Station::S2, kTestAngles[3])};
}

ChshResult chsh_from_correlations(const ChshSettings& settings, const std::array<double, 4>& correlations,
                                  double tol) {
  ChshResult result;
  result.settings = settings;
  result.correlations = correlations;
  result.tol = tol;
  result.s_value = correlations[0] - correlations[1] + correlations[2] + correlations[3];
  result.within_local_bound = std::abs(result.s_value) <= result.local_bound + tol;
  return result;
}

ChshResult chsh(const LocalModel& model, const ChshSettings& settings, Method method, std::uint64_t trials,
                std::uint64_t seed, double tol) {
  if (!(tol > 0)) throw Error(ErrorCode::invalid_tolerance, fmt::format("tolerance {} must be positive", tol));
  require_pair(settings.a, settings.b);
  require_pair(settings.a_prime, settings.b_prime);
  const std::array<std::pair<const Setting*, const Setting*>, 4> pairs = {{
      {&settings.a, &settings.b},
      {&settings.a, &settings.b_prime},
      {&settings.a_prime, &settings.b},
      {&settings.a_prime, &settings.b_prime},
  }};
  std::array<double, 4> e{}, se{};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto r = correlate(model, *pairs[i].first, *pairs[i].second, method, trials, rng::derive_seed(seed, i));
    e[i] = r.e_ab;
    se[i] = r.std_error;
  }
  auto result = chsh_from_correlations(settings, e, tol);
  result.std_errors = se;
  return result;
}

double reference_correlation(const Setting& a, const Setting& b) {
  require_pair(a, b);
  return -std::cos(a.angle() - b.angle());
}

ChshResult reference_chsh(const ChshSettings& settings, double tol) {
  return chsh_from_correlations(settings,
                                {reference_correlation(settings.a, settings.b),
                                 reference_correlation(settings.a, settings.b_prime),
                                 reference_correlation(settings.a_prime, settings.b),
                                 reference_correlation(settings.a_prime, settings.b_prime)},
                                tol);
}

BoundResult deterministic_bound(int settings_per_side) {
  if (settings_per_side != 2 && settings_per_side != 3) {
    throw Error(ErrorCode::unsupported_size,
                fmt::format("deterministic bound supports 2 or 3 settings per side, got {}", settings_per_side));
  }
  const int n = settings_per_side;
  const auto bit = [](unsigned strategy, int i) { return (strategy >> i) & 1u ? -1 : 1; };
  BoundResult result;
  result.bound = -4;
  for (unsigned strategy = 0; strategy < (1u << (2 * n)); ++strategy) {
    ++result.strategies_visited;
    for (int i = 0; i < n; ++i) {
      for (int ip = 0; ip < n; ++ip) {
        if (ip == i) continue;
        for (int j = 0; j < n; ++j) {
          for (int jp = 0; jp < n; ++jp) {
            if (jp == j) continue;
            const int a = bit(strategy, i), ap = bit(strategy, ip);
            const int b = bit(strategy, n + j), bp = bit(strategy, n + jp);
            result.bound = std::max(result.bound, static_cast<double>(a * b - a * bp + ap * b + ap * bp));
          }
        }
      }
    }
  }
  return result;
}

}  // namespace bellsim
