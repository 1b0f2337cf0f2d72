#include "bellsim/format.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "bellsim/error.hpp"

namespace bellsim {

std::string format_real(double value) {
  const double r = round12(value);
  return fmt::format("{:.12g}", r);
}

double round12(double value) {
  if (!std::isfinite(value)) return value;
  const double r = std::stod(fmt::format("{:.12g}", value));
  return r == 0 ? 0.0 : r;
}

std::string format_exact(double value) { return fmt::format("{}", value); }

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find(sep, pos), text.size());
    auto token = text.substr(pos, end - pos);
    while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) {
      token.remove_suffix(1);
    }
    if (!token.empty()) out.emplace_back(token);
    pos = end + 1;
  }
  return out;
}

double parse_real(std::string_view text) {
  // Accept the symbolic angles people actually type.
  static constexpr double pi = 3.14159265358979323846;
  const auto parse_plain = [](std::string_view t, double& out) {
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    return ec == std::errc() && ptr == t.data() + t.size();
  };
  double value = 0;
  if (parse_plain(text, value)) return value;
  // forms: pi, -pi, k*pi, pi/d, k*pi/d
  std::string_view t = text;
  double sign = 1;
  if (!t.empty() && t.front() == '-') {
    sign = -1;
    t.remove_prefix(1);
  }
  double numer = 1, denom = 1;
  const auto pi_pos = t.find("pi");
  if (pi_pos != std::string_view::npos) {
    auto head = t.substr(0, pi_pos);
    auto tail = t.substr(pi_pos + 2);
    bool ok = true;
    if (!head.empty()) {
      if (head.back() != '*') ok = false;
      else ok = parse_plain(head.substr(0, head.size() - 1), numer);
    }
    if (ok && !tail.empty()) {
      ok = tail.front() == '/' && parse_plain(tail.substr(1), denom) && denom != 0;
    }
    if (ok) return sign * numer * pi / denom;
  }
  throw Error(ErrorCode::config_error, fmt::format("'{}' is not a number", text));
}

std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& token : split_list(text)) out.push_back(parse_real(token));
  return out;
}

}  // namespace bellsim
