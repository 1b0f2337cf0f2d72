#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bellsim {

/// 12 significant digits, the fixed text precision of every report.
std::string format_real(double value);

/// `value` rounded to 12 significant digits; -0 becomes 0.
double round12(double value);

/// Shortest text that reads back to the same double.
std::string format_exact(double value);

std::vector<std::string> split_list(std::string_view text, char sep = ',');
std::vector<double> parse_real_list(std::string_view text);
double parse_real(std::string_view text);

}  // namespace bellsim
