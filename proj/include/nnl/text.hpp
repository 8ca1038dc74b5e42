#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace nnl {

/// Shortest text that parses back to the identical double.
std::string format_real(double value);

/// Whole-string numeric parses; throw std::invalid_argument naming the text.
double parse_real(std::string_view text);
std::size_t parse_count(std::string_view text);
bool is_number(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
std::vector<std::string> split_whitespace(std::string_view text);

}  // namespace nnl
