/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/io/format.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace mgrid::io {

namespace {

std::string to_chars_string(double value, std::chars_format fmt, int precision) {
  if (value == 0.0) value = 0.0;  // drop the sign of negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, fmt, precision);
  if (res.ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_number(double value) { return to_chars_string(value, std::chars_format::general, 12); }

std::string format_fixed(double value, int decimals) {
  return to_chars_string(value, std::chars_format::fixed, decimals);
}

double parse_number(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && (text[begin] == ' ' || text[begin] == '\t')) ++begin;
  while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t' || text[end - 1] == '\r')) --end;
  // from_chars rejects a leading '+', which hand-edited files do contain.
  if (begin < end && text[begin] == '+') ++begin;
  double value = 0.0;
  const char* first = text.data() + begin;
  const char* last = text.data() + end;
  const auto res = std::from_chars(first, last, value);
  if (begin == end || res.ec != std::errc{} || res.ptr != last) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return value;
}

}  // namespace mgrid::io
