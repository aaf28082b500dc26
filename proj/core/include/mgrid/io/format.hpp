/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <string>

namespace mgrid::io {

/// Shortest-form decimal with 12 significant digits, '.' separator,
/// independent of the global locale.
std::string format_number(double value);

/// Fixed-point decimal with the given number of fractional digits.
std::string format_fixed(double value, int decimals);

/// Parses a complete decimal number; throws std::invalid_argument otherwise.
double parse_number(const std::string& text);

}  // namespace mgrid::io
