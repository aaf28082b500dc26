/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mgrid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

/// Runs one mgsim invocation. args excludes the program name. Messages go to
/// out and err so callers (and tests) can capture them.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mgrid::cli
