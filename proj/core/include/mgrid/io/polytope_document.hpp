/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "mgrid/polytope.hpp"

#include <filesystem>
#include <iosfwd>

namespace mgrid::io {

/// Key-value text form of a polytope:
///
///   x_min = 0.258
///   x_max = 1.972
///   p_min = -0.59
///   p_max = 1.5
///   planes = 1
///   plane.0 = <a> <b> <c>
///
/// Lines starting with '#' are comments.
void write_polytope(const StoragePolytope& polytope, std::ostream& out);
StoragePolytope read_polytope(std::istream& in);
StoragePolytope read_polytope(const std::filesystem::path& path);

}  // namespace mgrid::io
