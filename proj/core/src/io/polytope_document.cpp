/*
 * Copyright (c) 2026 mgrid authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "mgrid/io/polytope_document.hpp"

#include "mgrid/io/format.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mgrid::io {

void write_polytope(const StoragePolytope& polytope, std::ostream& out) {
  const auto& box = polytope.box();
  out << "# storage polytope: box plus planes a*x + b*p <= c\n";
  out << "x_min = " << format_number(box.x_min) << '\n';
  out << "x_max = " << format_number(box.x_max) << '\n';
  out << "p_min = " << format_number(box.p_min) << '\n';
  out << "p_max = " << format_number(box.p_max) << '\n';
  out << "planes = " << polytope.planes().size() << '\n';
  std::size_t i = 0;
  for (const auto& h : polytope.planes()) {
    out << "plane." << i++ << " = " << format_number(h.a) << ' ' << format_number(h.b) << ' '
        << format_number(h.c) << '\n';
  }
}

StoragePolytope read_polytope(std::istream& in) {
  std::map<std::string, std::pair<std::string, std::size_t>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("polytope document: expected 'key = value' (line " + std::to_string(lineno) + ")");
    }
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    if (!entries.emplace(key, std::make_pair(line.substr(eq + 1), lineno)).second) {
      throw std::runtime_error("polytope document: duplicate key '" + key + "' (line " + std::to_string(lineno) + ")");
    }
  }

  auto value = [&](const std::string& key) -> const std::pair<std::string, std::size_t>& {
    const auto it = entries.find(key);
    if (it == entries.end()) throw std::runtime_error("polytope document: missing key '" + key + "'");
    return it->second;
  };
  auto number = [&](const std::string& key) {
    const auto& [text, ln] = value(key);
    try {
      return parse_number(text);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("polytope document: " + std::string(e.what()) + " (line " + std::to_string(ln) + ")");
    }
  };

  EnergyPowerBox box{number("x_min"), number("x_max"), number("p_min"), number("p_max")};
  const double count = number("planes");
  if (count < 0 || count != static_cast<double>(static_cast<std::size_t>(count))) {
    throw std::runtime_error("polytope document: 'planes' must be a non-negative integer");
  }
  std::vector<HalfPlane> planes;
  for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
    const auto& [text, ln] = value("plane." + std::to_string(i));
    std::istringstream ss(text);
    std::string a, b, c, extra;
    ss >> a >> b >> c;
    if (c.empty() || (ss >> extra)) {
      throw std::runtime_error("polytope document: plane needs 3 coefficients (line " + std::to_string(ln) + ")");
    }
    try {
      planes.push_back({parse_number(a), parse_number(b), parse_number(c)});
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("polytope document: " + std::string(e.what()) + " (line " + std::to_string(ln) + ")");
    }
  }
  return StoragePolytope(box, std::move(planes));
}

StoragePolytope read_polytope(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_polytope(in);
}

}  // namespace mgrid::io
