#pragma once

#include "codedmm/array_code.hpp"
#include "codedmm/asym_code.hpp"

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace codedmm::array {

// Code catalog text format.
//
//   arraycode n k b sigma
//   <node> <proc> : i1+i2+...        (n*b lines, node-major, 1-based)
//
//   asymcode n k b
//   col <i> <b_i> :
//   i1+i2+...                          (b_i lines per column)
//
// A catalog is any number of such entries. Blank lines and lines starting with
// '#' are ignored on input; serialization emits the canonical form (sorted
// sources, single spaces, '\n' line ends, no comments).
using CatalogEntry = std::variant<ArrayCode, AsymArrayCode>;

std::string serialize(const ArrayCode &code);
std::string serialize(const AsymArrayCode &code);
std::string serialize_catalog(const std::vector<CatalogEntry> &entries);

// Throws ParseError with the offending line number.
std::vector<CatalogEntry> parse_catalog(std::string_view text);

std::vector<CatalogEntry> load_catalog(const std::string &path);

} // namespace codedmm::array
