#pragma once

#include <filesystem>
#include <string_view>

#include "qpat/grid.hpp"

namespace qpat {

// On-disk layout: <stem>.json holds the header
//   {"dims": [...], "domain": "unit-square"|"unit-cube", "dtype": "f64-le", "order": "row-major", ...}
// and <stem>.bin holds the raw little-endian doubles. Fields use dims = [n, n(, n)],
// x fastest; traces use dims = [boundary count] in the grid's boundary order.

void write_field(const std::filesystem::path& stem, const ScalarField& f);
ScalarField read_field(const std::filesystem::path& stem);

void write_trace(const std::filesystem::path& stem, const BoundaryTrace& t);
BoundaryTrace read_trace(const std::filesystem::path& stem);

/// 2D only: one row per y-line, x increasing along the row.
void write_field_csv(const std::filesystem::path& path, const ScalarField& f);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

bool field_exists(const std::filesystem::path& stem);

}  // namespace qpat
