#pragma once

#include <iosfwd>
#include <string>

#include "regret/model.hpp"

namespace regret {

/// Plain-text matrix: a "rows cols" header, then rows of whitespace-separated
/// entries with 17 significant digits.
void write_matrix(std::ostream& out, const Mat& M);
void write_matrix(const std::string& path, const Mat& M);
[[nodiscard]] Mat read_matrix(std::istream& in);
[[nodiscard]] Mat read_matrix(const std::string& path);

}  // namespace regret
