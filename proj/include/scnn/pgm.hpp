#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace scnn::pgm {

// ASCII portable graymap (P2) of values laid out row-major as rows x cols.
// Per-image min-max scaling: the largest value maps to 255 (brightest), the
// smallest to 0. An all-equal image (including all-zero) comes out all dark.
void write(const std::string& path, std::span<const double> values, std::size_t rows,
           std::size_t cols);

}  // namespace scnn::pgm
