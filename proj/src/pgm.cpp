#include "scnn/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "scnn/error.hpp"

namespace scnn::pgm {

void write(const std::string& path, std::span<const double> values, std::size_t rows,
           std::size_t cols) {
  if (rows == 0 || cols == 0 || values.size() != rows * cols) {
    throw ArgumentError("pgm: values do not fill a " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " image");
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;

  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("pgm: cannot open '" + path + "' for writing");
  os << "P2\n" << cols << ' ' << rows << "\n255\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = values[r * cols + c];
      const int level =
          span > 0.0 ? static_cast<int>(std::lround((v - lo) / span * 255.0)) : 0;
      os << level << (c + 1 < cols ? ' ' : '\n');
    }
  }
  os.flush();
  if (!os) throw IoError("pgm: write to '" + path + "' failed");
}

}  // namespace scnn::pgm
