#pragma once
/**
 * @file raster.hpp
 * @brief Uniform 2-D grids of values stored as plain text, with bilinear and
 *        nearest-cell lookup.
 *
 * File layout: '#' comment lines (key=value metadata), one line
 * "rows cols x0 x1 y0 y1", then rows*cols values row-major. Row r sits at
 * y = y0 + r (y1 - y0) / (rows - 1); column c at x = x0 + c (x1 - x0) / (cols - 1).
 */

#include "bpfree/common.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <string>

namespace bpfree {

struct Raster {
  Eigen::MatrixXd values;  // rows (y) x cols (x)
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  std::map<std::string, std::string> meta;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
  double x_at(Index c) const { return x0 + (x1 - x0) * double(c) / double(cols() - 1); }
  double y_at(Index r) const { return y0 + (y1 - y0) * double(r) / double(rows() - 1); }

  /// Throws OutOfDomain outside [x0,x1] x [y0,y1] (with a 1e-12 slack).
  double bilinear(double x, double y) const;
  /// Value of the grid node closest to (x, y): piecewise-constant lookup.
  double nearest(double x, double y) const;

  /// FNV-1a over the printed values.
  std::uint64_t checksum() const;
};

void write_raster(const std::string& path, const Raster& raster);
Raster read_raster(const std::string& path);

}  // namespace bpfree
