#include "bpfree/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bpfree {

namespace {

void check_inside(const Raster& r, double x, double y) {
  constexpr double kSlack = 1e-12;
  if (x < r.x0 - kSlack || x > r.x1 + kSlack || y < r.y0 - kSlack || y > r.y1 + kSlack) {
    std::ostringstream msg;
    msg << "point (" << x << ", " << y << ") is outside [" << r.x0 << ", " << r.x1 << "] x ["
        << r.y0 << ", " << r.y1 << "]";
    throw Error(ErrorCode::OutOfDomain, msg.str());
  }
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double Raster::bilinear(double x, double y) const {
  check_inside(*this, x, y);
  const double fx = std::clamp((x - x0) / (x1 - x0) * double(cols() - 1), 0.0, double(cols() - 1));
  const double fy = std::clamp((y - y0) / (y1 - y0) * double(rows() - 1), 0.0, double(rows() - 1));
  const Index c = std::min<Index>(static_cast<Index>(fx), cols() - 2);
  const Index r = std::min<Index>(static_cast<Index>(fy), rows() - 2);
  const double ax = fx - double(c);
  const double ay = fy - double(r);
  return (1 - ay) * ((1 - ax) * values(r, c) + ax * values(r, c + 1)) +
         ay * ((1 - ax) * values(r + 1, c) + ax * values(r + 1, c + 1));
}

double Raster::nearest(double x, double y) const {
  check_inside(*this, x, y);
  const double fx = (x - x0) / (x1 - x0) * double(cols() - 1);
  const double fy = (y - y0) / (y1 - y0) * double(rows() - 1);
  const Index c = std::clamp<Index>(std::llround(fx), 0, cols() - 1);
  const Index r = std::clamp<Index>(std::llround(fy), 0, rows() - 1);
  return values(r, c);
}

std::uint64_t Raster::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Index r = 0; r < rows(); ++r)
    for (Index c = 0; c < cols(); ++c)
      for (char ch : format_value(values(r, c))) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
      }
  return h;
}

void write_raster(const std::string& path, const Raster& raster) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  for (const auto& [k, v] : raster.meta) {
    if (k != "checksum") out << "# " << k << "=" << v << "\n";
  }
  out << "# checksum=" << raster.checksum() << "\n";
  out << raster.rows() << " " << raster.cols() << " " << format_value(raster.x0) << " "
      << format_value(raster.x1) << " " << format_value(raster.y0) << " "
      << format_value(raster.y1) << "\n";
  for (Index r = 0; r < raster.rows(); ++r) {
    for (Index c = 0; c < raster.cols(); ++c) {
      out << format_value(raster.values(r, c)) << (c + 1 < raster.cols() ? " " : "\n");
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

Raster read_raster(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  Raster raster;
  std::string line;
  Index rows = -1, cols = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = line.substr(1, eq - 1);
        key.erase(0, key.find_first_not_of(' '));
        raster.meta[key] = line.substr(eq + 1);
      }
      continue;
    }
    std::istringstream head(line);
    if (!(head >> rows >> cols >> raster.x0 >> raster.x1 >> raster.y0 >> raster.y1)) {
      throw Error(ErrorCode::IoError, path + ": malformed raster header");
    }
    break;
  }
  if (rows < 2 || cols < 2) throw Error(ErrorCode::IoError, path + ": raster needs >= 2x2 nodes");
  raster.values.resize(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      if (!(in >> raster.values(r, c))) throw Error(ErrorCode::IoError, path + ": truncated raster");
  const auto it = raster.meta.find("checksum");
  if (it != raster.meta.end() && std::stoull(it->second) != raster.checksum()) {
    throw Error(ErrorCode::IoError, path + ": checksum mismatch");
  }
  return raster;
}

}  // namespace bpfree
