#include "bpfree/quadrature.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace bpfree {

void write_grid(std::ostream& out, const SparseGrid<double>& grid) {
  out << "# sparse-grid dim=" << grid.dim << " level=" << grid.level
      << " count=" << grid.size() << "\n";
  out << "# columns: " << grid.dim << " node coordinates, weight\n";
  out << std::setprecision(17);
  for (Index j = 0; j < grid.size(); ++j) {
    for (Index m = 0; m < grid.dim; ++m) out << grid.nodes(m, j) << ' ';
    out << grid.weights(j) << '\n';
  }
}

SparseGrid<double> read_grid(std::istream& in) {
  SparseGrid<double> grid;
  Index declared_dim = -1;
  Index declared_count = -1;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream header(line.substr(1));
      std::string token;
      while (header >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string name = token.substr(0, eq);
        const long value = std::stol(token.substr(eq + 1));
        if (name == "dim") declared_dim = value;
        if (name == "level") grid.level = static_cast<int>(value);
        if (name == "count") declared_count = value;
      }
      continue;
    }
    std::istringstream row(line);
    std::vector<double> values;
    double v = 0.0;
    while (row >> v) values.push_back(v);
    if (values.size() < 2) throw Error(ErrorCode::IoError, "grid row needs coordinates and a weight");
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw Error(ErrorCode::IoError, "grid rows have differing lengths");
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorCode::IoError, "grid file has no nodes");
  grid.dim = static_cast<Index>(rows.front().size()) - 1;
  if (declared_dim >= 0 && declared_dim != grid.dim) {
    throw Error(ErrorCode::DimensionMismatch, "grid header dim disagrees with row length");
  }
  if (declared_count >= 0 && declared_count != static_cast<Index>(rows.size())) {
    throw Error(ErrorCode::IoError, "grid header count disagrees with row count");
  }
  const Index n = static_cast<Index>(rows.size());
  grid.nodes.resize(grid.dim, n);
  grid.weights.resize(n);
  for (Index j = 0; j < n; ++j) {
    const auto& r = rows[static_cast<std::size_t>(j)];
    for (Index m = 0; m < grid.dim; ++m) grid.nodes(m, j) = r[static_cast<std::size_t>(m)];
    grid.weights(j) = r.back();
  }
  grid.mirror.assign(static_cast<std::size_t>(n), -1);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if ((grid.nodes.col(i) + grid.nodes.col(j)).cwiseAbs().maxCoeff() <= 1e-12) {
        grid.mirror[static_cast<std::size_t>(j)] = i;
        break;
      }
    }
    if (grid.mirror[static_cast<std::size_t>(j)] < 0) {
      throw Error(ErrorCode::IoError, "grid is not symmetric under negation");
    }
  }
  return grid;
}

}  // namespace bpfree
