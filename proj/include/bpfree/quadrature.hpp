#pragma once
/**
 * @file quadrature.hpp
 * @brief Nested univariate Gaussian rules and Smolyak sparse grids for
 *        expectations under the standard normal distribution.
 *
 * The univariate sequence has 1, 3 and 5 nodes at levels 1, 2 and 3 and is
 * nested: {0} c {0, +-sqrt(2)} c {0, +-sqrt(2), +-3}. The level-3 rule matches
 * the normal moments through degree 7; the level-2 rule through degree 3.
 * Every level-3 grid has 2D^2 + 2D + 1 distinct nodes.
 */

#include "bpfree/common.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace bpfree {

inline constexpr int kMaxQuadratureLevel = 3;

template <typename Scalar = double>
struct Rule1D {
  int level = 1;
  std::vector<Scalar> nodes;    // ascending, symmetric about 0
  std::vector<Scalar> weights;  // same length, sums to 1
};

template <typename Scalar = double>
Rule1D<Scalar> rule_1d(int level) {
  using std::sqrt;
  Rule1D<Scalar> rule;
  rule.level = level;
  const Scalar r2 = sqrt(Scalar(2));
  switch (level) {
    case 1:
      rule.nodes = {Scalar(0)};
      rule.weights = {Scalar(1)};
      break;
    case 2:
      rule.nodes = {-r2, Scalar(0), r2};
      rule.weights = {Scalar(1) / 4, Scalar(1) / 2, Scalar(1) / 4};
      break;
    case 3:
      rule.nodes = {Scalar(-3), -r2, Scalar(0), r2, Scalar(3)};
      rule.weights = {Scalar(1) / 126, Scalar(3) / 14, Scalar(5) / 9, Scalar(3) / 14,
                      Scalar(1) / 126};
      break;
    default:
      throw Error(ErrorCode::UnsupportedLevel,
                  "quadrature level " + std::to_string(level) + " (supported: 1..3)");
  }
  return rule;
}

/// Deduplicated Smolyak node/weight set. Nodes are columns.
template <typename Scalar = double>
struct SparseGrid {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Index dim = 0;
  int level = 0;
  Matrix nodes;               // dim x size
  Vector weights;             // size
  std::vector<Index> mirror;  // mirror[j] is the column holding -nodes.col(j)

  Index size() const { return nodes.cols(); }
};

namespace detail {

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Visits every multi-index l in [1, max_level]^dim with sum(l) - dim <= extra.
template <typename Visit>
void for_each_multi_index(std::vector<int>& l, Index pos, int extra, int max_level,
                          Visit&& visit) {
  if (pos == static_cast<Index>(l.size())) {
    visit(l);
    return;
  }
  for (int v = 1; v <= max_level && v - 1 <= extra; ++v) {
    l[pos] = v;
    for_each_multi_index(l, pos + 1, extra - (v - 1), max_level, visit);
  }
  l[pos] = 1;
}

}  // namespace detail

template <typename Scalar = double>
SparseGrid<Scalar> build_sparse_grid(Index dim, int level) {
  if (dim < 1) throw Error(ErrorCode::InvalidDimension, "sparse grid needs dim >= 1");
  if (level < 1 || level > kMaxQuadratureLevel) {
    throw Error(ErrorCode::UnsupportedLevel,
                "quadrature level " + std::to_string(level) + " (supported: 1..3)");
  }

  std::vector<Rule1D<Scalar>> rules;
  for (int l = 1; l <= level; ++l) rules.push_back(rule_1d<Scalar>(l));

  // Nodes are keyed on coordinates rounded to 1e-12; coincident nodes merge.
  constexpr double kKeyScale = 1e12;
  std::map<std::vector<long long>, std::pair<std::vector<Scalar>, Scalar>> merged;

  const int d = static_cast<int>(dim);
  std::vector<int> l(static_cast<std::size_t>(dim), 1);
  std::vector<std::size_t> pick(static_cast<std::size_t>(dim));
  std::vector<Scalar> point(static_cast<std::size_t>(dim));
  std::vector<long long> key(static_cast<std::size_t>(dim));

  detail::for_each_multi_index(l, 0, level - 1, level, [&](const std::vector<int>& li) {
    int q = -d;
    for (int v : li) q += v;
    const int j = level - 1 - q;
    const Scalar coeff =
        Scalar((j % 2 == 0) ? 1.0 : -1.0) * Scalar(detail::binomial(d - 1, j));
    if (coeff == Scalar(0)) return;

    std::fill(pick.begin(), pick.end(), 0);
    while (true) {
      Scalar w = coeff;
      for (std::size_t m = 0; m < pick.size(); ++m) {
        const auto& rule = rules[static_cast<std::size_t>(li[m] - 1)];
        point[m] = rule.nodes[pick[m]];
        w *= rule.weights[pick[m]];
        key[m] = std::llround(static_cast<double>(point[m]) * kKeyScale);
      }
      auto [it, inserted] = merged.try_emplace(key, point, Scalar(0));
      it->second.second += w;

      std::size_t m = 0;
      for (; m < pick.size(); ++m) {
        if (++pick[m] < rules[static_cast<std::size_t>(li[m] - 1)].nodes.size()) break;
        pick[m] = 0;
      }
      if (m == pick.size()) break;
    }
  });

  SparseGrid<Scalar> grid;
  grid.dim = dim;
  grid.level = level;
  grid.nodes.resize(dim, static_cast<Index>(merged.size()));
  grid.weights.resize(static_cast<Index>(merged.size()));
  std::map<std::vector<long long>, Index> column;
  Index c = 0;
  for (const auto& [k, entry] : merged) {
    for (Index m = 0; m < dim; ++m) grid.nodes(m, c) = entry.first[static_cast<std::size_t>(m)];
    grid.weights(c) = entry.second;
    column.emplace(k, c);
    ++c;
  }
  grid.mirror.resize(static_cast<std::size_t>(grid.size()));
  for (const auto& [k, col] : column) {
    std::vector<long long> neg(k.size());
    for (std::size_t m = 0; m < k.size(); ++m) neg[m] = -k[m];
    grid.mirror[static_cast<std::size_t>(col)] = column.at(neg);
  }
  return grid;
}

/// sum_j w_j f(delta_j). f maps a dim-vector to a fixed-length vector.
template <typename Scalar, typename Func>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sparse_integrate(const SparseGrid<Scalar>& grid,
                                                          Func&& f) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector total;
  for (Index j = 0; j < grid.size(); ++j) {
    const Vector node = grid.nodes.col(j);
    const Vector value = f(node);
    if (j == 0) total = Vector::Zero(value.size());
    if (value.size() != total.size()) {
      throw Error(ErrorCode::DimensionMismatch, "integrand changed output length");
    }
    total.noalias() += grid.weights(j) * value;
  }
  return total;
}

/// Checked variant for callers that declare the integrand input dimension.
template <typename Scalar, typename Func>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sparse_integrate(const SparseGrid<Scalar>& grid,
                                                          Index input_dim, Func&& f) {
  if (input_dim != grid.dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "integrand takes " + std::to_string(input_dim) + " inputs, grid has dim " +
                    std::to_string(grid.dim));
  }
  return sparse_integrate(grid, std::forward<Func>(f));
}

// Plain-text grid files: '#' comment header, then one node per line
// (dim coordinates followed by the weight).
void write_grid(std::ostream& out, const SparseGrid<double>& grid);
SparseGrid<double> read_grid(std::istream& in);

}  // namespace bpfree
