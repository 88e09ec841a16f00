#include "bpfree/tensor_train.hpp"

#include <sstream>

namespace bpfree {

Index TTLayout::rows() const {
  Index p = 1;
  for (Index m : row_factors) p *= m;
  return p;
}

Index TTLayout::cols() const {
  Index p = 1;
  for (Index n : col_factors) p *= n;
  return p;
}

void TTLayout::validate() const {
  const std::size_t L = row_factors.size();
  if (L == 0) throw Error(ErrorCode::InvalidLayout, "TT layout needs at least one core");
  if (col_factors.size() != L) {
    throw Error(ErrorCode::InvalidLayout, "row and column factor lists differ in length");
  }
  if (ranks.size() != L + 1) {
    throw Error(ErrorCode::InvalidLayout, "TT layout needs L+1 ranks");
  }
  if (ranks.front() != 1 || ranks.back() != 1) {
    throw Error(ErrorCode::InvalidLayout, "boundary TT ranks must be 1");
  }
  for (std::size_t k = 0; k < L; ++k) {
    if (row_factors[k] < 1 || col_factors[k] < 1) {
      throw Error(ErrorCode::InvalidLayout, "TT factors must be >= 1");
    }
  }
  for (Index r : ranks) {
    if (r < 1) throw Error(ErrorCode::InvalidLayout, "TT ranks must be >= 1");
  }
}

TTLayout make_tt_layout(std::vector<Index> row_factors, std::vector<Index> col_factors, Index r) {
  TTLayout layout;
  layout.row_factors = std::move(row_factors);
  layout.col_factors = std::move(col_factors);
  layout.ranks.assign(layout.row_factors.size() + 1, r);
  layout.ranks.front() = 1;
  layout.ranks.back() = 1;
  layout.validate();
  return layout;
}

Index tt_param_count(const TTLayout& layout) {
  layout.validate();
  Index total = 0;
  for (Index k = 0; k < layout.order(); ++k) total += layout.core_size(k);
  return total;
}

std::string describe(const TTLayout& layout) {
  std::ostringstream s;
  auto list = [&](const std::vector<Index>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "x" : "") << v[i];
  };
  s << "rows ";
  list(layout.row_factors);
  s << " cols ";
  list(layout.col_factors);
  s << " ranks ";
  for (std::size_t i = 0; i < layout.ranks.size(); ++i) s << (i ? "," : "") << layout.ranks[i];
  return s.str();
}

std::vector<Index> unfold_index(Index flat, const std::vector<Index>& factors) {
  std::vector<Index> digits(factors.size());
  for (std::size_t k = factors.size(); k-- > 0;) {
    digits[k] = flat % factors[k];
    flat /= factors[k];
  }
  return digits;
}

Index fold_index(const std::vector<Index>& digits, const std::vector<Index>& factors) {
  Index flat = 0;
  for (std::size_t k = 0; k < factors.size(); ++k) flat = flat * factors[k] + digits[k];
  return flat;
}

double tt_init_std(const TTLayout& layout) {
  layout.validate();
  double target = 2.0 / static_cast<double>(layout.rows() + layout.cols());
  for (Index k = 1; k < layout.order(); ++k) target /= static_cast<double>(layout.ranks[k]);
  return std::pow(target, 1.0 / (2.0 * static_cast<double>(layout.order())));
}

}  // namespace bpfree
