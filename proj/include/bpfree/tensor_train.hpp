#pragma once
/**
 * @file tensor_train.hpp
 * @brief Tensor-train (TT) matrices: layout, cores, dense reconstruction and the
 *        core-by-core forward contraction.
 *
 * A TT matrix W (M x N) with row factors m_k and column factors n_k has cores
 * G_k of shape (r_{k-1}, m_k, n_k, r_k), stored row-major (last index fastest).
 * Row index i and column index j map to (i_1..i_L) and (j_1..j_L) row-major, and
 * W(i, j) = G_1(i_1, j_1) G_2(i_2, j_2) ... G_L(i_L, j_L).
 */

#include "bpfree/common.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace bpfree {

struct TTLayout {
  std::vector<Index> row_factors;  // m_k, product = rows (outputs)
  std::vector<Index> col_factors;  // n_k, product = cols (inputs)
  std::vector<Index> ranks;        // r_0..r_L, r_0 = r_L = 1

  Index order() const { return static_cast<Index>(row_factors.size()); }
  Index rows() const;
  Index cols() const;
  Index core_size(Index k) const {
    return ranks[k] * row_factors[k] * col_factors[k] * ranks[k + 1];
  }

  /// Throws InvalidLayout on inconsistent factor or rank lists.
  void validate() const;

  bool operator==(const TTLayout&) const = default;
};

/// Layout with every interior rank equal to r.
TTLayout make_tt_layout(std::vector<Index> row_factors, std::vector<Index> col_factors, Index r);

/// sum_k r_{k-1} m_k n_k r_k
Index tt_param_count(const TTLayout& layout);

std::string describe(const TTLayout& layout);

/// Row-major multi-index of flat index `flat` over `factors`.
std::vector<Index> unfold_index(Index flat, const std::vector<Index>& factors);
Index fold_index(const std::vector<Index>& digits, const std::vector<Index>& factors);

template <typename Scalar = double>
struct TTCores {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  TTLayout layout;
  std::vector<Vector> cores;

  /// Core k as the (r_{k-1} m_k) x (n_k r_k) row-major matrix it is stored as.
  auto core_matrix(Index k) const {
    using RowMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<const RowMajor>(cores[static_cast<std::size_t>(k)].data(),
                                      layout.ranks[k] * layout.row_factors[k],
                                      layout.col_factors[k] * layout.ranks[k + 1]);
  }
};

/// Cap on M*N for dense reconstruction.
inline constexpr Index kMaxReconstructEntries = Index{1} << 26;

/// Dense reconstruction from raw core pointers (core k holds core_size(k) values).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> tt_reconstruct(
    const TTLayout& layout, const std::vector<const Scalar*>& cores) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  layout.validate();
  const Index M = layout.rows();
  const Index N = layout.cols();
  if (M * N > kMaxReconstructEntries) {
    throw Error(ErrorCode::InvalidLayout, "dense reconstruction of " + describe(layout) +
                                              " exceeds the entry cap");
  }
  // T holds the partial product as rows (I, J) over the first k factors, cols a_k.
  // Row order is (I, J) with J fastest; the final pass reorders into W.
  const Index L = layout.order();
  RowMajor T = RowMajor::Ones(1, 1);
  Index I = 1, J = 1;
  for (Index k = 0; k < L; ++k) {
    const Index ra = layout.ranks[k], m = layout.row_factors[k], n = layout.col_factors[k],
                rb = layout.ranks[k + 1];
    // G as ra x (m n rb)
    const Eigen::Map<const RowMajor> G(cores[static_cast<std::size_t>(k)], ra, m * n * rb);
    const RowMajor P = T * G;  // (I J) x (m n rb)
    RowMajor next(I * m * J * n, rb);
    for (Index i = 0; i < I; ++i)
      for (Index j = 0; j < J; ++j)
        for (Index ik = 0; ik < m; ++ik)
          for (Index jk = 0; jk < n; ++jk) {
            const Index row = ((i * m + ik) * J + j) * n + jk;
            next.row(row) = P.row(i * J + j).segment((ik * n + jk) * rb, rb);
          }
    T.swap(next);
    I *= m;
    J *= n;
  }
  Matrix W(M, N);
  for (Index i = 0; i < M; ++i)
    for (Index j = 0; j < N; ++j) W(i, j) = T(i * N + j, 0);
  return W;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> tt_reconstruct(const TTCores<Scalar>& tt) {
  std::vector<const Scalar*> ptrs;
  for (const auto& c : tt.cores) ptrs.push_back(c.data());
  return tt_reconstruct<Scalar>(tt.layout, ptrs);
}

/// y = W x for a (N x B) batch without forming W. Cores are absorbed from the last
/// to the first; the working tensor is ordered (b, j_<k, a_k, i_>k).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> tt_forward(
    const TTLayout& layout, const std::vector<const Scalar*>& cores,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  layout.validate();
  const Index N = layout.cols();
  if (x.rows() != N) {
    throw Error(ErrorCode::DimensionMismatch, "tt_forward input has " +
                                                  std::to_string(x.rows()) + " rows, layout " +
                                                  describe(layout) + " expects " +
                                                  std::to_string(N));
  }
  const Index B = x.cols();
  const Index L = layout.order();
  // Column-major x is already (b, j_1..j_L) flattened with j fastest.
  std::vector<Scalar> state(x.data(), x.data() + x.size());
  std::vector<Scalar> next;
  Index outer = B * N;  // b * prod(n_<k) after division below
  Index inner = 1;      // prod(m_>k)
  for (Index k = L - 1; k >= 0; --k) {
    const Index ra = layout.ranks[k], m = layout.row_factors[k], n = layout.col_factors[k],
                rb = layout.ranks[k + 1];
    outer /= n;
    const Eigen::Map<const RowMajor> G(cores[static_cast<std::size_t>(k)], ra * m, n * rb);
    next.assign(static_cast<std::size_t>(outer * ra * m * inner), Scalar(0));
    for (Index o = 0; o < outer; ++o) {
      const Eigen::Map<const RowMajor> S(state.data() + o * n * rb * inner, n * rb, inner);
      Eigen::Map<RowMajor> out(next.data() + o * ra * m * inner, ra * m, inner);
      out.noalias() = G * S;
    }
    state.swap(next);
    inner *= m;
  }
  return Eigen::Map<const Matrix>(state.data(), layout.rows(), B);
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> tt_forward(
    const TTCores<Scalar>& tt, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x) {
  std::vector<const Scalar*> ptrs;
  for (const auto& c : tt.cores) ptrs.push_back(c.data());
  return tt_forward<Scalar>(tt.layout, ptrs, x);
}

/// Per-core standard deviation giving reconstructed entries variance 2/(M+N).
double tt_init_std(const TTLayout& layout);

template <typename Scalar = double>
TTCores<Scalar> tt_init(const TTLayout& layout, std::uint64_t seed) {
  layout.validate();
  TTCores<Scalar> tt;
  tt.layout = layout;
  const double sd = tt_init_std(layout);
  auto rng = make_stream(seed, 0x7474u);
  std::normal_distribution<double> normal(0.0, sd);
  for (Index k = 0; k < layout.order(); ++k) {
    typename TTCores<Scalar>::Vector core(layout.core_size(k));
    for (Index e = 0; e < core.size(); ++e) core(e) = Scalar(normal(rng));
    tt.cores.push_back(std::move(core));
  }
  return tt;
}

}  // namespace bpfree
