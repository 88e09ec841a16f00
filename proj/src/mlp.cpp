#include "bpfree/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace bpfree {

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "sine" || name == "sin") return Activation::Sine;
  throw Error(ErrorCode::InvalidConfig, "unknown activation '" + name + "'");
}

const char* to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "sine"; }

LayerSpec LayerSpec::dense(Index rows, Index cols) {
  LayerSpec l;
  l.kind = Kind::Dense;
  l.rows = rows;
  l.cols = cols;
  return l;
}

LayerSpec LayerSpec::tensorized(const TTLayout& layout) {
  layout.validate();
  LayerSpec l;
  l.kind = Kind::TT;
  l.rows = layout.rows();
  l.cols = layout.cols();
  l.tt = layout;
  return l;
}

Index LayerSpec::weight_count() const {
  return kind == Kind::Dense ? rows * cols : tt_param_count(tt);
}

void MlpSpec::validate() const {
  if (input_dim < 1) throw Error(ErrorCode::InvalidLayout, "network input dim must be >= 1");
  if (layers.empty()) throw Error(ErrorCode::InvalidLayout, "network has no layers");
  Index width = input_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.kind == LayerSpec::Kind::TT) {
      l.tt.validate();
      if (l.tt.rows() != l.rows || l.tt.cols() != l.cols) {
        throw Error(ErrorCode::InvalidLayout, "TT layout does not match layer shape");
      }
    }
    if (l.rows < 1 || l.cols < 1) throw Error(ErrorCode::InvalidLayout, "empty layer");
    if (l.cols != width) {
      throw Error(ErrorCode::InvalidLayout, "layer " + std::to_string(i) + " takes " +
                                                std::to_string(l.cols) + " inputs, previous width is " +
                                                std::to_string(width));
    }
    width = l.rows;
  }
}

ParamView MlpSpec::param_view() const {
  validate();
  ParamView view;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string p = "layer" + std::to_string(i);
    if (l.kind == LayerSpec::Kind::Dense) {
      view.add(p + ".weight", l.rows * l.cols);
    } else {
      for (Index k = 0; k < l.tt.order(); ++k) {
        view.add(p + ".core" + std::to_string(k), l.tt.core_size(k));
      }
    }
    view.add(p + ".bias", l.rows);
  }
  return view;
}

Index MlpSpec::param_count() const { return param_view().size(); }

MlpWeights realize(const MlpSpec& spec, const Eigen::VectorXd& params) {
  const ParamView view = spec.param_view();
  if (params.size() != view.size()) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vector has " +
                                                  std::to_string(params.size()) +
                                                  " entries, network needs " +
                                                  std::to_string(view.size()));
  }
  MlpWeights w;
  w.activation = spec.activation;
  std::size_t seg = 0;
  const auto& segments = view.segments();
  for (const auto& l : spec.layers) {
    if (l.kind == LayerSpec::Kind::Dense) {
      const auto& s = segments[seg++];
      w.weights.emplace_back(
          Eigen::Map<const Eigen::MatrixXd>(params.data() + s.offset, l.rows, l.cols));
    } else {
      std::vector<const double*> cores;
      for (Index k = 0; k < l.tt.order(); ++k) cores.push_back(params.data() + segments[seg++].offset);
      w.weights.push_back(tt_reconstruct<double>(l.tt, cores));
    }
    const auto& b = segments[seg++];
    w.biases.emplace_back(params.segment(b.offset, b.length));
  }
  return w;
}

namespace {

// Kernels run over fixed-size chunks so Eigen vectorizes them without heap temporaries.
constexpr Index kChunk = 64;

// sin: reduce by multiples of pi (two-part constant), odd Taylor polynomial through
// r^19 on [-pi/2, pi/2], sign from the parity of the multiple.
template <typename A>
void sine_chunk(A a) {
  constexpr double kInvPi = 0.31830988618379067154;
  constexpr double kPiHi = 3.141592653589793116;
  constexpr double kPiLo = 1.2246467991473532e-16;
  using Arr = Eigen::Array<double, Eigen::Dynamic, 1, 0, kChunk, 1>;
  const Arr n = (a * kInvPi).round();
  const Arr r = (a - n * kPiHi) - n * kPiLo;
  const Arr r2 = r * r;
  // (-1)^k / (2k+1)!, k = 9..1
  Arr p = r2 * -8.2206352466243297e-18 + 2.8114572543455206e-15;
  p = p * r2 - 7.6471637318198164e-13;
  p = p * r2 + 1.6059043836821615e-10;
  p = p * r2 - 2.5052108385441719e-08;
  p = p * r2 + 2.7557319223985891e-06;
  p = p * r2 - 1.9841269841269841e-04;
  p = p * r2 + 8.3333333333333332e-03;
  p = p * r2 - 1.6666666666666666e-01;
  const Arr parity = n - 2.0 * (n * 0.5).floor();
  a = (1.0 - 2.0 * parity) * (r + r * r2 * p);
}

// tanh(x) = (e^{2x} - 1) / (e^{2x} + 1), argument clamped where tanh is +-1 in double.
template <typename A>
void tanh_chunk(A a) {
  using Arr = Eigen::Array<double, Eigen::Dynamic, 1, 0, kChunk, 1>;
  const Arr t = (2.0 * a.max(-20.0).min(20.0)).exp();
  a = (t - 1.0) / (t + 1.0);
}

template <typename Kernel>
void chunked(double* data, Index size, Kernel&& kernel) {
  Index i = 0;
  for (; i + kChunk <= size; i += kChunk) {
    kernel(Eigen::Map<Eigen::Array<double, kChunk, 1>>(data + i));
  }
  if (i < size) kernel(Eigen::Map<Eigen::ArrayXd>(data + i, size - i));
}

}  // namespace

void apply_activation(Activation act, Eigen::Ref<Eigen::MatrixXd> x) {
  auto run = [&](double* data, Index size) {
    if (act == Activation::Tanh) {
      chunked(data, size, [](auto a) { tanh_chunk(a); });
    } else {
      chunked(data, size, [](auto a) { sine_chunk(a); });
    }
  };
  if (x.outerStride() == x.rows()) {
    run(x.data(), x.size());
  } else {
    for (Index c = 0; c < x.cols(); ++c) run(x.col(c).data(), x.rows());
  }
}

Eigen::MatrixXd forward(const MlpWeights& w, const Eigen::MatrixXd& x) {
  // Column blocks keep every hidden activation resident in cache.
  constexpr Index kBlock = 256;
  const std::size_t depth = w.weights.size();
  if (depth == 0) return x;
  Eigen::MatrixXd out(w.weights.back().rows(), x.cols());
  std::vector<Eigen::MatrixXd> buf(depth);
  for (Index begin = 0; begin < x.cols(); begin += kBlock) {
    const Index n = std::min(kBlock, x.cols() - begin);
    for (std::size_t i = 0; i < depth; ++i) {
      auto& h = buf[i];
      h.resize(w.weights[i].rows(), n);
      if (i == 0) {
        h.noalias() = w.weights[0] * x.middleCols(begin, n);
      } else {
        h.noalias() = w.weights[i] * buf[i - 1];
      }
      h.colwise() += w.biases[i];
      if (i + 1 < depth) apply_activation(w.activation, h);
    }
    out.middleCols(begin, n) = buf.back();
  }
  return out;
}

Eigen::MatrixXd forward(const MlpSpec& spec, const Eigen::VectorXd& params,
                        const Eigen::MatrixXd& x) {
  if (x.rows() != spec.input_dim) {
    throw Error(ErrorCode::DimensionMismatch, "network input has wrong dimension");
  }
  return forward(realize(spec, params), x);
}

Eigen::MatrixXd forward_contracted(const MlpSpec& spec, const Eigen::VectorXd& params,
                                   const Eigen::MatrixXd& x) {
  const ParamView view = spec.param_view();
  if (params.size() != view.size()) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vector has the wrong length");
  }
  if (x.rows() != spec.input_dim) {
    throw Error(ErrorCode::DimensionMismatch, "network input has wrong dimension");
  }
  const auto& segments = view.segments();
  std::size_t seg = 0;
  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    Eigen::MatrixXd next;
    if (l.kind == LayerSpec::Kind::Dense) {
      const auto& s = segments[seg++];
      next = Eigen::Map<const Eigen::MatrixXd>(params.data() + s.offset, l.rows, l.cols) * h;
    } else {
      std::vector<const double*> cores;
      for (Index k = 0; k < l.tt.order(); ++k) cores.push_back(params.data() + segments[seg++].offset);
      next = tt_forward<double>(l.tt, cores, h);
    }
    const auto& b = segments[seg++];
    next.colwise() += params.segment(b.offset, b.length);
    if (i + 1 < spec.layers.size()) apply_activation(spec.activation, next);
    h.swap(next);
  }
  return h;
}

Eigen::VectorXd init_params(const MlpSpec& spec, std::uint64_t seed) {
  const ParamView view = spec.param_view();
  Eigen::VectorXd params = Eigen::VectorXd::Zero(view.size());
  std::size_t seg = 0;
  const auto& segments = view.segments();
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    if (l.kind == LayerSpec::Kind::Dense) {
      const auto& s = segments[seg++];
      auto rng = make_stream(seed, 0x6d6c70u, i);
      std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / double(l.rows + l.cols)));
      for (Index e = 0; e < s.length; ++e) params(s.offset + e) = normal(rng);
    } else {
      const auto tt = tt_init<double>(l.tt, stream_key(seed, 0x6d6c70u, i));
      for (Index k = 0; k < l.tt.order(); ++k) {
        const auto& s = segments[seg++];
        params.segment(s.offset, s.length) = tt.cores[static_cast<std::size_t>(k)];
      }
    }
    ++seg;  // bias stays zero
  }
  return params;
}

std::string describe(const MlpSpec& spec) {
  std::ostringstream s;
  s << "input " << spec.input_dim << ", activation " << to_string(spec.activation) << "\n";
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    s << "  layer" << i << ": " << (l.kind == LayerSpec::Kind::Dense ? "dense " : "tt ") << l.rows
      << "x" << l.cols;
    if (l.kind == LayerSpec::Kind::TT) s << " (" << describe(l.tt) << ")";
    s << ", weights " << l.weight_count() << " + bias " << l.rows << "\n";
  }
  s << "  total parameters " << spec.param_count();
  return s.str();
}

}  // namespace bpfree
