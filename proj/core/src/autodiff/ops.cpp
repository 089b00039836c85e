#include "mtlw/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "kernels.hpp"
#include "mtlw/errors.hpp"

namespace mtlw::ad {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

bool is_binary(OpKind kind) {
  return kind == OpKind::kAdd || kind == OpKind::kSub || kind == OpKind::kMul || kind == OpKind::kDiv;
}

Shape broadcast_shape(std::string_view op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return a.shape();
  if (b.size() == 1) return a.shape();
  if (a.size() == 1) return b.shape();
  throw StructuralError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                        shape_to_string(b.shape()));
}

Tensor record(Tape& tape, OpKind kind, std::vector<Tensor> inputs, Shape out_shape, OpAttrs attrs = {}) {
  bool needs_grad = false;
  for (const Tensor& in : inputs) needs_grad = needs_grad || in.requires_grad();
  needs_grad = needs_grad && tape.recording();

  Node node{kind, std::move(inputs), Tensor::zeros(std::move(out_shape), needs_grad), std::move(attrs), {}};
  detail::forward(node);
  Tensor out = node.output;
  if (needs_grad) tape.push(std::move(node));
  return out;
}

// Row-major (B, C, H, W) view of a rank-3 or rank-4 spatial tensor.
struct SpatialDims {
  std::size_t batch, channels, height, width;
};

SpatialDims spatial_dims(std::string_view op, const Tensor& t) {
  const Shape& s = t.shape();
  if (s.size() == 3) return {1, s[0], s[1], s[2]};
  if (s.size() == 4) return {s[0], s[1], s[2], s[3]};
  throw StructuralError(std::string(op) + ": expected rank 3 or 4 input, got " + shape_to_string(s));
}

Shape spatial_shape(const Tensor& like, std::size_t batch, std::size_t c, std::size_t h, std::size_t w) {
  if (like.rank() == 3) return {c, h, w};
  return {batch, c, h, w};
}

// ---------------------------------------------------------------------------
// conv2d via im2col. col has shape [(C_in*kh*kw) x (H_out*W_out)].

struct ConvGeometry {
  std::size_t cin, h, w, kh, kw, stride, pad, hout, wout;
};

// Output columns ox whose source x = ox*stride + j - pad lies inside [0, w).
std::pair<std::size_t, std::size_t> valid_columns(const ConvGeometry& g, std::size_t j) {
  const long w = static_cast<long>(g.w), pad = static_cast<long>(g.pad), st = static_cast<long>(g.stride);
  const long off = static_cast<long>(j) - pad;
  const long lo = off >= 0 ? 0 : (-off + st - 1) / st;
  long hi = (w - 1 - off) < 0 ? 0 : (w - 1 - off) / st + 1;
  hi = std::min<long>(hi, static_cast<long>(g.wout));
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(std::max(lo, hi))};
}

// Fills the columns of output rows [oy0, oy1); col is [K x (oy1-oy0)*wout].
void im2col(const double* in, const ConvGeometry& g, std::size_t oy0, std::size_t oy1, double* col) {
  const std::size_t plane = (oy1 - oy0) * g.wout;
  for (std::size_t c = 0; c < g.cin; ++c) {
    const double* src = in + c * g.h * g.w;
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        double* dst = col + ((c * g.kh + i) * g.kw + j) * plane;
        const auto [lo, hi] = valid_columns(g, j);
        for (std::size_t oy = oy0; oy < oy1; ++oy) {
          const long y = static_cast<long>(oy * g.stride + i) - static_cast<long>(g.pad);
          double* row = dst + (oy - oy0) * g.wout;
          if (y < 0 || y >= static_cast<long>(g.h)) {
            std::fill(row, row + g.wout, 0.0);
            continue;
          }
          // Source column of ox is ox*stride + j - pad, non-negative for ox >= lo.
          const double* src_row = src + static_cast<std::size_t>(y) * g.w;
          const std::size_t first = lo * g.stride + j - g.pad;
          if (lo >= hi) {
            std::fill(row, row + g.wout, 0.0);
            continue;
          }
          std::fill(row, row + lo, 0.0);
          if (g.stride == 1) {
            std::copy(src_row + first, src_row + first + (hi - lo), row + lo);
          } else {
            for (std::size_t ox = lo; ox < hi; ++ox) row[ox] = src_row[first + (ox - lo) * g.stride];
          }
          std::fill(row + hi, row + g.wout, 0.0);
        }
      }
    }
  }
}

void col2im_add(const double* col, const ConvGeometry& g, std::size_t oy0, std::size_t oy1, double* out) {
  const std::size_t plane = (oy1 - oy0) * g.wout;
  for (std::size_t c = 0; c < g.cin; ++c) {
    double* dst = out + c * g.h * g.w;
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        const double* src = col + ((c * g.kh + i) * g.kw + j) * plane;
        const auto [lo, hi] = valid_columns(g, j);
        for (std::size_t oy = oy0; oy < oy1; ++oy) {
          const long y = static_cast<long>(oy * g.stride + i) - static_cast<long>(g.pad);
          if (y < 0 || y >= static_cast<long>(g.h)) continue;
          if (lo >= hi) continue;
          double* dst_row = dst + static_cast<std::size_t>(y) * g.w + lo * g.stride + j - g.pad;
          const double* row = src + (oy - oy0) * g.wout;
          if (g.stride == 1) {
            for (std::size_t ox = lo; ox < hi; ++ox) dst_row[ox - lo] += row[ox];
          } else {
            for (std::size_t ox = lo; ox < hi; ++ox) dst_row[(ox - lo) * g.stride] += row[ox];
          }
        }
      }
    }
  }
}

ConvGeometry conv_geometry(const Node& node) {
  const SpatialDims d = spatial_dims("conv2d", node.inputs[0]);
  const Shape& k = node.inputs[1].shape();
  const SpatialDims o = spatial_dims("conv2d", node.output);
  return {d.channels, d.height, d.width, k[2], k[3], node.attrs.stride, node.attrs.padding, o.height, o.width};
}

using StridedMap = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

// Output rows per im2col tile, sized so a tile of columns stays in L2.
std::size_t tile_rows(const ConvGeometry& g) {
  const std::size_t k = g.cin * g.kh * g.kw;
  const std::size_t budget = std::size_t{1} << 16;  // doubles
  return std::clamp<std::size_t>(budget / std::max<std::size_t>(1, k * g.wout), 1, g.hout);
}

void conv_forward(Node& node) {
  const ConvGeometry g = conv_geometry(node);
  const SpatialDims d = spatial_dims("conv2d", node.inputs[0]);
  const std::size_t cout = node.inputs[1].dim(0);
  const std::size_t k = g.cin * g.kh * g.kw;
  const std::size_t plane = g.hout * g.wout;
  const std::size_t rows = tile_rows(g);

  ConstMatMap weights(node.inputs[1].values().data(), cout, k);
  RowMatrix col(k, rows * g.wout);
  const double* in = node.inputs[0].values().data();
  double* out = node.output.mutable_values().data();
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t oy0 = 0; oy0 < g.hout; oy0 += rows) {
      const std::size_t oy1 = std::min(g.hout, oy0 + rows);
      const auto n = static_cast<Eigen::Index>((oy1 - oy0) * g.wout);
      im2col(in + b * g.cin * g.h * g.w, g, oy0, oy1, col.data());
      // A short final tile is packed densely, so view it with n columns.
      StridedMap(out + b * cout * plane + oy0 * g.wout, cout, n, Eigen::OuterStride<>(plane)).noalias() =
          weights * ConstMatMap(col.data(), k, n);
    }
  }
}

void conv_backward(Node& node) {
  Tensor& input = node.inputs[0];
  Tensor& kernels = node.inputs[1];
  const bool want_input = input.requires_grad();
  const bool want_kernels = kernels.requires_grad();
  if (!want_input && !want_kernels) return;

  const ConvGeometry g = conv_geometry(node);
  const SpatialDims d = spatial_dims("conv2d", input);
  const std::size_t cout = kernels.dim(0);
  const std::size_t k = g.cin * g.kh * g.kw;
  const std::size_t plane = g.hout * g.wout;
  const std::size_t in_stride = g.cin * g.h * g.w;
  const std::size_t rows = tile_rows(g);

  ConstMatMap weights(kernels.values().data(), cout, k);
  const double* gout = node.output.grad().data();
  const double* in = input.values().data();
  RowMatrix col(k, rows * g.wout);
  RowMatrix dcol;
  if (want_input) dcol.resize(k, rows * g.wout);

  double* gin = want_input ? input.mutable_grad().data() : nullptr;
  double* gk = want_kernels ? kernels.mutable_grad().data() : nullptr;
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t oy0 = 0; oy0 < g.hout; oy0 += rows) {
      const std::size_t oy1 = std::min(g.hout, oy0 + rows);
      const auto n = static_cast<Eigen::Index>((oy1 - oy0) * g.wout);
      ConstStridedMap dy(gout + b * cout * plane + oy0 * g.wout, cout, n, Eigen::OuterStride<>(plane));
      if (want_kernels) {
        im2col(in + b * in_stride, g, oy0, oy1, col.data());
        MatMap(gk, cout, k).noalias() += dy * ConstMatMap(col.data(), k, n).transpose();
      }
      if (want_input) {
        MatMap(dcol.data(), k, n).noalias() = weights.transpose() * dy;
        col2im_add(dcol.data(), g, oy0, oy1, gin + b * in_stride);
      }
    }
  }
}

// ---------------------------------------------------------------------------

void maxpool_forward(Node& node) {
  const SpatialDims d = spatial_dims("maxpool2d", node.inputs[0]);
  const SpatialDims o = spatial_dims("maxpool2d", node.output);
  const std::size_t win = node.attrs.window;
  const std::size_t stride = node.attrs.stride;
  const double* in = node.inputs[0].values().data();
  double* out = node.output.mutable_values().data();
  node.saved_index.assign(node.output.size(), 0);

  std::size_t n = 0;
  for (std::size_t bc = 0; bc < d.batch * d.channels; ++bc) {
    const std::size_t base = bc * d.height * d.width;
    for (std::size_t oy = 0; oy < o.height; ++oy) {
      for (std::size_t ox = 0; ox < o.width; ++ox, ++n) {
        std::size_t best = base + (oy * stride) * d.width + ox * stride;
        for (std::size_t i = 0; i < win; ++i) {
          for (std::size_t j = 0; j < win; ++j) {
            const std::size_t idx = base + (oy * stride + i) * d.width + ox * stride + j;
            if (in[idx] > in[best]) best = idx;
          }
        }
        out[n] = in[best];
        node.saved_index[n] = best;
      }
    }
  }
}

void softmax_ce_forward(Node& node) {
  const Tensor& logits = node.inputs[0];
  const std::size_t batch = logits.dim(0);
  const std::size_t classes = logits.dim(1);
  const double* x = logits.values().data();
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const double* row = x + b * classes;
    const double m = *std::max_element(row, row + classes);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - m);
    total += m + std::log(z) - row[node.attrs.labels[b]];
  }
  node.output.mutable_values()[0] = total / static_cast<double>(batch);
}

void softmax_ce_backward(Node& node) {
  Tensor& logits = node.inputs[0];
  const std::size_t batch = logits.dim(0);
  const std::size_t classes = logits.dim(1);
  const double* x = logits.values().data();
  const double upstream = node.output.grad()[0] / static_cast<double>(batch);
  auto g = logits.mutable_grad();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* row = x + b * classes;
    const double m = *std::max_element(row, row + classes);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - m);
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(row[c] - m) / z;
      const double target = static_cast<int>(c) == node.attrs.labels[b] ? 1.0 : 0.0;
      g[b * classes + c] += upstream * (p - target);
    }
  }
}

double sigmoid_value(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

std::size_t inner_extent(const Shape& shape, std::size_t axis) {
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  return inner;
}

void binary_forward(Node& node) {
  const auto a = node.inputs[0].values();
  const auto b = node.inputs[1].values();
  auto out = node.output.mutable_values();
  const std::size_t n = out.size();
  const bool ba = a.size() == 1 && n != 1;
  const bool bb = b.size() == 1 && n != 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = a[ba ? 0 : i];
    const double y = b[bb ? 0 : i];
    switch (node.kind) {
      case OpKind::kAdd: out[i] = x + y; break;
      case OpKind::kSub: out[i] = x - y; break;
      case OpKind::kMul: out[i] = x * y; break;
      case OpKind::kDiv:
        if (y == 0.0) throw DomainError("div: division by zero at index " + std::to_string(i));
        out[i] = x / y;
        break;
      default: break;
    }
  }
}

void binary_backward(Node& node) {
  Tensor& ta = node.inputs[0];
  Tensor& tb = node.inputs[1];
  const auto a = ta.values();
  const auto b = tb.values();
  const auto g = node.output.grad();
  const std::size_t n = g.size();
  const bool ba = a.size() == 1 && n != 1;
  const bool bb = b.size() == 1 && n != 1;
  const bool want_a = ta.requires_grad();
  const bool want_b = tb.requires_grad();
  std::span<double> ga = want_a ? ta.mutable_grad() : std::span<double>{};
  std::span<double> gb = want_b ? tb.mutable_grad() : std::span<double>{};
  for (std::size_t i = 0; i < n; ++i) {
    const double x = a[ba ? 0 : i];
    const double y = b[bb ? 0 : i];
    double da = 0.0, db = 0.0;
    switch (node.kind) {
      case OpKind::kAdd: da = 1.0; db = 1.0; break;
      case OpKind::kSub: da = 1.0; db = -1.0; break;
      case OpKind::kMul: da = y; db = x; break;
      case OpKind::kDiv: da = 1.0 / y; db = -x / (y * y); break;
      default: break;
    }
    if (want_a) ga[ba ? 0 : i] += g[i] * da;
    if (want_b) gb[bb ? 0 : i] += g[i] * db;
  }
}

void unary_forward(Node& node) {
  const auto a = node.inputs[0].values();
  auto out = node.output.mutable_values();
  const double c = node.attrs.scalar;
  if (node.kind == OpKind::kRelu) {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
    return;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    switch (node.kind) {
      case OpKind::kRelu: out[i] = x > 0.0 ? x : 0.0; break;
      case OpKind::kExp: out[i] = std::exp(x); break;
      case OpKind::kLog:
        if (!(x > 0.0)) {
          throw DomainError("log: input must be strictly positive, got " + std::to_string(x) + " at index " +
                            std::to_string(i));
        }
        out[i] = std::log(x);
        break;
      case OpKind::kAbs: out[i] = std::fabs(x); break;
      case OpKind::kSquare: out[i] = x * x; break;
      case OpKind::kNegate: out[i] = -x; break;
      case OpKind::kScale: out[i] = c * x; break;
      case OpKind::kClampMin: out[i] = x > c ? x : c; break;
      case OpKind::kSigmoid: out[i] = sigmoid_value(x); break;
      default: break;
    }
  }
}

void unary_backward(Node& node) {
  Tensor& ta = node.inputs[0];
  if (!ta.requires_grad()) return;
  const auto a = ta.values();
  const auto y = node.output.values();
  const auto g = node.output.grad();
  auto ga = ta.mutable_grad();
  const double c = node.attrs.scalar;
  if (node.kind == OpKind::kRelu) {
    for (std::size_t i = 0; i < a.size(); ++i) ga[i] += a[i] > 0.0 ? g[i] : 0.0;
    return;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    double d = 0.0;
    switch (node.kind) {
      case OpKind::kRelu: d = x > 0.0 ? 1.0 : 0.0; break;
      case OpKind::kExp: d = y[i]; break;
      case OpKind::kLog: d = 1.0 / x; break;
      case OpKind::kAbs: d = sign(x); break;
      case OpKind::kSquare: d = 2.0 * x; break;
      case OpKind::kNegate: d = -1.0; break;
      case OpKind::kScale: d = c; break;
      case OpKind::kClampMin: d = x > c ? 1.0 : 0.0; break;
      case OpKind::kSigmoid: d = y[i] * (1.0 - y[i]); break;
      default: break;
    }
    ga[i] += g[i] * d;
  }
}

}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kDiv: return "div";
    case OpKind::kRelu: return "relu";
    case OpKind::kExp: return "exp";
    case OpKind::kLog: return "log";
    case OpKind::kAbs: return "abs";
    case OpKind::kSquare: return "square";
    case OpKind::kNegate: return "negate";
    case OpKind::kScale: return "scale";
    case OpKind::kClampMin: return "clamp_min";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kBiasAdd: return "bias_add";
    case OpKind::kConv2d: return "conv2d";
    case OpKind::kMaxPool2d: return "maxpool2d";
    case OpKind::kGlobalAvgPool: return "global_avg_pool";
    case OpKind::kMean: return "mean";
    case OpKind::kSum: return "sum";
    case OpKind::kSoftmaxCrossEntropy: return "softmax_cross_entropy";
  }
  return "unknown";
}

namespace detail {

void forward(Node& node) {
  if (is_binary(node.kind)) return binary_forward(node);
  switch (node.kind) {
    case OpKind::kMatMul: {
      const Tensor& a = node.inputs[0];
      const Tensor& b = node.inputs[1];
      ConstMatMap ma(a.values().data(), a.dim(0), a.dim(1));
      ConstMatMap mb(b.values().data(), b.dim(0), b.dim(1));
      MatMap(node.output.mutable_values().data(), a.dim(0), b.dim(1)).noalias() = ma * mb;
      return;
    }
    case OpKind::kBiasAdd: {
      const auto x = node.inputs[0].values();
      const auto bias = node.inputs[1].values();
      auto out = node.output.mutable_values();
      const std::size_t inner = inner_extent(node.inputs[0].shape(), node.attrs.axis);
      const std::size_t extent = bias.size();
      for (std::size_t blk = 0, i = 0; i < x.size(); ++blk, i += inner) {
        const double b = bias[blk % extent];
        for (std::size_t j = i; j < i + inner; ++j) out[j] = x[j] + b;
      }
      return;
    }
    case OpKind::kConv2d: return conv_forward(node);
    case OpKind::kMaxPool2d: return maxpool_forward(node);
    case OpKind::kGlobalAvgPool: {
      const SpatialDims d = spatial_dims("global_avg_pool", node.inputs[0]);
      const auto x = node.inputs[0].values();
      auto out = node.output.mutable_values();
      const std::size_t plane = d.height * d.width;
      for (std::size_t bc = 0; bc < d.batch * d.channels; ++bc) {
        double s = 0.0;
        for (std::size_t p = 0; p < plane; ++p) s += x[bc * plane + p];
        out[bc] = s / static_cast<double>(plane);
      }
      return;
    }
    case OpKind::kMean:
    case OpKind::kSum: {
      double s = 0.0;
      for (double v : node.inputs[0].values()) s += v;
      if (node.kind == OpKind::kMean) s /= static_cast<double>(node.inputs[0].size());
      node.output.mutable_values()[0] = s;
      return;
    }
    case OpKind::kSoftmaxCrossEntropy: return softmax_ce_forward(node);
    default: return unary_forward(node);
  }
}

void backward(Node& node) {
  if (!node.output.has_grad()) return;
  if (is_binary(node.kind)) return binary_backward(node);
  switch (node.kind) {
    case OpKind::kMatMul: {
      Tensor& a = node.inputs[0];
      Tensor& b = node.inputs[1];
      const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
      ConstMatMap dc(node.output.grad().data(), m, n);
      if (a.requires_grad()) {
        MatMap(a.mutable_grad().data(), m, k).noalias() += dc * ConstMatMap(b.values().data(), k, n).transpose();
      }
      if (b.requires_grad()) {
        MatMap(b.mutable_grad().data(), k, n).noalias() += ConstMatMap(a.values().data(), m, k).transpose() * dc;
      }
      return;
    }
    case OpKind::kBiasAdd: {
      Tensor& x = node.inputs[0];
      Tensor& bias = node.inputs[1];
      const auto g = node.output.grad();
      if (x.requires_grad()) {
        auto gx = x.mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
      }
      if (bias.requires_grad()) {
        auto gb = bias.mutable_grad();
        const std::size_t inner = inner_extent(x.shape(), node.attrs.axis);
        const std::size_t extent = gb.size();
        for (std::size_t blk = 0, i = 0; i < g.size(); ++blk, i += inner) {
          double acc = 0.0;
          for (std::size_t j = i; j < i + inner; ++j) acc += g[j];
          gb[blk % extent] += acc;
        }
      }
      return;
    }
    case OpKind::kConv2d: return conv_backward(node);
    case OpKind::kMaxPool2d: {
      Tensor& x = node.inputs[0];
      if (!x.requires_grad()) return;
      auto gx = x.mutable_grad();
      const auto g = node.output.grad();
      for (std::size_t n = 0; n < g.size(); ++n) gx[node.saved_index[n]] += g[n];
      return;
    }
    case OpKind::kGlobalAvgPool: {
      Tensor& x = node.inputs[0];
      if (!x.requires_grad()) return;
      const SpatialDims d = spatial_dims("global_avg_pool", x);
      const std::size_t plane = d.height * d.width;
      const double inv = 1.0 / static_cast<double>(plane);
      auto gx = x.mutable_grad();
      const auto g = node.output.grad();
      for (std::size_t bc = 0; bc < d.batch * d.channels; ++bc) {
        for (std::size_t p = 0; p < plane; ++p) gx[bc * plane + p] += g[bc] * inv;
      }
      return;
    }
    case OpKind::kMean:
    case OpKind::kSum: {
      Tensor& x = node.inputs[0];
      if (!x.requires_grad()) return;
      double d = node.output.grad()[0];
      if (node.kind == OpKind::kMean) d /= static_cast<double>(x.size());
      for (double& v : x.mutable_grad()) v += d;
      return;
    }
    case OpKind::kSoftmaxCrossEntropy:
      if (node.inputs[0].requires_grad()) softmax_ce_backward(node);
      return;
    default: return unary_backward(node);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public constructors: validate, then record.

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  return record(tape, OpKind::kAdd, {a, b}, broadcast_shape("add", a, b));
}
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  return record(tape, OpKind::kSub, {a, b}, broadcast_shape("sub", a, b));
}
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  return record(tape, OpKind::kMul, {a, b}, broadcast_shape("mul", a, b));
}
Tensor div(Tape& tape, const Tensor& a, const Tensor& b) {
  return record(tape, OpKind::kDiv, {a, b}, broadcast_shape("div", a, b));
}

Tensor relu(Tape& tape, const Tensor& a) { return record(tape, OpKind::kRelu, {a}, a.shape()); }
Tensor exp(Tape& tape, const Tensor& a) { return record(tape, OpKind::kExp, {a}, a.shape()); }
Tensor log(Tape& tape, const Tensor& a) { return record(tape, OpKind::kLog, {a}, a.shape()); }
Tensor abs(Tape& tape, const Tensor& a) { return record(tape, OpKind::kAbs, {a}, a.shape()); }
Tensor square(Tape& tape, const Tensor& a) { return record(tape, OpKind::kSquare, {a}, a.shape()); }
Tensor negate(Tape& tape, const Tensor& a) { return record(tape, OpKind::kNegate, {a}, a.shape()); }
Tensor sigmoid(Tape& tape, const Tensor& a) { return record(tape, OpKind::kSigmoid, {a}, a.shape()); }

Tensor scale(Tape& tape, const Tensor& a, double factor) {
  OpAttrs attrs;
  attrs.scalar = factor;
  return record(tape, OpKind::kScale, {a}, a.shape(), std::move(attrs));
}

Tensor clamp_min(Tape& tape, const Tensor& a, double floor) {
  OpAttrs attrs;
  attrs.scalar = floor;
  return record(tape, OpKind::kClampMin, {a}, a.shape(), std::move(attrs));
}

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw StructuralError("matmul: incompatible shapes " + shape_to_string(a.shape()) + " x " +
                          shape_to_string(b.shape()));
  }
  return record(tape, OpKind::kMatMul, {a, b}, {a.dim(0), b.dim(1)});
}

Tensor bias_add(Tape& tape, const Tensor& x, const Tensor& bias, std::size_t axis) {
  if (axis >= x.rank() || bias.rank() != 1 || bias.dim(0) != x.dim(axis)) {
    throw StructuralError("bias_add: bias " + shape_to_string(bias.shape()) + " does not match axis " +
                          std::to_string(axis) + " of " + shape_to_string(x.shape()));
  }
  OpAttrs attrs;
  attrs.axis = axis;
  return record(tape, OpKind::kBiasAdd, {x, bias}, x.shape(), std::move(attrs));
}

Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& kernels, std::size_t stride, std::size_t padding) {
  const SpatialDims d = spatial_dims("conv2d", input);
  if (kernels.rank() != 4 || kernels.dim(1) != d.channels) {
    throw StructuralError("conv2d: kernels " + shape_to_string(kernels.shape()) + " incompatible with input " +
                          shape_to_string(input.shape()));
  }
  if (stride == 0) throw StructuralError("conv2d: stride must be positive");
  const std::size_t kh = kernels.dim(2), kw = kernels.dim(3);
  const std::size_t ph = d.height + 2 * padding, pw = d.width + 2 * padding;
  if (kh > ph || kw > pw) {
    throw StructuralError("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                          " larger than padded input " + std::to_string(ph) + "x" + std::to_string(pw));
  }
  if ((ph - kh) % stride != 0 || (pw - kw) % stride != 0) {
    throw StructuralError("conv2d: non-integral output size for stride " + std::to_string(stride));
  }
  const std::size_t hout = (ph - kh) / stride + 1;
  const std::size_t wout = (pw - kw) / stride + 1;
  OpAttrs attrs;
  attrs.stride = stride;
  attrs.padding = padding;
  return record(tape, OpKind::kConv2d, {input, kernels}, spatial_shape(input, d.batch, kernels.dim(0), hout, wout),
                std::move(attrs));
}

Tensor maxpool2d(Tape& tape, const Tensor& input, std::size_t window, std::size_t stride) {
  const SpatialDims d = spatial_dims("maxpool2d", input);
  if (window == 0 || stride == 0) throw StructuralError("maxpool2d: window and stride must be positive");
  if (window > d.height || window > d.width) {
    throw StructuralError("maxpool2d: window " + std::to_string(window) + " larger than input " +
                          std::to_string(d.height) + "x" + std::to_string(d.width));
  }
  const std::size_t hout = (d.height - window) / stride + 1;
  const std::size_t wout = (d.width - window) / stride + 1;
  OpAttrs attrs;
  attrs.window = window;
  attrs.stride = stride;
  return record(tape, OpKind::kMaxPool2d, {input}, spatial_shape(input, d.batch, d.channels, hout, wout),
                std::move(attrs));
}

Tensor global_avg_pool(Tape& tape, const Tensor& input) {
  const SpatialDims d = spatial_dims("global_avg_pool", input);
  Shape out = input.rank() == 3 ? Shape{d.channels} : Shape{d.batch, d.channels};
  return record(tape, OpKind::kGlobalAvgPool, {input}, std::move(out));
}

Tensor mean(Tape& tape, const Tensor& a) { return record(tape, OpKind::kMean, {a}, {}); }
Tensor sum(Tape& tape, const Tensor& a) { return record(tape, OpKind::kSum, {a}, {}); }

Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || labels.size() != logits.dim(0)) {
    throw StructuralError("softmax_cross_entropy: logits " + shape_to_string(logits.shape()) + " vs " +
                          std::to_string(labels.size()) + " labels");
  }
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.dim(1)) {
      throw DomainError("softmax_cross_entropy: label " + std::to_string(label) + " out of range");
    }
  }
  OpAttrs attrs;
  attrs.labels.assign(labels.begin(), labels.end());
  return record(tape, OpKind::kSoftmaxCrossEntropy, {logits}, {}, std::move(attrs));
}

}  // namespace mtlw::ad
