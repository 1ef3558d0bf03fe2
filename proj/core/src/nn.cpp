#include "glyphsmith/nn.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "glyphsmith/error.hpp"

namespace glyphsmith::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using Eigen::Index;

ConstMatMap as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMatMap(t.ptr(), static_cast<Index>(rows), static_cast<Index>(cols));
}

MatMap as_matrix(Tensor& t, std::size_t rows, std::size_t cols) {
  return MatMap(t.ptr(), static_cast<Index>(rows), static_cast<Index>(cols));
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " + t.shape_string());
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape != b.shape) throw ShapeError(std::string(what) + ": " + a.shape_string() + " vs " + b.shape_string());
}

// col[(c*9 + ky*3 + kx), y*W + x] = x[c, y+ky-1, x+kx-1]
Tensor im2col(const Tensor& x) {
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor col({c * 9, h * w});
  double* out = col.ptr();
  const double* in = x.ptr();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        double* row = out + ((ch * 9 + ky * 3 + kx) * h * w);
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + ky - 1;
          double* dst = row + y * w;
          if (sy < 0 || sy >= static_cast<long>(h)) {
            std::fill(dst, dst + w, 0.0);
            continue;
          }
          const double* src = in + (ch * h + static_cast<std::size_t>(sy)) * w;
          for (std::size_t xx = 0; xx < w; ++xx) {
            const long sx = static_cast<long>(xx) + kx - 1;
            dst[xx] = (sx < 0 || sx >= static_cast<long>(w)) ? 0.0 : src[sx];
          }
        }
      }
    }
  }
  return col;
}

Tensor col2im(const Tensor& col, std::size_t c, std::size_t h, std::size_t w) {
  Tensor x({c, h, w});
  double* out = x.ptr();
  const double* in = col.ptr();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const double* row = in + ((ch * 9 + ky * 3 + kx) * h * w);
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + ky - 1;
          if (sy < 0 || sy >= static_cast<long>(h)) continue;
          double* dst = out + (ch * h + static_cast<std::size_t>(sy)) * w;
          const double* src = row + y * w;
          for (std::size_t xx = 0; xx < w; ++xx) {
            const long sx = static_cast<long>(xx) + kx - 1;
            if (sx >= 0 && sx < static_cast<long>(w)) dst[sx] += src[xx];
          }
        }
      }
    }
  }
  return x;
}

}  // namespace

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank(x, 2, "dense input");
  require_rank(w, 2, "dense weight");
  const std::size_t n = x.dim(0), in = x.dim(1), out = w.dim(0);
  if (w.dim(1) != in) throw ShapeError("dense: weight " + w.shape_string() + " does not fit input " + x.shape_string());
  require_shape(b, {out}, "dense bias");
  Tensor y({n, out});
  auto ym = as_matrix(y, n, out);
  ym.noalias() = as_matrix(x, n, in) * as_matrix(w, out, in).transpose();
  ym.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b.ptr(), static_cast<Index>(out));
  return y;
}

DenseGrads dense_backward(const Tensor& x, const Tensor& w, const Tensor& dy) {
  const std::size_t n = x.dim(0), in = x.dim(1), out = w.dim(0);
  require_shape(dy, {n, out}, "dense grad");
  DenseGrads g{Tensor({n, in}), Tensor({out, in}), Tensor({out})};
  const auto dym = as_matrix(dy, n, out);
  as_matrix(g.dx, n, in).noalias() = dym * as_matrix(w, out, in);
  as_matrix(g.dw, out, in).noalias() = dym.transpose() * as_matrix(x, n, in);
  Eigen::Map<Eigen::RowVectorXd>(g.db.ptr(), static_cast<Index>(out)) = dym.colwise().sum();
  return g;
}

Tensor conv3x3(const Tensor& x, const Tensor& k, const Tensor& b) {
  require_rank(x, 3, "conv3x3 input");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (k.rank() != 4 || k.dim(1) != c || k.dim(2) != 3 || k.dim(3) != 3) {
    throw ShapeError("conv3x3: kernel " + k.shape_string() + " does not fit input " + x.shape_string());
  }
  const std::size_t co = k.dim(0);
  require_shape(b, {co}, "conv3x3 bias");
  const Tensor col = im2col(x);
  Tensor y({co, h, w});
  auto ym = as_matrix(y, co, h * w);
  ym.noalias() = as_matrix(k, co, c * 9) * as_matrix(col, c * 9, h * w);
  ym.colwise() += Eigen::Map<const Eigen::VectorXd>(b.ptr(), static_cast<Index>(co));
  return y;
}

ConvGrads conv3x3_backward(const Tensor& x, const Tensor& k, const Tensor& dy, bool need_input_grad) {
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2), co = k.dim(0);
  require_shape(dy, {co, h, w}, "conv3x3 grad");
  const Tensor col = im2col(x);
  const auto dym = as_matrix(dy, co, h * w);
  ConvGrads g;
  g.dk = Tensor(k.shape);
  g.db = Tensor({co});
  as_matrix(g.dk, co, c * 9).noalias() = dym * as_matrix(col, c * 9, h * w).transpose();
  Eigen::Map<Eigen::VectorXd>(g.db.ptr(), static_cast<Index>(co)) = dym.rowwise().sum();
  if (need_input_grad) {
    Tensor dcol({c * 9, h * w});
    as_matrix(dcol, c * 9, h * w).noalias() = as_matrix(k, co, c * 9).transpose() * dym;
    g.dx = col2im(dcol, c, h, w);
  }
  return g;
}

namespace {

struct GroupStats {
  std::vector<double> mean, rstd;
};

GroupStats group_stats(const Tensor& x, std::size_t groups) {
  const std::size_t c = x.dim(0), hw = x.dim(1) * x.dim(2);
  const std::size_t per = c / groups * hw;
  GroupStats s{std::vector<double>(groups), std::vector<double>(groups)};
  for (std::size_t g = 0; g < groups; ++g) {
    const double* p = x.ptr() + g * per;
    double sum = 0.0;
    for (std::size_t i = 0; i < per; ++i) sum += p[i];
    const double mean = sum / static_cast<double>(per);
    double var = 0.0;
    for (std::size_t i = 0; i < per; ++i) var += (p[i] - mean) * (p[i] - mean);
    var /= static_cast<double>(per);
    s.mean[g] = mean;
    s.rstd[g] = 1.0 / std::sqrt(var + kGroupNormEpsilon);
  }
  return s;
}

void check_groupnorm(const Tensor& x, std::size_t groups, const Tensor& scale) {
  require_rank(x, 3, "groupnorm input");
  const std::size_t c = x.dim(0);
  if (groups == 0 || c % groups != 0) {
    throw ShapeError("groupnorm: " + std::to_string(c) + " channels not divisible into " + std::to_string(groups) + " groups");
  }
  require_shape(scale, {c}, "groupnorm scale");
}

}  // namespace

Tensor groupnorm(const Tensor& x, std::size_t groups, const Tensor& scale, const Tensor& shift) {
  check_groupnorm(x, groups, scale);
  require_shape(shift, scale.shape, "groupnorm shift");
  const std::size_t c = x.dim(0), hw = x.dim(1) * x.dim(2), cpg = c / groups;
  const GroupStats s = group_stats(x, groups);
  Tensor y(x.shape);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const std::size_t g = ch / cpg;
    const double a = scale[ch] * s.rstd[g];
    const double bias = shift[ch] - a * s.mean[g];
    const double* p = x.ptr() + ch * hw;
    double* q = y.ptr() + ch * hw;
    for (std::size_t i = 0; i < hw; ++i) q[i] = a * p[i] + bias;
  }
  return y;
}

GroupNormGrads groupnorm_backward(const Tensor& x, std::size_t groups, const Tensor& scale, const Tensor& dy) {
  check_groupnorm(x, groups, scale);
  require_same_shape(x, dy, "groupnorm grad");
  const std::size_t c = x.dim(0), hw = x.dim(1) * x.dim(2), cpg = c / groups;
  const double m = static_cast<double>(cpg * hw);
  const GroupStats s = group_stats(x, groups);
  GroupNormGrads g{Tensor(x.shape), Tensor({c}), Tensor({c})};
  for (std::size_t grp = 0; grp < groups; ++grp) {
    const double mean = s.mean[grp], rstd = s.rstd[grp];
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (std::size_t ch = grp * cpg; ch < (grp + 1) * cpg; ++ch) {
      const double* p = x.ptr() + ch * hw;
      const double* d = dy.ptr() + ch * hw;
      double ds = 0.0, dsh = 0.0;
      for (std::size_t i = 0; i < hw; ++i) {
        const double xhat = (p[i] - mean) * rstd;
        ds += d[i] * xhat;
        dsh += d[i];
      }
      g.dscale[ch] = ds;
      g.dshift[ch] = dsh;
      sum_dxhat += scale[ch] * dsh;
      sum_dxhat_xhat += scale[ch] * ds;
    }
    for (std::size_t ch = grp * cpg; ch < (grp + 1) * cpg; ++ch) {
      const double* p = x.ptr() + ch * hw;
      const double* d = dy.ptr() + ch * hw;
      double* out = g.dx.ptr() + ch * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        const double xhat = (p[i] - mean) * rstd;
        out[i] = rstd / m * (m * scale[ch] * d[i] - sum_dxhat - xhat * sum_dxhat_xhat);
      }
    }
  }
  return g;
}

Tensor relu(const Tensor& x) {
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& dy) {
  require_same_shape(x, dy, "relu grad");
  Tensor dx(x.shape);
  for (std::size_t i = 0; i < x.numel(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
  return dx;
}

namespace {

template <typename Visit>
void pool_windows(const Tensor& x, Visit&& visit) {
  require_rank(x, 3, "maxpool2 input");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (h % 2 != 0 || w % 2 != 0) throw ShapeError("maxpool2: odd spatial size " + x.shape_string());
  const std::size_t oh = h / 2, ow = w / 2;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        const std::size_t base = (ch * h + 2 * y) * w + 2 * xx;
        const std::size_t idx[4] = {base, base + 1, base + w, base + w + 1};
        std::size_t best = idx[0];
        for (int k = 1; k < 4; ++k) {
          if (x[idx[k]] > x[best]) best = idx[k];
        }
        visit((ch * oh + y) * ow + xx, best);
      }
    }
  }
}

}  // namespace

Tensor maxpool2(const Tensor& x) {
  require_rank(x, 3, "maxpool2 input");
  Tensor y({x.dim(0), x.dim(1) / 2, x.dim(2) / 2});
  pool_windows(x, [&](std::size_t out, std::size_t in) { y[out] = x[in]; });
  return y;
}

Tensor maxpool2_backward(const Tensor& x, const Tensor& dy) {
  require_rank(x, 3, "maxpool2 input");
  require_shape(dy, {x.dim(0), x.dim(1) / 2, x.dim(2) / 2}, "maxpool2 grad");
  Tensor dx(x.shape);
  pool_windows(x, [&](std::size_t out, std::size_t in) { dx[in] += dy[out]; });
  return dx;
}

namespace {

struct AxisSplit {
  std::size_t outer = 1, n = 1, inner = 1;
};

AxisSplit split_axis(const Tensor& t, std::size_t axis) {
  if (axis >= t.rank()) throw ShapeError("softmax: axis out of range for " + t.shape_string());
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= t.dim(i);
  s.n = t.dim(axis);
  for (std::size_t i = axis + 1; i < t.rank(); ++i) s.inner *= t.dim(i);
  return s;
}

}  // namespace

Tensor softmax(const Tensor& x, std::size_t axis) {
  const AxisSplit s = split_axis(x, axis);
  Tensor y(x.shape);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.n * s.inner + in;
      double mx = x[base];
      for (std::size_t k = 1; k < s.n; ++k) mx = std::max(mx, x[base + k * s.inner]);
      double z = 0.0;
      for (std::size_t k = 0; k < s.n; ++k) {
        const double e = std::exp(x[base + k * s.inner] - mx);
        y[base + k * s.inner] = e;
        z += e;
      }
      for (std::size_t k = 0; k < s.n; ++k) y[base + k * s.inner] /= z;
    }
  }
  return y;
}

Tensor softmax_backward(const Tensor& y, const Tensor& dy, std::size_t axis) {
  require_same_shape(y, dy, "softmax grad");
  const AxisSplit s = split_axis(y, axis);
  Tensor dx(y.shape);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.n * s.inner + in;
      double dot = 0.0;
      for (std::size_t k = 0; k < s.n; ++k) dot += y[base + k * s.inner] * dy[base + k * s.inner];
      for (std::size_t k = 0; k < s.n; ++k) {
        const std::size_t i = base + k * s.inner;
        dx[i] = y[i] * (dy[i] - dot);
      }
    }
  }
  return dx;
}

}  // namespace glyphsmith::nn
