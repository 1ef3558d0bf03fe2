#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "generators.hpp"
#include "glyphsmith/error.hpp"
#include "glyphsmith/nn.hpp"

using namespace glyphsmith;
using namespace glyphsmith::testing;

namespace {

double dot(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += a[i] * b[i];
  return s;
}

void expect_close(const Tensor& a, const Tensor& b, double tol) {
  ASSERT_EQ(a.shape, b.shape);
  for (std::size_t i = 0; i < a.numel(); ++i) ASSERT_NEAR(a[i], b[i], tol) << "index " << i;
}

// Checks `analytic` against central differences of sum(dy * f()) w.r.t. `x`.
void expect_fd(Tensor& x, const Tensor& analytic, const std::function<Tensor()>& f, const Tensor& dy) {
  ASSERT_EQ(x.shape, analytic.shape);
  const double h = 1e-5;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = dot(dy, f());
    x[i] = keep - h;
    const double fm = dot(dy, f());
    x[i] = keep;
    const double fd = (fp - fm) / (2 * h);
    EXPECT_NEAR(analytic[i], fd, 1e-5 * std::max(1.0, std::abs(fd))) << "index " << i;
  }
}

Tensor naive_conv(const Tensor& x, const Tensor& k, const Tensor& b) {
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2), co = k.dim(0);
  Tensor y({co, h, w});
  for (std::size_t o = 0; o < co; ++o) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t q = 0; q < w; ++q) {
        double s = b[o];
        for (std::size_t i = 0; i < c; ++i) {
          for (int dr = -1; dr <= 1; ++dr) {
            for (int dq = -1; dq <= 1; ++dq) {
              const long rr = static_cast<long>(r) + dr, qq = static_cast<long>(q) + dq;
              if (rr < 0 || qq < 0 || rr >= static_cast<long>(h) || qq >= static_cast<long>(w)) continue;
              s += k[((o * c + i) * 3 + (dr + 1)) * 3 + (dq + 1)] * x[(i * h + rr) * w + qq];
            }
          }
        }
        y[(o * h + r) * w + q] = s;
      }
    }
  }
  return y;
}

Tensor naive_groupnorm(const Tensor& x, std::size_t groups, const Tensor& scale, const Tensor& shift) {
  const std::size_t c = x.dim(0), hw = x.dim(1) * x.dim(2), per = c / groups;
  Tensor y(x.shape);
  for (std::size_t g = 0; g < groups; ++g) {
    double mean = 0, var = 0;
    const std::size_t n = per * hw;
    for (std::size_t i = g * per * hw; i < (g + 1) * per * hw; ++i) mean += x[i];
    mean /= n;
    for (std::size_t i = g * per * hw; i < (g + 1) * per * hw; ++i) var += (x[i] - mean) * (x[i] - mean);
    var /= n;
    for (std::size_t ch = g * per; ch < (g + 1) * per; ++ch) {
      for (std::size_t p = 0; p < hw; ++p) {
        const std::size_t i = ch * hw + p;
        y[i] = scale[ch] * (x[i] - mean) / std::sqrt(var + nn::kGroupNormEpsilon) + shift[ch];
      }
    }
  }
  return y;
}

}  // namespace

TEST(Relu, Example) {
  const Tensor y = nn::relu(Tensor({2}, {-1, 2}));
  EXPECT_EQ(y, Tensor({2}, {0, 2}));
  const Tensor g = nn::relu_backward(Tensor({3}, {-1, 0, 2}), Tensor({3}, {5, 5, 5}));
  EXPECT_EQ(g, Tensor({3}, {0, 0, 5}));
}

TEST(Softmax, Example) {
  const Tensor y = nn::softmax(Tensor({2}, {0, 0}), 0);
  EXPECT_DOUBLE_EQ(y[0], 0.5);
  EXPECT_DOUBLE_EQ(y[1], 0.5);
}

TEST(Softmax, RowsSumToOneAndLargeInputsStayFinite) {
  SplitMix64 rng(1);
  Tensor x = random_tensor(rng, {3, 4, 5}, -5, 5);
  x[0] = 800;
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const Tensor y = nn::softmax(x, axis);
    for (double v : y.data) EXPECT_TRUE(std::isfinite(v));
  }
  const Tensor y = nn::softmax(x, 2);
  for (std::size_t r = 0; r < 12; ++r) {
    double s = 0;
    for (std::size_t k = 0; k < 5; ++k) s += y[r * 5 + k];
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Softmax, Backward) {
  SplitMix64 rng(2);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    Tensor x = random_tensor(rng, {2, 3, 4});
    const Tensor dy = random_tensor(rng, {2, 3, 4});
    const Tensor dx = nn::softmax_backward(nn::softmax(x, axis), dy, axis);
    expect_fd(x, dx, [&] { return nn::softmax(x, axis); }, dy);
  }
}

TEST(Dense, MatchesNaiveAndBackward) {
  SplitMix64 rng(3);
  Tensor x = random_tensor(rng, {3, 5}), w = random_tensor(rng, {4, 5}), b = random_tensor(rng, {4});
  const Tensor y = nn::dense(x, w, b);
  for (std::size_t n = 0; n < 3; ++n) {
    for (std::size_t o = 0; o < 4; ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < 5; ++i) s += x[n * 5 + i] * w[o * 5 + i];
      EXPECT_NEAR(y[n * 4 + o], s, 1e-12);
    }
  }
  const Tensor dy = random_tensor(rng, {3, 4});
  const nn::DenseGrads g = nn::dense_backward(x, w, dy);
  expect_fd(x, g.dx, [&] { return nn::dense(x, w, b); }, dy);
  expect_fd(w, g.dw, [&] { return nn::dense(x, w, b); }, dy);
  expect_fd(b, g.db, [&] { return nn::dense(x, w, b); }, dy);
  EXPECT_THROW(nn::dense(x, random_tensor(rng, {4, 6}), b), ShapeError);
}

TEST(Conv3x3, MatchesNaive) {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t c = 1 + rng.below(3), co = 1 + rng.below(4), h = 1 + rng.below(7), w = 1 + rng.below(7);
    const Tensor x = random_tensor(rng, {c, h, w}), k = random_tensor(rng, {co, c, 3, 3}), b = random_tensor(rng, {co});
    expect_close(nn::conv3x3(x, k, b), naive_conv(x, k, b), 1e-12);
  }
}

TEST(Conv3x3, Backward) {
  SplitMix64 rng(5);
  Tensor x = random_tensor(rng, {2, 5, 4}), k = random_tensor(rng, {3, 2, 3, 3}), b = random_tensor(rng, {3});
  const Tensor dy = random_tensor(rng, {3, 5, 4});
  const nn::ConvGrads g = nn::conv3x3_backward(x, k, dy);
  auto f = [&] { return nn::conv3x3(x, k, b); };
  expect_fd(x, g.dx, f, dy);
  expect_fd(k, g.dk, f, dy);
  expect_fd(b, g.db, f, dy);
}

TEST(GroupNorm, MatchesNaiveAndBackward) {
  SplitMix64 rng(6);
  Tensor x = random_tensor(rng, {8, 3, 3}, -2, 2), scale = random_tensor(rng, {8}), shift = random_tensor(rng, {8});
  expect_close(nn::groupnorm(x, 4, scale, shift), naive_groupnorm(x, 4, scale, shift), 1e-12);
  expect_close(nn::groupnorm(x, 8, scale, shift), naive_groupnorm(x, 8, scale, shift), 1e-12);
  const Tensor dy = random_tensor(rng, {8, 3, 3});
  const nn::GroupNormGrads g = nn::groupnorm_backward(x, 4, scale, dy);
  auto f = [&] { return nn::groupnorm(x, 4, scale, shift); };
  expect_fd(x, g.dx, f, dy);
  expect_fd(scale, g.dscale, f, dy);
  expect_fd(shift, g.dshift, f, dy);
  EXPECT_THROW(nn::groupnorm(x, 3, scale, shift), ShapeError);
}

TEST(MaxPool, ValuesAndTies) {
  const Tensor x({1, 2, 4}, {1, 5, 7, 7, 3, 2, 7, 7});
  EXPECT_EQ(nn::maxpool2(x), Tensor({1, 1, 2}, {5, 7}));
  const Tensor g = nn::maxpool2_backward(x, Tensor({1, 1, 2}, {1, 2}));
  // The tie in the second window goes to its first element.
  EXPECT_EQ(g, Tensor({1, 2, 4}, {0, 1, 2, 0, 0, 0, 0, 0}));
  EXPECT_THROW(nn::maxpool2(Tensor({1, 3, 4})), ShapeError);
}

TEST(MaxPool, BackwardAwayFromTies) {
  SplitMix64 rng(7);
  Tensor x = random_tensor(rng, {2, 4, 6});
  const Tensor dy = random_tensor(rng, {2, 2, 3});
  expect_fd(x, nn::maxpool2_backward(x, dy), [&] { return nn::maxpool2(x); }, dy);
}

TEST(Relu, BackwardAwayFromZero) {
  SplitMix64 rng(8);
  Tensor x = random_tensor(rng, {3, 7});
  for (double& v : x.data) {
    if (std::abs(v) < 1e-3) v = 0.5;
  }
  const Tensor dy = random_tensor(rng, {3, 7});
  expect_fd(x, nn::relu_backward(x, dy), [&] { return nn::relu(x); }, dy);
}
