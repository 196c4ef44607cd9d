#include <gtest/gtest.h>

#include "attnbn/error.hpp"
#include "attnbn/numerics/ops.hpp"
#include "attnbn/numerics/random.hpp"
#include "oracles.hpp"

namespace attnbn::num {
namespace {

std::vector<double> random_values(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

TEST(Conv2d, PointwiseIdentityKernelCopiesInput) {
  Rng rng(1);
  const auto x = random_values(4 * 5 * 3, rng);
  std::vector<double> eye(9, 0.0);
  for (int i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0;
  const Tensor y = conv2d(Tensor::constant({4, 5, 3}, x), Tensor::constant({1, 1, 3, 3}, eye), Tensor());
  EXPECT_EQ(std::vector<double>(y.values().begin(), y.values().end()), x);
}

TEST(Conv2d, DilatedOnesStencilOnOneHot) {
  for (int hot_r : {0, 3, 5}) {
    for (int hot_c : {1, 3, 6}) {
      std::vector<double> x(49, 0.0);
      x[hot_r * 7 + hot_c] = 1.0;
      const Tensor y = conv2d(Tensor::constant({7, 7, 1}, x), Tensor::filled({3, 3, 1, 1}, 1.0), Tensor(), {2, 1});
      for (int r = 0; r < 7; ++r) {
        for (int c = 0; c < 7; ++c) {
          const int dr = r - hot_r, dc = c - hot_c;
          const bool on = (dr == -2 || dr == 0 || dr == 2) && (dc == -2 || dc == 0 || dc == 2);
          EXPECT_EQ(y[r * 7 + c], on ? 1.0 : 0.0) << r << "," << c;
        }
      }
    }
  }
}

TEST(Conv2d, MatchesLoopOracleAcrossDilationsAndStrides) {
  Rng rng(2);
  for (std::size_t dilation : {1, 2, 4}) {
    for (std::size_t stride : {1, 2}) {
      for (int trial = 0; trial < 5; ++trial) {
        const std::size_t h = 3 + rng.below(7), w = 3 + rng.below(7), cin = 1 + rng.below(3),
                          cout = 1 + rng.below(4);
        const std::size_t k = trial == 0 ? 1 : 3;
        const auto x = random_values(h * w * cin, rng);
        const auto kernel = random_values(k * k * cin * cout, rng);
        const auto bias = random_values(cout, rng);
        const Tensor y = conv2d(Tensor::constant({h, w, cin}, x), Tensor::constant({k, k, cin, cout}, kernel),
                                Tensor::constant({cout}, bias), {dilation, stride});
        const auto want = testing::loop_conv2d(x, h, w, cin, kernel, k, cout, bias, dilation, stride);
        ASSERT_EQ(y.size(), want.size());
        for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(y[i], want[i], 1e-12);
      }
    }
  }
}

TEST(Conv2d, SpecExampleFiveByFive) {
  Rng rng(3);
  for (std::size_t dilation : {1, 2}) {
    const auto x = random_values(5 * 5 * 2, rng);
    const auto kernel = random_values(3 * 3 * 2 * 3, rng);
    const Tensor y = conv2d(Tensor::constant({5, 5, 2}, x), Tensor::constant({3, 3, 2, 3}, kernel), Tensor(),
                            {dilation, 1});
    const auto want = testing::loop_conv2d(x, 5, 5, 2, kernel, 3, 3, {}, dilation, 1);
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(y[i], want[i], 1e-12);
  }
}

TEST(Conv2d, StrideHalvesExtentsRoundingUp) {
  const Tensor y = conv2d(Tensor::zeros({7, 8, 1}), Tensor::zeros({3, 3, 1, 2}), Tensor(), {1, 2});
  EXPECT_EQ(y.shape(), (Shape{4, 4, 2}));
}

TEST(Conv2d, ChannelMismatchIsInvalid) {
  try {
    (void)conv2d(Tensor::zeros({4, 4, 2}), Tensor::zeros({3, 3, 3, 1}), Tensor());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(Conv2d, EvenKernelIsInvalid) {
  EXPECT_THROW((void)conv2d(Tensor::zeros({4, 4, 1}), Tensor::zeros({2, 2, 1, 1}), Tensor()), Error);
}

TEST(Matmul, SmallProduct) {
  const Tensor y = matmul(Tensor::constant({2, 2}, {1, 2, 3, 4}), Tensor::constant({2, 1}, {5, 6}));
  EXPECT_EQ(y[0], 17.0);
  EXPECT_EQ(y[1], 39.0);
}

}  // namespace
}  // namespace attnbn::num
