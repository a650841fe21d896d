#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "vizsim/error.hpp"
#include "vizsim/tensor.hpp"

using vizsim::Tensor;

TEST(Tensor, ShapeAndFill) {
  Tensor t({2, 3, 4}, 1.5f);
  EXPECT_EQ(t.rank(), 3u);
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.dim(1), 3u);
  for (float v : t.data()) EXPECT_EQ(v, 1.5f);
}

TEST(Tensor, DataSizeMismatchThrows) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<float>{1, 2, 3}), vizsim::ShapeError);
}

TEST(Tensor, ChwIndexing) {
  Tensor t({2, 2, 3});
  t.at(1, 1, 2) = 7.0f;
  EXPECT_EQ(t[1 * 6 + 1 * 3 + 2], 7.0f);
}

TEST(Tensor, ReshapeKeepsData) {
  Tensor t({2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6});
  auto r = t.reshaped({3, 2});
  EXPECT_EQ(r.shape(), (vizsim::Shape{3, 2}));
  EXPECT_EQ(r[5], 6.0f);
  EXPECT_THROW((void)t.reshaped({4, 2}), vizsim::ShapeError);
}

TEST(Tensor, FiniteCheck) {
  Tensor t({3}, 0.0f);
  EXPECT_TRUE(t.all_finite());
  t[1] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_FALSE(t.all_finite());
}

TEST(Tensor, ShapeString) {
  EXPECT_EQ(vizsim::shape_str({3, 64, 64}), "[3, 64, 64]");
  EXPECT_EQ(vizsim::shape_numel({3, 64, 64}), 3u * 64 * 64);
}
