#include <gtest/gtest.h>

#include <set>

#include "vizsim/error.hpp"
#include "vizsim/nn/architecture.hpp"

using namespace vizsim;
using namespace vizsim::nn;

TEST(Architecture, NamesRoundTrip) {
  for (auto a : {Arch::alexnet, Arch::squeezenet, Arch::vgg16, Arch::resnet18, Arch::resnet50}) {
    EXPECT_EQ(parse_arch(arch_name(a)), a);
  }
  EXPECT_FALSE(parse_arch("efficientnet").has_value());
}

TEST(Architecture, AlexNetParameterCount) {
  EXPECT_EQ(parameter_count(architecture_spec(Arch::alexnet)), 61'100'840u);
}

TEST(Architecture, SqueezeNetParameterCount) {
  EXPECT_EQ(parameter_count(architecture_spec(Arch::squeezenet)), 1'235'496u);
}

TEST(Architecture, AlexNetExtractionShapesAt64) {
  const auto shapes = extraction_shapes(architecture_spec(Arch::alexnet), {3, 64, 64});
  const std::vector<Shape> expected{{64, 15, 15}, {192, 7, 7}, {384, 3, 3}, {256, 3, 3}, {256, 3, 3}};
  EXPECT_EQ(shapes, expected);
}

TEST(Architecture, SqueezeNetExtractionShapesAt64) {
  const auto shapes = extraction_shapes(architecture_spec(Arch::squeezenet), {3, 64, 64});
  const std::vector<Shape> expected{{64, 31, 31}, {128, 15, 15}, {256, 7, 7}, {384, 3, 3},
                                    {384, 3, 3},  {512, 3, 3},   {512, 3, 3}};
  EXPECT_EQ(shapes, expected);
}

TEST(Architecture, SqueezeNetExtractsRelu1AndSixFires) {
  const auto& spec = architecture_spec(Arch::squeezenet);
  std::vector<std::string> names;
  for (const auto& l : spec.features) {
    if (l.is_extraction_point) names.push_back(l.name);
  }
  const std::vector<std::string> expected{"features.1", "features.4", "features.7", "features.9",
                                          "features.10", "features.11", "features.12"};
  EXPECT_EQ(names, expected);
  EXPECT_EQ(spec.extraction_layer_count, 7u);
}

TEST(Architecture, SpatialDimsNonIncreasing) {
  for (auto a : {Arch::alexnet, Arch::squeezenet, Arch::vgg16, Arch::resnet18, Arch::resnet50}) {
    if (!arch_available(a)) continue;
    const auto shapes = extraction_shapes(architecture_spec(a), {3, 64, 64});
    for (std::size_t i = 1; i < shapes.size(); ++i) {
      EXPECT_LE(shapes[i][1], shapes[i - 1][1]) << arch_name(a);
      EXPECT_LE(shapes[i][2], shapes[i - 1][2]) << arch_name(a);
    }
  }
}

TEST(Architecture, SlotNamesUnique) {
  for (auto a : {Arch::alexnet, Arch::squeezenet, Arch::vgg16, Arch::resnet18, Arch::resnet50}) {
    if (!arch_available(a)) continue;
    std::set<std::string> names;
    for (const auto& s : parameter_slots(architecture_spec(a))) EXPECT_TRUE(names.insert(s.name).second) << s.name;
  }
}

TEST(Architecture, ChannelChainMismatchDetected) {
  EXPECT_THROW(infer_feature_shapes(architecture_spec(Arch::alexnet), {1, 64, 64}), ShapeError);
}

#ifdef VIZSIM_OPTIONAL_ARCHS

TEST(OptionalArchitecture, Vgg16) {
  const auto& spec = architecture_spec(Arch::vgg16);
  EXPECT_EQ(parameter_count(spec), 138'357'544u);
  const std::vector<Shape> expected{{64, 64, 64}, {128, 32, 32}, {256, 16, 16}, {512, 8, 8}, {512, 4, 4}};
  EXPECT_EQ(extraction_shapes(spec, {3, 64, 64}), expected);
}

TEST(OptionalArchitecture, ResNet18) {
  const auto& spec = architecture_spec(Arch::resnet18);
  EXPECT_EQ(parameter_count(spec), 11'689'512u);
  const std::vector<Shape> expected{{64, 32, 32}, {64, 16, 16}, {128, 8, 8}, {256, 4, 4}, {512, 2, 2}};
  EXPECT_EQ(extraction_shapes(spec, {3, 64, 64}), expected);
}

TEST(OptionalArchitecture, ResNet50) {
  const auto& spec = architecture_spec(Arch::resnet50);
  EXPECT_EQ(parameter_count(spec), 25'557'032u);
  const std::vector<Shape> expected{{64, 32, 32}, {64, 16, 16}, {512, 8, 8}, {1024, 4, 4}, {2048, 2, 2}};
  EXPECT_EQ(extraction_shapes(spec, {3, 64, 64}), expected);
}

#else

TEST(OptionalArchitecture, UnavailableWithoutFlag) {
  EXPECT_FALSE(arch_available(Arch::vgg16));
  EXPECT_THROW(architecture_spec(Arch::resnet18), ValidationError);
}

#endif
