#include "doclayout/types.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "doclayout/error.hpp"

namespace doclayout {
namespace {

TEST(ClassLabel, NamesRoundTrip) {
  for (ClassLabel c : kAllClasses) EXPECT_EQ(parse_class_label(class_name(c)), c);
  EXPECT_EQ(class_name(ClassLabel::kTextBox), "text_box");
}

TEST(ClassLabel, AliasesAccepted) {
  for (const char* name : {"text-box", "TextBox", "textbox", "Text Box", "TEXT_BOX"}) {
    EXPECT_EQ(parse_class_label(name), ClassLabel::kTextBox) << name;
  }
  EXPECT_EQ(parse_class_label("Paragraph"), ClassLabel::kParagraph);
  EXPECT_EQ(parse_class_label("TABLE"), ClassLabel::kTable);
  EXPECT_FALSE(parse_class_label("figure").has_value());
  EXPECT_FALSE(parse_class_label("").has_value());
}

TEST(ClassMap, GenerateAndIndex) {
  auto m = ClassMap<int>::generate([](ClassLabel c) { return static_cast<int>(index_of(c)) * 10; });
  EXPECT_EQ(m[ClassLabel::kImage], 20);
  m[ClassLabel::kImage] = 7;
  EXPECT_EQ(m[ClassLabel::kImage], 7);
  int sum = 0;
  for (int v : m) sum += v;
  EXPECT_EQ(sum, 0 + 10 + 7 + 30);
}

TEST(BinaryMask, RejectsNonPositiveSize) {
  EXPECT_THROW(BinaryMask(0, 3), MalformedInput);
  EXPECT_THROW(BinaryMask(3, -1), MalformedInput);
}

TEST(BinaryMask, FromBitsChecksLength) {
  const std::vector<std::uint8_t> bits = {1, 0, 0, 1, 1, 0};
  const BinaryMask m = BinaryMask::from_bits(3, 2, bits);
  EXPECT_TRUE(m.get(0, 0));
  EXPECT_TRUE(m.get(0, 1));
  EXPECT_FALSE(m.get(2, 1));
  EXPECT_EQ(m.area(), 3);
  const std::vector<std::uint8_t> short_bits = {1, 0};
  EXPECT_THROW(BinaryMask::from_bits(3, 2, short_bits), MalformedInput);
}

TEST(BinaryMask, FilledKeepsTailBitsZero) {
  const BinaryMask m = BinaryMask::filled(7, 11);  // 77 bits, tail of 51 in word 1
  EXPECT_EQ(m.area(), 77);
  ASSERT_EQ(m.words().size(), 2U);
  EXPECT_EQ(m.words()[1] >> 13, 0U);
}

TEST(Polygon, Validation) {
  EXPECT_THROW(Polygon({{0, 0}, {1, 1}}), MalformedInput);
  EXPECT_THROW(Polygon({{0, 0}, {1, 1}, {std::nan(""), 2}}), MalformedInput);
  EXPECT_THROW(Polygon({{0, 0}, {1, 1}, {std::numeric_limits<double>::infinity(), 2}}),
               MalformedInput);
  EXPECT_NO_THROW(Polygon({{0, 0}, {1, 0}, {0, 1}}));
}

TEST(Polygon, Clamped) {
  const Polygon p({{-5, 2}, {20, -1}, {3, 30}});
  const Polygon c = p.clamped(10, 8);
  EXPECT_EQ(c, Polygon({{0, 2}, {10, 0}, {3, 8}}));
}

TEST(RleMask, Validation) {
  EXPECT_NO_THROW(RleMask(2, 2, {4}));
  EXPECT_NO_THROW(RleMask(2, 2, {0, 4}));
  EXPECT_NO_THROW(RleMask(2, 2, {0, 1, 3}));
  EXPECT_THROW(RleMask(2, 2, {3}), MalformedInput);
  EXPECT_THROW(RleMask(2, 2, {1, 0, 3}), MalformedInput);
  EXPECT_THROW(RleMask(2, 2, {}), MalformedInput);
}

TEST(InstancePrediction, ConfidenceRange) {
  EXPECT_NO_THROW(InstancePrediction(ClassLabel::kTable, 0.0, BinaryMask(2, 2), "g"));
  EXPECT_NO_THROW(InstancePrediction(ClassLabel::kTable, 1.0, BinaryMask(2, 2), "g"));
  EXPECT_THROW(InstancePrediction(ClassLabel::kTable, 1.01, BinaryMask(2, 2), "g"), MalformedInput);
  EXPECT_THROW(InstancePrediction(ClassLabel::kTable, -0.1, BinaryMask(2, 2), "g"), MalformedInput);
  EXPECT_THROW(InstancePrediction(ClassLabel::kTable, std::nan(""), BinaryMask(2, 2), "g"),
               MalformedInput);
}

TEST(InstancePrediction, NativeResolution) {
  const InstancePrediction raster(ClassLabel::kImage, 0.5, RleMask(168, 168, {168 * 168}), "g");
  EXPECT_EQ(raster.native_resolution(), (Size{168, 168}));
  const InstancePrediction poly(ClassLabel::kImage, 0.5, Polygon({{0, 0}, {1, 0}, {0, 1}}), "g");
  EXPECT_FALSE(poly.native_resolution().has_value());
}

TEST(DocumentRecord, ValidatesAndClamps) {
  EXPECT_THROW(DocumentRecord("", 4, 4, {}), MalformedInput);
  EXPECT_THROW(DocumentRecord("a", 0, 4, {}), MalformedInput);
  EXPECT_THROW(DocumentRecord("a", 4, 4, {GroundTruthInstance{ClassLabel::kTable, {}}}), MalformedInput);
  const DocumentRecord d("a", 4, 4,
                         {GroundTruthInstance{ClassLabel::kTable, {Polygon({{-1, -1}, {9, 0}, {0, 9}})}}});
  EXPECT_EQ(d.instances()[0].parts[0], Polygon({{0, 0}, {4, 0}, {0, 4}}));
}

TEST(ModelPredictionSet, MissingDocumentNamesId) {
  ModelPredictionSet set;
  set.per_document["present"] = {};
  EXPECT_NO_THROW(set.at("present"));
  try {
    set.at("absent");
    FAIL();
  } catch (const MissingDocument& e) {
    EXPECT_EQ(e.id(), "absent");
  }
}

TEST(EnsembleConfig, Validate) {
  EnsembleConfig c;
  EXPECT_NO_THROW(c.validate());
  c.threshold_per_class[ClassLabel::kTable] = 1.2;
  EXPECT_THROW(c.validate(), MalformedInput);
  c = EnsembleConfig{};
  c.image_model_threshold = -0.5;
  EXPECT_THROW(c.validate(), MalformedInput);
}

}  // namespace
}  // namespace doclayout
