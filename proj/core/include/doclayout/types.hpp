#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace doclayout {

enum class ClassLabel : std::uint8_t { kParagraph = 0, kTextBox, kImage, kTable };

inline constexpr std::size_t kNumClasses = 4;
inline constexpr std::array<ClassLabel, kNumClasses> kAllClasses = {
    ClassLabel::kParagraph, ClassLabel::kTextBox, ClassLabel::kImage,
    ClassLabel::kTable};

constexpr std::size_t index_of(ClassLabel c) { return static_cast<std::size_t>(c); }

// Canonical lowercase name: "paragraph", "text_box", "image", "table".
std::string_view class_name(ClassLabel c);

// Accepts canonical names and the common aliases ("text-box", "textbox",
// "TextBox", ...). Matching ignores case, '-', '_' and spaces.
std::optional<ClassLabel> parse_class_label(std::string_view name);

// Fixed-size map keyed by ClassLabel. Every class always has an entry.
template <typename T>
class ClassMap {
 public:
  ClassMap() = default;
  explicit ClassMap(std::array<T, kNumClasses> values) : values_(std::move(values)) {}

  template <typename Fn>
  static ClassMap generate(Fn&& fn) {
    return ClassMap(std::array<T, kNumClasses>{fn(ClassLabel::kParagraph),
                                               fn(ClassLabel::kTextBox),
                                               fn(ClassLabel::kImage),
                                               fn(ClassLabel::kTable)});
  }

  T& operator[](ClassLabel c) { return values_[index_of(c)]; }
  const T& operator[](ClassLabel c) const { return values_[index_of(c)]; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  bool operator==(const ClassMap&) const = default;

 private:
  std::array<T, kNumClasses> values_{};
};

using ClassSet = ClassMap<bool>;

struct Size {
  int width = 0;
  int height = 0;

  std::int64_t pixels() const {
    return static_cast<std::int64_t>(width) * static_cast<std::int64_t>(height);
  }
  bool operator==(const Size&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

// Row-major binary bitmap, bit-packed into 64-bit words. Bit i of the flat
// index (y * width + x) lives in word i / 64. Bits past width*height are
// always zero so whole-word algebra and popcounts need no masking.
class BinaryMask {
 public:
  using Word = std::uint64_t;
  static constexpr int kWordBits = 64;

  // All-background mask. Throws MalformedInput unless width, height >= 1.
  BinaryMask(int width, int height);

  static BinaryMask filled(int width, int height);
  // Builds from a row-major 0/1 buffer of exactly width*height entries.
  static BinaryMask from_bits(int width, int height, std::span<const std::uint8_t> bits);

  int width() const noexcept { return size_.width; }
  int height() const noexcept { return size_.height; }
  Size size() const noexcept { return size_; }

  bool get(int x, int y) const {
    const std::size_t i = flat_index(x, y);
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
  }
  void set(int x, int y, bool value = true) {
    const std::size_t i = flat_index(x, y);
    const Word bit = Word{1} << (i % kWordBits);
    if (value) {
      words_[i / kWordBits] |= bit;
    } else {
      words_[i / kWordBits] &= ~bit;
    }
  }
  // Sets pixels [x_begin, x_end) of row y.
  void fill_span(int y, int x_begin, int x_end);

  std::int64_t area() const noexcept;
  bool empty() const noexcept { return area() == 0; }

  std::span<const Word> words() const noexcept { return words_; }
  std::span<Word> words() noexcept { return words_; }

  bool operator==(const BinaryMask&) const = default;

 private:
  std::size_t flat_index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(size_.width) +
           static_cast<std::size_t>(x);
  }

  Size size_;
  std::vector<Word> words_;
};

// Simple polygon with at least 3 finite vertices.
class Polygon {
 public:
  explicit Polygon(std::vector<Point> vertices);

  std::span<const Point> vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }

  // Copy with every vertex clamped into [0, width] x [0, height].
  Polygon clamped(double width, double height) const;

  bool operator==(const Polygon&) const = default;

 private:
  std::vector<Point> vertices_;
};

// Column-major run lengths, first run is background (possibly 0).
class RleMask {
 public:
  using Count = std::uint64_t;

  // Throws MalformedInput if the counts do not sum to width*height or
  // contain a zero run anywhere but the leading position.
  RleMask(int width, int height, std::vector<Count> counts);

  int width() const noexcept { return size_.width; }
  int height() const noexcept { return size_.height; }
  Size size() const noexcept { return size_; }
  std::span<const Count> counts() const noexcept { return counts_; }

  bool operator==(const RleMask&) const = default;

 private:
  Size size_;
  std::vector<Count> counts_;
};

using MaskRepr = std::variant<Polygon, RleMask, BinaryMask>;

struct InstancePrediction {
  ClassLabel label = ClassLabel::kParagraph;
  double confidence = 0.0;
  MaskRepr mask;
  std::string source_model;

  // Throws MalformedInput when confidence is outside [0, 1] or not finite.
  InstancePrediction(ClassLabel label, double confidence, MaskRepr mask,
                     std::string source_model);

  // Resolution the mask was produced at. Polygons live in document
  // coordinates and have no native raster resolution.
  std::optional<Size> native_resolution() const;

  bool operator==(const InstancePrediction&) const = default;
};

struct GroundTruthInstance {
  ClassLabel label = ClassLabel::kParagraph;
  // One or more polygon parts; the instance is their union.
  std::vector<Polygon> parts;

  bool operator==(const GroundTruthInstance&) const = default;
};

class DocumentRecord {
 public:
  // Clamps every polygon into the document bounds. Throws MalformedInput on
  // an empty id, non-positive size, or an instance without parts.
  DocumentRecord(std::string id, int width, int height,
                 std::vector<GroundTruthInstance> instances);

  const std::string& id() const noexcept { return id_; }
  int width() const noexcept { return size_.width; }
  int height() const noexcept { return size_.height; }
  Size size() const noexcept { return size_; }
  std::span<const GroundTruthInstance> instances() const noexcept { return instances_; }

  bool operator==(const DocumentRecord&) const = default;

 private:
  std::string id_;
  Size size_;
  std::vector<GroundTruthInstance> instances_;
};

struct DocumentPredictions {
  std::vector<InstancePrediction> predictions;
  // False when the model fell back to low-resolution masks for this document.
  bool high_resolution = true;

  bool operator==(const DocumentPredictions&) const = default;
};

struct ModelPredictionSet {
  std::string model_id;
  int inference_image_size = 640;
  std::map<std::string, DocumentPredictions> per_document;

  // Throws MissingDocument when `document_id` has no entry.
  const DocumentPredictions& at(const std::string& document_id) const;

  bool operator==(const ModelPredictionSet&) const = default;
};

struct EnsembleConfig {
  ClassMap<double> threshold_per_class{{0.25, 0.25, 0.35, 0.35}};
  ClassSet hull_fill_classes{{false, false, false, true}};
  bool image_override_enabled = true;
  double image_model_threshold = 0.35;
  bool override_fallback_to_general = true;

  // Thresholds used for the published inference run: paragraph and text box
  // at 0.25, image and table at 0.35, image model at 0.35, tables hull-filled.
  static EnsembleConfig paper_defaults() { return EnsembleConfig{}; }

  // Throws MalformedInput if any threshold is outside [0, 1].
  void validate() const;

  bool operator==(const EnsembleConfig&) const = default;
};

struct ClassCounts {
  std::int64_t instances_predicted = 0;
  std::int64_t correct_predictions = 0;
  std::int64_t predicted_area = 0;
  std::int64_t intersection_area = 0;

  bool operator==(const ClassCounts&) const = default;
};

struct EvaluationReport {
  // Macro average over documents.
  ClassMap<double> per_class_dice{};
  // Pixel-pooled dice over the whole dataset.
  ClassMap<double> per_class_micro_dice{};
  double mean_dice = 0.0;
  // Empty for classes absent from both predictions and ground truth.
  ClassMap<std::optional<double>> per_class_ap50{};
  double map50 = 0.0;
  ClassMap<ClassCounts> per_class_counts{};
  std::size_t document_count = 0;

  bool operator==(const EvaluationReport&) const = default;
};

}  // namespace doclayout
