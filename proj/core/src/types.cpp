#include "doclayout/types.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <numeric>

#include "doclayout/error.hpp"

namespace doclayout {

std::string_view class_name(ClassLabel c) {
  switch (c) {
    case ClassLabel::kParagraph:
      return "paragraph";
    case ClassLabel::kTextBox:
      return "text_box";
    case ClassLabel::kImage:
      return "image";
    case ClassLabel::kTable:
      return "table";
  }
  return "unknown";
}

std::optional<ClassLabel> parse_class_label(std::string_view name) {
  std::string key;
  key.reserve(name.size());
  for (char ch : name) {
    if (ch == '-' || ch == '_' || ch == ' ') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (key == "paragraph") return ClassLabel::kParagraph;
  if (key == "textbox") return ClassLabel::kTextBox;
  if (key == "image") return ClassLabel::kImage;
  if (key == "table") return ClassLabel::kTable;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// BinaryMask

BinaryMask::BinaryMask(int width, int height) : size_{width, height} {
  if (width < 1 || height < 1) {
    throw MalformedInput("mask dimensions must be positive, got " + std::to_string(width) +
                         "x" + std::to_string(height));
  }
  const auto bits = static_cast<std::size_t>(size_.pixels());
  words_.assign((bits + kWordBits - 1) / kWordBits, Word{0});
}

BinaryMask BinaryMask::filled(int width, int height) {
  BinaryMask mask(width, height);
  const auto bits = static_cast<std::size_t>(mask.size_.pixels());
  std::fill(mask.words_.begin(), mask.words_.end(), ~Word{0});
  if (const std::size_t tail = bits % kWordBits; tail != 0) {
    mask.words_.back() = (Word{1} << tail) - 1;
  }
  return mask;
}

BinaryMask BinaryMask::from_bits(int width, int height, std::span<const std::uint8_t> bits) {
  BinaryMask mask(width, height);
  if (static_cast<std::int64_t>(bits.size()) != mask.size_.pixels()) {
    throw MalformedInput("bit buffer length " + std::to_string(bits.size()) +
                         " does not match " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0) mask.words_[i / kWordBits] |= Word{1} << (i % kWordBits);
  }
  return mask;
}

void BinaryMask::fill_span(int y, int x_begin, int x_end) {
  if (x_begin >= x_end) return;
  std::size_t begin = flat_index(x_begin, y);
  const std::size_t end = flat_index(0, y) + static_cast<std::size_t>(x_end);
  while (begin < end) {
    const std::size_t word = begin / kWordBits;
    const std::size_t offset = begin % kWordBits;
    const std::size_t n = std::min<std::size_t>(kWordBits - offset, end - begin);
    const Word bits = n == kWordBits ? ~Word{0} : ((Word{1} << n) - 1) << offset;
    words_[word] |= bits;
    begin += n;
  }
}

std::int64_t BinaryMask::area() const noexcept {
  std::int64_t total = 0;
  for (Word w : words_) total += std::popcount(w);
  return total;
}

// ---------------------------------------------------------------------------
// Polygon

Polygon::Polygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) {
    throw MalformedInput("polygon needs at least 3 vertices, got " +
                         std::to_string(vertices_.size()));
  }
  for (const Point& p : vertices_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw MalformedInput("polygon vertex is not finite");
    }
  }
}

Polygon Polygon::clamped(double width, double height) const {
  std::vector<Point> out;
  out.reserve(vertices_.size());
  for (const Point& p : vertices_) {
    out.push_back({std::clamp(p.x, 0.0, width), std::clamp(p.y, 0.0, height)});
  }
  return Polygon(std::move(out));
}

// ---------------------------------------------------------------------------
// RleMask

RleMask::RleMask(int width, int height, std::vector<Count> counts)
    : size_{width, height}, counts_(std::move(counts)) {
  if (width < 1 || height < 1) {
    throw MalformedInput("RLE dimensions must be positive");
  }
  Count total = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] == 0 && i != 0) {
      throw MalformedInput("RLE contains a zero-length run at position " + std::to_string(i));
    }
    total += counts_[i];
  }
  if (total != static_cast<Count>(size_.pixels())) {
    throw MalformedInput("RLE counts sum to " + std::to_string(total) + ", expected " +
                         std::to_string(size_.pixels()));
  }
}

// ---------------------------------------------------------------------------
// InstancePrediction

InstancePrediction::InstancePrediction(ClassLabel label, double confidence, MaskRepr mask,
                                       std::string source_model)
    : label(label),
      confidence(confidence),
      mask(std::move(mask)),
      source_model(std::move(source_model)) {
  if (!std::isfinite(confidence) || confidence < 0.0 || confidence > 1.0) {
    throw MalformedInput("confidence " + std::to_string(confidence) + " outside [0, 1]");
  }
}

std::optional<Size> InstancePrediction::native_resolution() const {
  if (const auto* rle = std::get_if<RleMask>(&mask)) return rle->size();
  if (const auto* bits = std::get_if<BinaryMask>(&mask)) return bits->size();
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// DocumentRecord

DocumentRecord::DocumentRecord(std::string id, int width, int height,
                               std::vector<GroundTruthInstance> instances)
    : id_(std::move(id)), size_{width, height} {
  if (id_.empty()) throw MalformedInput("document id must not be empty");
  if (width < 1 || height < 1) {
    throw MalformedInput("document '" + id_ + "' has non-positive size");
  }
  instances_.reserve(instances.size());
  for (auto& inst : instances) {
    if (inst.parts.empty()) {
      throw MalformedInput("ground-truth instance in '" + id_ + "' has no polygon");
    }
    GroundTruthInstance clamped{inst.label, {}};
    clamped.parts.reserve(inst.parts.size());
    for (const Polygon& part : inst.parts) {
      clamped.parts.push_back(part.clamped(width, height));
    }
    instances_.push_back(std::move(clamped));
  }
}

const DocumentPredictions& ModelPredictionSet::at(const std::string& document_id) const {
  auto it = per_document.find(document_id);
  if (it == per_document.end()) {
    throw MissingDocument(document_id, "prediction set '" + model_id + "'");
  }
  return it->second;
}

void EnsembleConfig::validate() const {
  auto check = [](double t, std::string_view what) {
    if (!std::isfinite(t) || t < 0.0 || t > 1.0) {
      throw MalformedInput(std::string(what) + " threshold " + std::to_string(t) +
                           " outside [0, 1]");
    }
  };
  for (ClassLabel c : kAllClasses) check(threshold_per_class[c], class_name(c));
  check(image_model_threshold, "image model");
}

}  // namespace doclayout
