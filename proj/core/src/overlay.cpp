#include "doclayout/overlay.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>
#include <string_view>

#include "doclayout/error.hpp"

namespace doclayout {

namespace {

constexpr int kAlpha = 115;  // out of 256

// 3x5 glyphs, one row per byte (bits 2..0 = left..right).
struct Glyph {
  char ch;
  std::array<std::uint8_t, 5> rows;
};

constexpr std::array<Glyph, 13> kGlyphs = {{
    {'A', {0b010, 0b101, 0b111, 0b101, 0b101}},
    {'B', {0b110, 0b101, 0b110, 0b101, 0b110}},
    {'E', {0b111, 0b100, 0b110, 0b100, 0b111}},
    {'G', {0b011, 0b100, 0b101, 0b101, 0b011}},
    {'H', {0b101, 0b101, 0b111, 0b101, 0b101}},
    {'I', {0b111, 0b010, 0b010, 0b010, 0b111}},
    {'L', {0b100, 0b100, 0b100, 0b100, 0b111}},
    {'M', {0b101, 0b111, 0b111, 0b101, 0b101}},
    {'O', {0b010, 0b101, 0b101, 0b101, 0b010}},
    {'P', {0b111, 0b101, 0b111, 0b100, 0b100}},
    {'R', {0b110, 0b101, 0b110, 0b101, 0b101}},
    {'T', {0b111, 0b010, 0b010, 0b010, 0b010}},
    {'X', {0b101, 0b101, 0b010, 0b101, 0b101}},
}};

constexpr std::array<std::string_view, kNumClasses> kLegendText = {"PARAGRAPH", "TEXT BOX",
                                                                   "IMAGE", "TABLE"};

void put(RgbImage& img, int x, int y, std::array<std::uint8_t, 3> rgb) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  const std::size_t i = (static_cast<std::size_t>(y) * img.width + x) * 3;
  std::copy(rgb.begin(), rgb.end(), img.pixels.begin() + static_cast<std::ptrdiff_t>(i));
}

void draw_text(RgbImage& img, int x, int y, std::string_view text) {
  for (char ch : text) {
    auto glyph = std::find_if(kGlyphs.begin(), kGlyphs.end(),
                              [ch](const Glyph& g) { return g.ch == ch; });
    if (glyph != kGlyphs.end()) {
      for (int row = 0; row < 5; ++row) {
        for (int col = 0; col < 3; ++col) {
          if (glyph->rows[static_cast<std::size_t>(row)] & (0b100 >> col)) {
            put(img, x + col, y + row, {0, 0, 0});
          }
        }
      }
    }
    x += 4;
  }
}

void draw_legend(RgbImage& img) {
  constexpr int kPad = 2;
  constexpr int kRow = 9;
  constexpr int kWidth = kPad * 2 + 7 + 2 + 9 * 4;
  constexpr int kHeight = kPad * 2 + kRow * static_cast<int>(kNumClasses) - 2;
  for (int y = 0; y < kHeight; ++y) {
    for (int x = 0; x < kWidth; ++x) put(img, x, y, {255, 255, 255});
  }
  for (ClassLabel c : kAllClasses) {
    const int top = kPad + kRow * static_cast<int>(index_of(c));
    for (int y = 0; y < 7; ++y) {
      for (int x = 0; x < 7; ++x) put(img, kPad + x, top + y, class_color(c));
    }
    draw_text(img, kPad + 9, top + 1, kLegendText[index_of(c)]);
  }
}

}  // namespace

RgbImage RgbImage::blank(int width, int height) {
  return RgbImage{width, height,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * 3, 255)};
}

std::array<std::uint8_t, 3> RgbImage::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

std::array<std::uint8_t, 3> class_color(ClassLabel c) {
  switch (c) {
    case ClassLabel::kParagraph:
      return {31, 119, 180};
    case ClassLabel::kTextBox:
      return {44, 160, 44};
    case ClassLabel::kImage:
      return {255, 127, 14};
    case ClassLabel::kTable:
      return {214, 39, 40};
  }
  return {0, 0, 0};
}

RgbImage render_overlay(const FusedDocumentResult& result,
                        const std::optional<RgbImage>& background) {
  RgbImage img = background && background->width == result.size.width &&
                         background->height == result.size.height
                     ? *background
                     : RgbImage::blank(result.size.width, result.size.height);
  for (ClassLabel c : kAllClasses) {
    const BinaryMask& mask = result.per_class_mask[c];
    const auto color = class_color(c);
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        if (!mask.get(x, y)) continue;
        const std::size_t i = (static_cast<std::size_t>(y) * img.width + x) * 3;
        for (std::size_t k = 0; k < 3; ++k) {
          img.pixels[i + k] = static_cast<std::uint8_t>(
              (img.pixels[i + k] * (256 - kAlpha) + color[k] * kAlpha) >> 8);
        }
      }
    }
  }
  draw_legend(img);
  return img;
}

RgbImage read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error("cannot read PNG '" + path.string() + "': " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out{static_cast<int>(image.width), static_cast<int>(image.height), {}};
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    throw Error("cannot decode PNG '" + path.string() + "': " + message);
  }
  return out;
}

void write_png(const RgbImage& img, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels.data(), 0, nullptr)) {
    throw Error("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

std::vector<std::string> render_overlay_file(const DocumentRecord& doc,
                                             const FusedDocumentResult& result,
                                             const std::optional<std::filesystem::path>& source_image,
                                             const std::filesystem::path& output) {
  if (result.document_id != doc.id() || result.size != doc.size()) {
    throw MalformedInput("overlay: result does not belong to document '" + doc.id() + "'");
  }
  std::vector<std::string> warnings;
  std::optional<RgbImage> background;
  if (source_image) {
    try {
      background = read_png(*source_image);
      if (background->width != doc.width() || background->height != doc.height()) {
        warnings.push_back("source image '" + source_image->string() +
                           "' does not match the document size; using a blank canvas");
        background.reset();
      }
    } catch (const Error& e) {
      warnings.push_back(std::string(e.what()) + "; using a blank canvas");
    }
  }
  write_png(render_overlay(result, background), output);
  return warnings;
}

}  // namespace doclayout
