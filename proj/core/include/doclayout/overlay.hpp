#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "doclayout/ensemble.hpp"
#include "doclayout/types.hpp"

namespace doclayout {

struct RgbImage {
  int width = 0;
  int height = 0;
  // Row-major, 3 bytes per pixel.
  std::vector<std::uint8_t> pixels;

  static RgbImage blank(int width, int height);  // white

  std::array<std::uint8_t, 3> at(int x, int y) const;
  bool operator==(const RgbImage&) const = default;
};

// Fixed per-class overlay colours.
std::array<std::uint8_t, 3> class_color(ClassLabel c);

// Blends the four class masks over `background` (white when absent or of a
// different size) and draws a legend in the top-left corner.
RgbImage render_overlay(const FusedDocumentResult& result,
                        const std::optional<RgbImage>& background = std::nullopt);

// Throws Error when the file cannot be read or decoded.
RgbImage read_png(const std::filesystem::path& path);
void write_png(const RgbImage& image, const std::filesystem::path& path);

// Renders `result` over the document image at `source_image` (if any) and
// writes a PNG. An unreadable or mismatched source falls back to a blank
// canvas; the returned strings describe any such fallback.
std::vector<std::string> render_overlay_file(const DocumentRecord& doc,
                                             const FusedDocumentResult& result,
                                             const std::optional<std::filesystem::path>& source_image,
                                             const std::filesystem::path& output);

}  // namespace doclayout
