#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "doclayout/types.hpp"

namespace doclayout {

// Pixel (x, y) is foreground iff its center (x + 0.5, y + 0.5) is inside the
// polygon under the even-odd rule. Centers exactly on an edge count as inside.
// Polygons whose vertices are all collinear enclose nothing and produce an
// all-background mask.
BinaryMask rasterize_polygon(const Polygon& poly, int width, int height);

// Convex hull in counter-clockwise order (standard orientation: a positive
// cross product is a left turn), collinear points removed. Fewer than three
// non-collinear inputs give a 1- or 2-vertex degenerate hull.
// Throws MalformedInput on empty or non-finite input.
std::vector<Point> convex_hull(std::span<const Point> points);

// Fills the convex hull of the foreground: every pixel whose center lies in
// the hull of the foreground pixel centers, boundary included. The result is
// a superset of the input, a fixed point of hull_fill, and contains every
// pixel center on the segment between two of its foreground centers.
BinaryMask hull_fill(const BinaryMask& mask);

RleMask rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(const RleMask& rle);

enum class CombineMode { kUnion, kIntersection, kDifference };

// Throws DimensionMismatch unless both masks have the same size.
BinaryMask mask_combine(const BinaryMask& a, const BinaryMask& b, CombineMode mode);

// In-place union; same size requirement as mask_combine.
void mask_union_into(BinaryMask& target, const BinaryMask& other);

std::int64_t mask_area(const BinaryMask& mask);

// |a AND b| without materializing the intersection.
std::int64_t overlap_area(const BinaryMask& a, const BinaryMask& b);

// Nearest-neighbor: output (x, y) samples input (floor(x*w/new_w), floor(y*h/new_h)).
BinaryMask resize_mask(const BinaryMask& mask, int new_width, int new_height);

// Converts any mask representation to a bitmap. Polygons are rasterized at
// `polygon_frame`; RLE and bitmaps keep their own resolution.
BinaryMask to_binary_mask(const MaskRepr& repr, Size polygon_frame);

}  // namespace doclayout
