#include "doclayout/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "doclayout/error.hpp"

namespace doclayout {

namespace {

void require_same_size(const BinaryMask& a, const BinaryMask& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("mask sizes differ: " + std::to_string(a.width()) + "x" +
                            std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                            "x" + std::to_string(b.height()));
  }
}

// Orientation of c relative to the directed line a->b, positive for a left turn.
template <typename T>
T cross(const T& ax, const T& ay, const T& bx, const T& by, const T& cx, const T& cy) {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

template <typename P>
std::vector<P> monotone_chain(std::vector<P> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const P& a, const P& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const P& a, const P& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() < 3) return pts;

  std::vector<P> hull(2 * pts.size());
  std::size_t k = 0;
  auto turn = [&](const P& o, const P& a, const P& b) {
    return cross(o.x, o.y, a.x, a.y, b.x, b.y);
  };
  for (const P& p : pts) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower && turn(hull[k - 2], hull[k - 1], *it) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

bool all_collinear(std::span<const Point> v) {
  // Find a second vertex distinct from the first, then test the rest against that line.
  std::size_t k = 1;
  while (k < v.size() && v[k] == v[0]) ++k;
  for (std::size_t i = k + 1; i < v.size(); ++i) {
    if (cross(v[0].x, v[0].y, v[k].x, v[k].y, v[i].x, v[i].y) != 0.0) return false;
  }
  return true;
}

struct IntPoint {
  std::int64_t x;
  std::int64_t y;
};

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

// Leftmost and rightmost foreground x in row y, or {-1, -1} for an empty row.
std::pair<int, int> row_extent(const BinaryMask& mask, int y) {
  using Word = BinaryMask::Word;
  const auto words = mask.words();
  const std::size_t begin = static_cast<std::size_t>(y) * static_cast<std::size_t>(mask.width());
  const std::size_t end = begin + static_cast<std::size_t>(mask.width());
  int left = -1;
  int right = -1;
  std::size_t i = begin;
  while (i < end) {
    const std::size_t w = i / BinaryMask::kWordBits;
    const std::size_t off = i % BinaryMask::kWordBits;
    const std::size_t n = std::min<std::size_t>(BinaryMask::kWordBits - off, end - i);
    Word bits = words[w] >> off;
    if (n < BinaryMask::kWordBits) bits &= (Word{1} << n) - 1;
    if (bits != 0) {
      const auto lo = static_cast<int>(i - begin) + std::countr_zero(bits);
      const auto hi = static_cast<int>(i - begin) + (BinaryMask::kWordBits - 1 - std::countl_zero(bits));
      if (left < 0) left = lo;
      right = hi;
    }
    i += n;
  }
  return {left, right};
}

// Pixels whose centers lie in the convex hull of the foreground centers,
// boundary included. Pixel centers are the integer lattice in index
// coordinates, so every test is exact integer arithmetic.
BinaryMask fill_center_hull(const BinaryMask& mask) {
  std::vector<IntPoint> extremes;
  for (int y = 0; y < mask.height(); ++y) {
    const auto [left, right] = row_extent(mask, y);
    if (left < 0) continue;
    extremes.push_back({left, y});
    if (right != left) extremes.push_back({right, y});
  }
  BinaryMask out = mask;
  if (extremes.empty()) return out;

  const std::vector<IntPoint> hull = monotone_chain(std::move(extremes));
  std::int64_t x_min = hull.front().x, x_max = hull.front().x;
  std::int64_t y_min = hull.front().y, y_max = hull.front().y;
  for (const IntPoint& p : hull) {
    x_min = std::min(x_min, p.x);
    x_max = std::max(x_max, p.x);
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  }

  for (std::int64_t y = y_min; y <= y_max; ++y) {
    // The bounding range also pins down point and segment hulls.
    std::int64_t lo = x_min;
    std::int64_t hi = x_max;
    bool empty_row = false;
    for (std::size_t i = 0; i < hull.size() && !empty_row; ++i) {
      const IntPoint& a = hull[i];
      const IntPoint& b = hull[(i + 1) % hull.size()];
      const std::int64_t dx = b.x - a.x;
      const std::int64_t dy = b.y - a.y;
      // Left of (or on) a->b:  dy * X <= dx * (y - a.y) + dy * a.x
      const std::int64_t rhs = dx * (y - a.y) + dy * a.x;
      if (dy > 0) {
        hi = std::min(hi, floor_div(rhs, dy));
      } else if (dy < 0) {
        lo = std::max(lo, ceil_div(rhs, dy));
      } else if (dx * (y - a.y) < 0) {
        empty_row = true;
      }
    }
    if (!empty_row && lo <= hi) {
      out.fill_span(static_cast<int>(y), static_cast<int>(lo), static_cast<int>(hi) + 1);
    }
  }
  return out;
}

}  // namespace

BinaryMask rasterize_polygon(const Polygon& poly, int width, int height) {
  BinaryMask out(width, height);
  const auto v = poly.vertices();
  const std::size_t n = v.size();
  if (all_collinear(v)) return out;
  std::vector<int> crossings;
  crossings.reserve(n);

  for (int y = 0; y < height; ++y) {
    const double yc = y + 0.5;
    crossings.clear();

    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = v[i];
      const Point& b = v[(i + 1) % n];
      const double y_lo = std::min(a.y, b.y);
      const double y_hi = std::max(a.y, b.y);
      if (yc < y_lo || yc > y_hi) continue;

      if (a.y == b.y) {
        // Horizontal edge on this scanline: every center on it is boundary.
        const double x_lo = std::min(a.x, b.x);
        const double x_hi = std::max(a.x, b.x);
        const double first = std::clamp(std::ceil(x_lo - 0.5), 0.0, static_cast<double>(width));
        const double last = std::clamp(std::floor(x_hi - 0.5), -1.0, width - 1.0);
        if (first <= last) out.fill_span(y, static_cast<int>(first), static_cast<int>(last) + 1);
        continue;
      }

      const Point& lo = a.y < b.y ? a : b;
      const Point& hi = a.y < b.y ? b : a;
      auto orient = [&](int px) {
        return cross(lo.x, lo.y, hi.x, hi.y, px + 0.5, yc);
      };
      // First pixel whose center is at or right of the edge (orient <= 0).
      const double x_cross = lo.x + (yc - lo.y) * (hi.x - lo.x) / (hi.y - lo.y);
      int c = static_cast<int>(std::clamp(std::ceil(x_cross - 0.5), 0.0, static_cast<double>(width)));
      while (c > 0 && orient(c - 1) <= 0) --c;
      while (c < width && orient(c) > 0) ++c;

      if (c < width && orient(c) == 0) out.set(c, y);
      // Half-open in y so shared vertices are counted once.
      if (yc < y_hi) crossings.push_back(c);
    }

    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      out.fill_span(y, crossings[k], crossings[k + 1]);
    }
  }
  return out;
}

std::vector<Point> convex_hull(std::span<const Point> points) {
  if (points.empty()) throw MalformedInput("convex hull of an empty point set");
  for (const Point& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw MalformedInput("convex hull input contains a non-finite point");
    }
  }
  return monotone_chain(std::vector<Point>(points.begin(), points.end()));
}

BinaryMask hull_fill(const BinaryMask& mask) { return fill_center_hull(mask); }

RleMask rle_encode(const BinaryMask& mask) {
  std::vector<RleMask::Count> counts;
  bool value = false;
  RleMask::Count run = 0;
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = 0; y < mask.height(); ++y) {
      const bool bit = mask.get(x, y);
      if (bit != value) {
        counts.push_back(run);
        run = 0;
        value = bit;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return RleMask(mask.width(), mask.height(), std::move(counts));
}

BinaryMask rle_decode(const RleMask& rle) {
  BinaryMask out(rle.width(), rle.height());
  const auto h = static_cast<std::uint64_t>(rle.height());
  std::uint64_t pos = 0;
  bool value = false;
  for (RleMask::Count run : rle.counts()) {
    if (value) {
      for (std::uint64_t p = pos; p < pos + run; ++p) {
        out.set(static_cast<int>(p / h), static_cast<int>(p % h));
      }
    }
    pos += run;
    value = !value;
  }
  return out;
}

BinaryMask mask_combine(const BinaryMask& a, const BinaryMask& b, CombineMode mode) {
  require_same_size(a, b);
  BinaryMask out = a;
  auto dst = out.words();
  const auto src = b.words();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    switch (mode) {
      case CombineMode::kUnion:
        dst[i] |= src[i];
        break;
      case CombineMode::kIntersection:
        dst[i] &= src[i];
        break;
      case CombineMode::kDifference:
        dst[i] &= ~src[i];
        break;
    }
  }
  return out;
}

void mask_union_into(BinaryMask& target, const BinaryMask& other) {
  require_same_size(target, other);
  auto dst = target.words();
  const auto src = other.words();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
}

std::int64_t mask_area(const BinaryMask& mask) { return mask.area(); }

std::int64_t overlap_area(const BinaryMask& a, const BinaryMask& b) {
  require_same_size(a, b);
  const auto wa = a.words();
  const auto wb = b.words();
  std::int64_t total = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) total += std::popcount(wa[i] & wb[i]);
  return total;
}

BinaryMask resize_mask(const BinaryMask& mask, int new_width, int new_height) {
  BinaryMask out(new_width, new_height);
  if (mask.size() == out.size()) return mask;
  std::vector<int> src_x(static_cast<std::size_t>(new_width));
  for (int x = 0; x < new_width; ++x) {
    src_x[static_cast<std::size_t>(x)] = static_cast<int>(
        static_cast<std::int64_t>(x) * mask.width() / new_width);
  }
  for (int y = 0; y < new_height; ++y) {
    const int sy = static_cast<int>(static_cast<std::int64_t>(y) * mask.height() / new_height);
    for (int x = 0; x < new_width; ++x) {
      if (mask.get(src_x[static_cast<std::size_t>(x)], sy)) out.set(x, y);
    }
  }
  return out;
}

BinaryMask to_binary_mask(const MaskRepr& repr, Size polygon_frame) {
  if (const auto* poly = std::get_if<Polygon>(&repr)) {
    return rasterize_polygon(*poly, polygon_frame.width, polygon_frame.height);
  }
  if (const auto* rle = std::get_if<RleMask>(&repr)) return rle_decode(*rle);
  return std::get<BinaryMask>(repr);
}

}  // namespace doclayout
