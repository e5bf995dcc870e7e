#pragma once

// Synthetic datasets shared by the unit and acceptance suites.

#include <map>
#include <string>
#include <vector>

#include "doclayout/sweep.hpp"
#include "doclayout/types.hpp"
#include "support/oracles.hpp"

namespace doclayout::testing {

inline Polygon rect_polygon(double x0, double y0, double x1, double y1) {
  return Polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

// Planted-optimum sweep corpus. Each class owns one 32x32 quadrant of a
// 64x64 page holding a 12x12 ground-truth square. At the planted size the
// class is predicted exactly with confidence equal to the planted threshold,
// plus a disjoint false positive just below it; every other size predicts a
// shifted square. Dice is therefore 1.0 only at the planted cell.
struct PlantedSweep {
  std::vector<DocumentRecord> docs;
  std::map<int, SizePredictions> predictions;
  ClassMap<SelectedCell> planted{};
};

inline PlantedSweep planted_sweep(const ClassMap<std::pair<int, double>>& optimum,
                                  std::span<const int> sizes, int num_docs = 3) {
  constexpr int kPage = 64;
  const auto origin = [](ClassLabel c) {
    const int i = static_cast<int>(index_of(c));
    return std::pair{(i % 2) * 32, (i / 2) * 32};
  };

  PlantedSweep out;
  for (int d = 0; d < num_docs; ++d) {
    std::vector<GroundTruthInstance> gt;
    for (ClassLabel c : kAllClasses) {
      const auto [ox, oy] = origin(c);
      gt.push_back({c, {rect_polygon(ox + 2, oy + 2, ox + 14, oy + 14)}});
    }
    out.docs.emplace_back("page" + std::to_string(d), kPage, kPage, std::move(gt));
  }

  for (int size : sizes) {
    SizePredictions sp;
    sp.general.model_id = "planted";
    sp.general.inference_image_size = size;
    for (const DocumentRecord& doc : out.docs) {
      auto& preds = sp.general.per_document[doc.id()].predictions;
      for (ClassLabel c : kAllClasses) {
        const auto [ox, oy] = origin(c);
        const auto [best_size, best_t] = optimum[c];
        if (size == best_size) {
          preds.emplace_back(c, best_t, rect_mask(kPage, kPage, ox + 2, oy + 2, ox + 14, oy + 14),
                             "planted");
          preds.emplace_back(c, best_t - 0.05,
                             rect_mask(kPage, kPage, ox + 18, oy + 18, ox + 30, oy + 30), "planted");
        } else {
          preds.emplace_back(c, 1.0, rect_mask(kPage, kPage, ox + 2, oy + 5, ox + 14, oy + 17),
                             "planted");
        }
      }
    }
    out.predictions.emplace(size, std::move(sp));
  }
  for (ClassLabel c : kAllClasses) out.planted[c] = {optimum[c].first, optimum[c].second, 1.0};
  return out;
}

// Independent argmax over the grid with the documented tie rule.
inline ClassMap<SelectedCell> scan_optimal(const SweepGrid& grid) {
  ClassMap<SelectedCell> best{};
  for (ClassLabel c : kAllClasses) {
    bool have = false;
    for (std::size_t t = 0; t < grid.thresholds().size(); ++t) {
      for (std::size_t s = 0; s < grid.image_sizes().size(); ++s) {
        const double v = grid.cell(s, t).per_class_dice[c];
        const SelectedCell cand{grid.image_sizes()[s], grid.thresholds()[t], v};
        if (!have || v > best[c].dice ||
            (v == best[c].dice && (cand.threshold < best[c].threshold ||
                                   (cand.threshold == best[c].threshold &&
                                    cand.image_size < best[c].image_size)))) {
          best[c] = cand;
          have = true;
        }
      }
    }
  }
  return best;
}

}  // namespace doclayout::testing
