#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "doclayout/types.hpp"

namespace doclayout {

// Predictions precomputed at one inference image size.
struct SizePredictions {
  ModelPredictionSet general;
  std::optional<ModelPredictionSet> image_model;
};

// Evaluation reports for every (image size, confidence threshold) pair.
class SweepGrid {
 public:
  SweepGrid(std::string model_id, std::vector<int> image_sizes, std::vector<double> thresholds,
            std::vector<EvaluationReport> cells);

  const std::string& model_id() const noexcept { return model_id_; }
  std::span<const int> image_sizes() const noexcept { return image_sizes_; }
  std::span<const double> thresholds() const noexcept { return thresholds_; }

  const EvaluationReport& cell(std::size_t size_index, std::size_t threshold_index) const;

  bool operator==(const SweepGrid&) const = default;

 private:
  std::string model_id_;
  std::vector<int> image_sizes_;
  std::vector<double> thresholds_;
  // Row-major: size index, then threshold index.
  std::vector<EvaluationReport> cells_;
};

// Default starting grid: 4 sizes x 5 thresholds.
inline const std::vector<int> kDefaultSweepSizes = {480, 640, 672, 800};
inline const std::vector<double> kDefaultSweepThresholds = {0.15, 0.25, 0.35, 0.45, 0.55};

// For every (size, t) runs the pipeline with all four class thresholds set to
// t and evaluates it. Throws MalformedInput when a listed size has no
// predictions or a threshold is outside [0, 1].
SweepGrid run_sweep(std::span<const DocumentRecord> docs,
                    const std::map<int, SizePredictions>& predictions_by_size,
                    std::span<const int> image_sizes, std::span<const double> thresholds,
                    const EnsembleConfig& base_config);

struct SelectedCell {
  int image_size = 0;
  double threshold = 0.0;
  double dice = 0.0;

  bool operator==(const SelectedCell&) const = default;
};

struct OptimalSelection {
  ClassMap<SelectedCell> per_class{};
};

// Per class, the cell with the highest macro dice; ties go to the lower
// threshold, then the smaller image size.
OptimalSelection select_optimal(const SweepGrid& grid);

struct GridRow {
  int image_size = 0;
  double threshold = 0.0;
  ClassLabel label = ClassLabel::kParagraph;
  double dice = 0.0;
  double micro_dice = 0.0;
  std::optional<double> ap50;
  double map50 = 0.0;
  ClassCounts counts;

  bool operator==(const GridRow&) const = default;
};

// One row per (size, threshold, class), sorted in that order.
std::vector<GridRow> grid_report(const SweepGrid& grid);

// Comma-separated with a header line. Numbers use shortest round-trip form.
void write_grid_report(std::span<const GridRow> rows, std::ostream& out);

void write_optimal_selection(const OptimalSelection& selection, std::ostream& out);

}  // namespace doclayout
