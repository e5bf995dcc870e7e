#include "doclayout/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <tuple>

#include "doclayout/ensemble.hpp"
#include "doclayout/error.hpp"
#include "doclayout/evaluation.hpp"

namespace doclayout {

namespace {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

}  // namespace

SweepGrid::SweepGrid(std::string model_id, std::vector<int> image_sizes,
                     std::vector<double> thresholds, std::vector<EvaluationReport> cells)
    : model_id_(std::move(model_id)),
      image_sizes_(std::move(image_sizes)),
      thresholds_(std::move(thresholds)),
      cells_(std::move(cells)) {
  if (image_sizes_.empty() || thresholds_.empty()) {
    throw MalformedInput("sweep grid needs at least one size and one threshold");
  }
  if (cells_.size() != image_sizes_.size() * thresholds_.size()) {
    throw MalformedInput("sweep grid has " + std::to_string(cells_.size()) + " cells, expected " +
                         std::to_string(image_sizes_.size() * thresholds_.size()));
  }
}

const EvaluationReport& SweepGrid::cell(std::size_t size_index,
                                        std::size_t threshold_index) const {
  if (size_index >= image_sizes_.size() || threshold_index >= thresholds_.size()) {
    throw std::out_of_range("sweep grid cell index out of range");
  }
  return cells_[size_index * thresholds_.size() + threshold_index];
}

SweepGrid run_sweep(std::span<const DocumentRecord> docs,
                    const std::map<int, SizePredictions>& predictions_by_size,
                    std::span<const int> image_sizes, std::span<const double> thresholds,
                    const EnsembleConfig& base_config) {
  if (thresholds.empty()) throw MalformedInput("sweep needs at least one threshold");
  for (double t : thresholds) {
    if (!std::isfinite(t) || t < 0.0 || t > 1.0) {
      throw MalformedInput("sweep threshold " + std::to_string(t) + " outside [0, 1]");
    }
  }
  std::string model_id;
  for (int size : image_sizes) {
    auto it = predictions_by_size.find(size);
    if (it == predictions_by_size.end()) {
      throw MalformedInput("no predictions supplied for image size " + std::to_string(size));
    }
    if (model_id.empty()) model_id = it->second.general.model_id;
  }

  std::vector<EvaluationReport> cells;
  cells.reserve(image_sizes.size() * thresholds.size());
  for (int size : image_sizes) {
    const SizePredictions& preds = predictions_by_size.at(size);
    const ModelPredictionSet* image_model = preds.image_model ? &*preds.image_model : nullptr;
    for (double t : thresholds) {
      EnsembleConfig config = base_config;
      for (ClassLabel c : kAllClasses) config.threshold_per_class[c] = t;
      if (image_model == nullptr) config.image_override_enabled = false;
      const auto fused = run_pipeline_batch(docs, preds.general, image_model, config);
      cells.push_back(evaluate_dataset(fused, docs));
    }
  }
  return SweepGrid(std::move(model_id), {image_sizes.begin(), image_sizes.end()},
                   {thresholds.begin(), thresholds.end()}, std::move(cells));
}

OptimalSelection select_optimal(const SweepGrid& grid) {
  OptimalSelection selection;
  const auto sizes = grid.image_sizes();
  const auto thresholds = grid.thresholds();
  for (ClassLabel c : kAllClasses) {
    std::optional<SelectedCell> best;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      for (std::size_t t = 0; t < thresholds.size(); ++t) {
        const SelectedCell candidate{sizes[s], thresholds[t], grid.cell(s, t).per_class_dice[c]};
        if (!best) {
          best = candidate;
          continue;
        }
        // Higher dice first, then lower threshold, then smaller size.
        const auto key = [](const SelectedCell& cell) {
          return std::make_tuple(-cell.dice, cell.threshold, cell.image_size);
        };
        if (key(candidate) < key(*best)) best = candidate;
      }
    }
    selection.per_class[c] = *best;
  }
  return selection;
}

std::vector<GridRow> grid_report(const SweepGrid& grid) {
  std::vector<GridRow> rows;
  const auto sizes = grid.image_sizes();
  const auto thresholds = grid.thresholds();
  rows.reserve(sizes.size() * thresholds.size() * kNumClasses);
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      const EvaluationReport& report = grid.cell(s, t);
      for (ClassLabel c : kAllClasses) {
        rows.push_back({sizes[s], thresholds[t], c, report.per_class_dice[c],
                        report.per_class_micro_dice[c], report.per_class_ap50[c], report.map50,
                        report.per_class_counts[c]});
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) {
    return std::make_tuple(a.image_size, a.threshold, index_of(a.label)) <
           std::make_tuple(b.image_size, b.threshold, index_of(b.label));
  });
  return rows;
}

void write_grid_report(std::span<const GridRow> rows, std::ostream& out) {
  out << "image_size,threshold,class,dice,micro_dice,ap50,map50,instances_predicted,"
         "correct_predictions,predicted_area,intersection_area\n";
  for (const GridRow& row : rows) {
    out << row.image_size << ',' << format_double(row.threshold) << ',' << class_name(row.label)
        << ',' << format_double(row.dice) << ',' << format_double(row.micro_dice) << ','
        << (row.ap50 ? format_double(*row.ap50) : std::string()) << ','
        << format_double(row.map50) << ',' << row.counts.instances_predicted << ','
        << row.counts.correct_predictions << ',' << row.counts.predicted_area << ','
        << row.counts.intersection_area << '\n';
  }
}

void write_optimal_selection(const OptimalSelection& selection, std::ostream& out) {
  out << "class,image_size,threshold,dice\n";
  for (ClassLabel c : kAllClasses) {
    const SelectedCell& cell = selection.per_class[c];
    out << class_name(c) << ',' << cell.image_size << ',' << format_double(cell.threshold) << ','
        << format_double(cell.dice) << '\n';
  }
}

}  // namespace doclayout
