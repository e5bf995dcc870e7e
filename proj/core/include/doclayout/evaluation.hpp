#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "doclayout/ensemble.hpp"
#include "doclayout/types.hpp"

namespace doclayout {

inline constexpr double kMatchIou = 0.5;

// 2|P n G| / (|P| + |G|); 1.0 when both masks are empty.
double dice(const BinaryMask& predicted, const BinaryMask& truth);

// |A n B| / |A u B|; 1.0 when both masks are empty.
double iou(const BinaryMask& a, const BinaryMask& b);

struct ScoredMask {
  std::reference_wrapper<const BinaryMask> mask;
  double confidence;
};

struct MatchPair {
  std::size_t prediction;
  std::size_t truth;
  double iou;

  bool operator==(const MatchPair&) const = default;
};

struct MatchResult {
  // In matching order (descending confidence).
  std::vector<MatchPair> pairs;
  std::vector<std::size_t> unmatched_predictions;
  std::vector<std::size_t> unmatched_truths;
};

// Greedy matching in descending confidence (ties keep input order). Each
// prediction takes the unmatched truth of highest IoU >= iou_threshold, ties
// going to the lowest truth index.
MatchResult match_instances(std::span<const ScoredMask> predictions,
                            std::span<const BinaryMask> truths, double iou_threshold);

// All-point interpolated AP over a ranked list of true/false positive flags.
// With no truths: 1.0 if there are no predictions either, else 0.0.
double average_precision(const std::vector<bool>& ranked_is_true_positive, std::size_t num_truths);

// Single-scene AP at IoU 0.5.
double average_precision_50(std::span<const ScoredMask> predictions,
                            std::span<const BinaryMask> truths);

struct MeanAveragePrecision {
  ClassMap<std::optional<double>> per_class;
  double mean = 1.0;
};

// Per-document instances of each class.
using ClassInstances = ClassMap<std::vector<ScoredMask>>;
using ClassTruths = ClassMap<std::vector<BinaryMask>>;

// AP per class with instances pooled across documents, then averaged over
// the classes present in either predictions or truths.
MeanAveragePrecision map50(std::span<const ClassInstances> per_document_predictions,
                           std::span<const ClassTruths> per_document_truths);

// Rasterized ground truth of a document: one mask per annotated instance.
ClassTruths ground_truth_instance_masks(const DocumentRecord& doc);
ClassMap<BinaryMask> ground_truth_class_masks(const DocumentRecord& doc);

// Scored instances of a fused result, referencing its instance masks.
ClassInstances scored_instances(const FusedDocumentResult& result);

ClassMap<double> evaluate_document(const FusedDocumentResult& result, const DocumentRecord& doc);

ClassMap<ClassCounts> counting_metrics(std::span<const FusedDocumentResult> results,
                                       std::span<const DocumentRecord> docs);

// Documents and results are paired by id and reduced in id order.
// Throws on an empty dataset, duplicate ids, or a document without a result.
EvaluationReport evaluate_dataset(std::span<const FusedDocumentResult> results,
                                  std::span<const DocumentRecord> docs);

}  // namespace doclayout
