#include "doclayout/evaluation.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "doclayout/error.hpp"
#include "doclayout/geometry.hpp"
#include "doclayout/parallel.hpp"

namespace doclayout {

double dice(const BinaryMask& predicted, const BinaryMask& truth) {
  const std::int64_t inter = overlap_area(predicted, truth);
  const std::int64_t total = predicted.area() + truth.area();
  if (total == 0) return 1.0;
  return static_cast<double>(2 * inter) / static_cast<double>(total);
}

double iou(const BinaryMask& a, const BinaryMask& b) {
  const std::int64_t inter = overlap_area(a, b);
  const std::int64_t uni = a.area() + b.area() - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

std::vector<std::size_t> by_descending_confidence(std::span<const ScoredMask> predictions) {
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].confidence > predictions[b].confidence;
  });
  return order;
}

}  // namespace

MatchResult match_instances(std::span<const ScoredMask> predictions,
                            std::span<const BinaryMask> truths, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw MalformedInput("IoU threshold must be in (0, 1]");
  }
  MatchResult result;
  std::vector<bool> truth_taken(truths.size(), false);
  std::vector<bool> pred_matched(predictions.size(), false);

  for (std::size_t p : by_descending_confidence(predictions)) {
    const BinaryMask& mask = predictions[p].mask.get();
    std::optional<std::size_t> best;
    double best_iou = 0.0;
    for (std::size_t t = 0; t < truths.size(); ++t) {
      if (truth_taken[t]) continue;
      const double value = iou(mask, truths[t]);
      if (value >= iou_threshold && (!best || value > best_iou)) {
        best = t;
        best_iou = value;
      }
    }
    if (best) {
      truth_taken[*best] = true;
      pred_matched[p] = true;
      result.pairs.push_back({p, *best, best_iou});
    }
  }
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    if (!pred_matched[p]) result.unmatched_predictions.push_back(p);
  }
  for (std::size_t t = 0; t < truths.size(); ++t) {
    if (!truth_taken[t]) result.unmatched_truths.push_back(t);
  }
  return result;
}

double average_precision(const std::vector<bool>& ranked_is_true_positive, std::size_t num_truths) {
  if (num_truths == 0) return ranked_is_true_positive.empty() ? 1.0 : 0.0;
  const std::size_t n = ranked_is_true_positive.size();
  std::vector<double> precision(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked_is_true_positive[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Precision envelope: best precision at this rank or any later one.
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double ap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked_is_true_positive[i]) ap += precision[i];
  }
  return ap / static_cast<double>(num_truths);
}

namespace {

std::vector<bool> true_positive_flags(std::span<const ScoredMask> predictions,
                                      std::span<const BinaryMask> truths) {
  std::vector<bool> flags(predictions.size(), false);
  if (truths.empty()) return flags;
  for (const MatchPair& pair : match_instances(predictions, truths, kMatchIou).pairs) {
    flags[pair.prediction] = true;
  }
  return flags;
}

}  // namespace

double average_precision_50(std::span<const ScoredMask> predictions,
                            std::span<const BinaryMask> truths) {
  const std::vector<bool> flags = true_positive_flags(predictions, truths);
  std::vector<bool> ranked;
  ranked.reserve(flags.size());
  for (std::size_t p : by_descending_confidence(predictions)) ranked.push_back(flags[p]);
  return average_precision(ranked, truths.size());
}

namespace {

struct RankedDetection {
  double confidence;
  bool true_positive;
};

// Per-class detections of one document, labelled TP/FP at IoU 0.5.
struct ClassDetections {
  std::vector<RankedDetection> detections;
  std::size_t num_truths = 0;
};

ClassMap<ClassDetections> label_document(const ClassInstances& predictions,
                                         const ClassTruths& truths) {
  ClassMap<ClassDetections> out;
  for (ClassLabel c : kAllClasses) {
    const std::vector<bool> flags = true_positive_flags(predictions[c], truths[c]);
    for (std::size_t i = 0; i < flags.size(); ++i) {
      out[c].detections.push_back({predictions[c][i].confidence, flags[i]});
    }
    out[c].num_truths = truths[c].size();
  }
  return out;
}

MeanAveragePrecision pooled_ap(std::span<const ClassMap<ClassDetections>> per_document) {
  MeanAveragePrecision result;
  double sum = 0.0;
  int present = 0;
  for (ClassLabel c : kAllClasses) {
    std::vector<RankedDetection> pooled;
    std::size_t truths = 0;
    for (const auto& doc : per_document) {
      pooled.insert(pooled.end(), doc[c].detections.begin(), doc[c].detections.end());
      truths += doc[c].num_truths;
    }
    if (pooled.empty() && truths == 0) continue;
    std::stable_sort(pooled.begin(), pooled.end(), [](const auto& a, const auto& b) {
      return a.confidence > b.confidence;
    });
    std::vector<bool> ranked(pooled.size());
    for (std::size_t i = 0; i < pooled.size(); ++i) ranked[i] = pooled[i].true_positive;
    const double ap = average_precision(ranked, truths);
    result.per_class[c] = ap;
    sum += ap;
    ++present;
  }
  result.mean = present == 0 ? 1.0 : sum / present;
  return result;
}

}  // namespace

MeanAveragePrecision map50(std::span<const ClassInstances> per_document_predictions,
                           std::span<const ClassTruths> per_document_truths) {
  if (per_document_predictions.size() != per_document_truths.size()) {
    throw MalformedInput("map50: prediction and truth document lists differ in length");
  }
  std::vector<ClassMap<ClassDetections>> labelled;
  labelled.reserve(per_document_predictions.size());
  for (std::size_t d = 0; d < per_document_predictions.size(); ++d) {
    labelled.push_back(label_document(per_document_predictions[d], per_document_truths[d]));
  }
  return pooled_ap(labelled);
}

ClassTruths ground_truth_instance_masks(const DocumentRecord& doc) {
  ClassTruths out;
  for (const GroundTruthInstance& inst : doc.instances()) {
    BinaryMask mask(doc.width(), doc.height());
    for (const Polygon& part : inst.parts) {
      mask_union_into(mask, rasterize_polygon(part, doc.width(), doc.height()));
    }
    out[inst.label].push_back(std::move(mask));
  }
  return out;
}

namespace {

ClassMap<BinaryMask> union_truths(const ClassTruths& truths, Size size) {
  return ClassMap<BinaryMask>::generate([&](ClassLabel c) {
    BinaryMask merged(size.width, size.height);
    for (const BinaryMask& m : truths[c]) mask_union_into(merged, m);
    return merged;
  });
}

}  // namespace

ClassMap<BinaryMask> ground_truth_class_masks(const DocumentRecord& doc) {
  return union_truths(ground_truth_instance_masks(doc), doc.size());
}

namespace {

void require_same_document(const FusedDocumentResult& result, const DocumentRecord& doc) {
  if (result.document_id != doc.id()) {
    throw MalformedInput("result for '" + result.document_id + "' paired with document '" +
                         doc.id() + "'");
  }
  if (result.size != doc.size()) {
    throw DimensionMismatch("result for '" + doc.id() + "' does not match document size");
  }
}

struct DocumentScore {
  ClassMap<double> dice{};
  ClassMap<ClassCounts> counts{};
  ClassMap<std::int64_t> truth_area{};
  ClassMap<ClassDetections> detections{};
};

DocumentScore score_document(const FusedDocumentResult& result, const DocumentRecord& doc) {
  require_same_document(result, doc);
  const ClassTruths truths = ground_truth_instance_masks(doc);
  const ClassMap<BinaryMask> truth_masks = union_truths(truths, doc.size());
  const ClassInstances predictions = scored_instances(result);

  DocumentScore score;
  score.detections = label_document(predictions, truths);
  for (ClassLabel c : kAllClasses) {
    const BinaryMask& fused = result.per_class_mask[c];
    score.dice[c] = dice(fused, truth_masks[c]);
    ClassCounts& counts = score.counts[c];
    counts.instances_predicted = static_cast<std::int64_t>(result.surviving_instances[c].size());
    for (const RankedDetection& d : score.detections[c].detections) {
      if (d.true_positive) ++counts.correct_predictions;
    }
    counts.predicted_area = fused.area();
    counts.intersection_area = overlap_area(fused, truth_masks[c]);
    score.truth_area[c] = truth_masks[c].area();
  }
  return score;
}

// Pairs results with documents and returns them sorted by document id.
std::vector<std::pair<const FusedDocumentResult*, const DocumentRecord*>> align(
    std::span<const FusedDocumentResult> results, std::span<const DocumentRecord> docs) {
  std::map<std::string, const FusedDocumentResult*> by_id;
  for (const FusedDocumentResult& r : results) {
    if (!by_id.emplace(r.document_id, &r).second) {
      throw MalformedInput("duplicate result for document '" + r.document_id + "'");
    }
  }
  std::map<std::string, const DocumentRecord*> docs_by_id;
  for (const DocumentRecord& d : docs) {
    if (!docs_by_id.emplace(d.id(), &d).second) {
      throw MalformedInput("duplicate document id '" + d.id() + "'");
    }
  }
  if (by_id.size() != docs_by_id.size()) {
    for (const auto& [id, r] : by_id) {
      if (!docs_by_id.contains(id)) throw MissingDocument(id, "dataset");
    }
  }
  std::vector<std::pair<const FusedDocumentResult*, const DocumentRecord*>> out;
  out.reserve(docs_by_id.size());
  for (const auto& [id, doc] : docs_by_id) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw MissingDocument(id, "fused results");
    out.emplace_back(it->second, doc);
  }
  return out;
}

std::vector<DocumentScore> score_all(std::span<const FusedDocumentResult> results,
                                     std::span<const DocumentRecord> docs) {
  const auto aligned = align(results, docs);
  std::vector<DocumentScore> scores(aligned.size());
  parallel_for(aligned.size(), [&](std::size_t i) {
    scores[i] = score_document(*aligned[i].first, *aligned[i].second);
  });
  return scores;
}

ClassMap<ClassCounts> sum_counts(std::span<const DocumentScore> scores) {
  ClassMap<ClassCounts> total;
  for (const DocumentScore& s : scores) {
    for (ClassLabel c : kAllClasses) {
      total[c].instances_predicted += s.counts[c].instances_predicted;
      total[c].correct_predictions += s.counts[c].correct_predictions;
      total[c].predicted_area += s.counts[c].predicted_area;
      total[c].intersection_area += s.counts[c].intersection_area;
    }
  }
  return total;
}

}  // namespace

ClassInstances scored_instances(const FusedDocumentResult& result) {
  ClassInstances out;
  for (ClassLabel c : kAllClasses) {
    const auto& instances = result.surviving_instances[c];
    const auto& masks = result.instance_masks[c];
    if (instances.size() != masks.size()) {
      throw MalformedInput("fused result '" + result.document_id +
                           "' has mismatched instance and mask lists");
    }
    for (std::size_t i = 0; i < masks.size(); ++i) {
      out[c].push_back({std::cref(masks[i]), instances[i].confidence});
    }
  }
  return out;
}

ClassMap<double> evaluate_document(const FusedDocumentResult& result, const DocumentRecord& doc) {
  require_same_document(result, doc);
  const ClassMap<BinaryMask> truth = union_truths(ground_truth_instance_masks(doc), doc.size());
  return ClassMap<double>::generate(
      [&](ClassLabel c) { return dice(result.per_class_mask[c], truth[c]); });
}

ClassMap<ClassCounts> counting_metrics(std::span<const FusedDocumentResult> results,
                                       std::span<const DocumentRecord> docs) {
  return sum_counts(score_all(results, docs));
}

EvaluationReport evaluate_dataset(std::span<const FusedDocumentResult> results,
                                  std::span<const DocumentRecord> docs) {
  if (docs.empty()) throw MalformedInput("cannot evaluate an empty dataset");
  const std::vector<DocumentScore> scores = score_all(results, docs);

  EvaluationReport report;
  report.document_count = scores.size();
  report.per_class_counts = sum_counts(scores);

  double mean = 0.0;
  for (ClassLabel c : kAllClasses) {
    double sum = 0.0;
    std::int64_t truth_area = 0;
    for (const DocumentScore& s : scores) {
      sum += s.dice[c];
      truth_area += s.truth_area[c];
    }
    report.per_class_dice[c] = sum / static_cast<double>(scores.size());
    const ClassCounts& counts = report.per_class_counts[c];
    const std::int64_t denom = counts.predicted_area + truth_area;
    report.per_class_micro_dice[c] =
        denom == 0 ? 1.0
                   : static_cast<double>(2 * counts.intersection_area) / static_cast<double>(denom);
    mean += report.per_class_dice[c];
  }
  report.mean_dice = mean / static_cast<double>(kNumClasses);

  std::vector<ClassMap<ClassDetections>> detections;
  detections.reserve(scores.size());
  for (const DocumentScore& s : scores) detections.push_back(s.detections);
  const MeanAveragePrecision ap = pooled_ap(detections);
  report.per_class_ap50 = ap.per_class;
  report.map50 = ap.mean;
  return report;
}

}  // namespace doclayout
