#pragma once

#include <span>
#include <string>
#include <vector>

#include "doclayout/types.hpp"

namespace doclayout {

// Final per-class masks for one document after the full inference pipeline.
struct FusedDocumentResult {
  std::string document_id;
  Size size;
  ClassMap<BinaryMask> per_class_mask;
  // Post-threshold, post-override instances, grouped by class.
  ClassMap<std::vector<InstancePrediction>> surviving_instances;
  // Document-resolution mask of each surviving instance after post-processing
  // (hull fill where configured); parallel to surviving_instances.
  ClassMap<std::vector<BinaryMask>> instance_masks;

  bool operator==(const FusedDocumentResult&) const = default;
};

// Keeps predictions with confidence >= the threshold of their class, in order.
std::vector<InstancePrediction> filter_by_confidence(std::span<const InstancePrediction> predictions,
                                                     const EnsembleConfig& config);

// Two-stage image refinement. When `general` holds at least one Image
// instance, its Image instances are replaced by the image model's output; an
// empty image-model output keeps the general ones only if
// config.override_fallback_to_general. Without a general Image instance the
// image model is ignored. Both inputs must already be confidence-filtered.
std::vector<InstancePrediction> apply_image_override(std::span<const InstancePrediction> general,
                                                     std::span<const InstancePrediction> image_model,
                                                     const EnsembleConfig& config);

// Mask of one instance at document resolution. Polygons are rasterized
// directly; raster masks produced at another resolution (the low-resolution
// fallback) are upscaled with nearest-neighbor sampling.
BinaryMask resolve_resolution(const InstancePrediction& pred, int doc_width, int doc_height,
                              bool high_resolution);

// Rasterizes every instance, hull-fills instances of hull_fill_classes one at
// a time, then unions per class.
ClassMap<BinaryMask> fill_class_masks(std::span<const InstancePrediction> instances,
                                      const DocumentRecord& doc, const EnsembleConfig& config,
                                      bool high_resolution = true);

// filter -> override -> resolve -> fill. Throws MissingDocument when either
// prediction set lacks an entry for doc.id().
FusedDocumentResult run_pipeline(const DocumentRecord& doc, const ModelPredictionSet& general,
                                 const ModelPredictionSet& image_model,
                                 const EnsembleConfig& config);

// General model only; the image override is disabled.
FusedDocumentResult run_pipeline(const DocumentRecord& doc, const ModelPredictionSet& general,
                                 const EnsembleConfig& config);

// Runs the pipeline over every document, in parallel, preserving order.
// `image_model` may be null.
std::vector<FusedDocumentResult> run_pipeline_batch(std::span<const DocumentRecord> docs,
                                                    const ModelPredictionSet& general,
                                                    const ModelPredictionSet* image_model,
                                                    const EnsembleConfig& config);

}  // namespace doclayout
