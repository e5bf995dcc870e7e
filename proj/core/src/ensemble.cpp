#include "doclayout/ensemble.hpp"

#include <algorithm>
#include <optional>

#include "doclayout/error.hpp"
#include "doclayout/geometry.hpp"
#include "doclayout/parallel.hpp"

namespace doclayout {

std::vector<InstancePrediction> filter_by_confidence(std::span<const InstancePrediction> predictions,
                                                     const EnsembleConfig& config) {
  std::vector<InstancePrediction> kept;
  for (const InstancePrediction& p : predictions) {
    if (p.confidence >= config.threshold_per_class[p.label]) kept.push_back(p);
  }
  return kept;
}

std::vector<InstancePrediction> apply_image_override(std::span<const InstancePrediction> general,
                                                     std::span<const InstancePrediction> image_model,
                                                     const EnsembleConfig& config) {
  const bool gate_open = std::any_of(general.begin(), general.end(), [](const auto& p) {
    return p.label == ClassLabel::kImage;
  });
  if (!config.image_override_enabled || !gate_open) {
    return {general.begin(), general.end()};
  }
  if (image_model.empty() && config.override_fallback_to_general) {
    return {general.begin(), general.end()};
  }

  std::vector<InstancePrediction> out;
  for (const InstancePrediction& p : general) {
    if (p.label != ClassLabel::kImage) out.push_back(p);
  }
  for (const InstancePrediction& p : image_model) {
    InstancePrediction refined = p;
    refined.label = ClassLabel::kImage;
    out.push_back(std::move(refined));
  }
  return out;
}

BinaryMask resolve_resolution(const InstancePrediction& pred, int doc_width, int doc_height,
                              bool /*high_resolution*/) {
  // The flag records why a mask is small; the native size alone decides
  // whether upscaling is needed.
  BinaryMask mask = to_binary_mask(pred.mask, Size{doc_width, doc_height});
  if (mask.width() != doc_width || mask.height() != doc_height) {
    return resize_mask(mask, doc_width, doc_height);
  }
  return mask;
}

namespace {

struct ResolvedInstances {
  ClassMap<std::vector<InstancePrediction>> instances;
  ClassMap<std::vector<BinaryMask>> masks;
};

ResolvedInstances resolve_all(std::span<const InstancePrediction> instances,
                              const DocumentRecord& doc, const EnsembleConfig& config,
                              bool high_resolution) {
  ResolvedInstances out;
  for (const InstancePrediction& p : instances) {
    BinaryMask mask = resolve_resolution(p, doc.width(), doc.height(), high_resolution);
    if (config.hull_fill_classes[p.label]) mask = hull_fill(mask);
    out.instances[p.label].push_back(p);
    out.masks[p.label].push_back(std::move(mask));
  }
  return out;
}

ClassMap<BinaryMask> union_per_class(const ClassMap<std::vector<BinaryMask>>& masks, Size size) {
  return ClassMap<BinaryMask>::generate([&](ClassLabel c) {
    BinaryMask merged(size.width, size.height);
    for (const BinaryMask& m : masks[c]) mask_union_into(merged, m);
    return merged;
  });
}

FusedDocumentResult fuse(const DocumentRecord& doc, const DocumentPredictions& general,
                         const DocumentPredictions* image_model, const EnsembleConfig& config) {
  std::vector<InstancePrediction> kept = filter_by_confidence(general.predictions, config);
  bool high_resolution = general.high_resolution;
  if (image_model != nullptr && config.image_override_enabled) {
    std::vector<InstancePrediction> images;
    for (const InstancePrediction& p : image_model->predictions) {
      if (p.label == ClassLabel::kImage && p.confidence >= config.image_model_threshold) {
        images.push_back(p);
      }
    }
    kept = apply_image_override(kept, images, config);
    high_resolution = high_resolution && image_model->high_resolution;
  }

  ResolvedInstances resolved = resolve_all(kept, doc, config, high_resolution);
  ClassMap<BinaryMask> merged = union_per_class(resolved.masks, doc.size());
  return FusedDocumentResult{doc.id(), doc.size(), std::move(merged),
                             std::move(resolved.instances), std::move(resolved.masks)};
}

}  // namespace

ClassMap<BinaryMask> fill_class_masks(std::span<const InstancePrediction> instances,
                                      const DocumentRecord& doc, const EnsembleConfig& config,
                                      bool high_resolution) {
  return union_per_class(resolve_all(instances, doc, config, high_resolution).masks, doc.size());
}

FusedDocumentResult run_pipeline(const DocumentRecord& doc, const ModelPredictionSet& general,
                                 const ModelPredictionSet& image_model,
                                 const EnsembleConfig& config) {
  const DocumentPredictions& g = general.at(doc.id());
  const DocumentPredictions& i = image_model.at(doc.id());
  return fuse(doc, g, &i, config);
}

FusedDocumentResult run_pipeline(const DocumentRecord& doc, const ModelPredictionSet& general,
                                 const EnsembleConfig& config) {
  return fuse(doc, general.at(doc.id()), nullptr, config);
}

std::vector<FusedDocumentResult> run_pipeline_batch(std::span<const DocumentRecord> docs,
                                                    const ModelPredictionSet& general,
                                                    const ModelPredictionSet* image_model,
                                                    const EnsembleConfig& config) {
  std::vector<std::optional<FusedDocumentResult>> slots(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) {
    slots[i] = image_model != nullptr ? run_pipeline(docs[i], general, *image_model, config)
                                      : run_pipeline(docs[i], general, config);
  });
  std::vector<FusedDocumentResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace doclayout
