#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "doclayout/ensemble.hpp"
#include "doclayout/types.hpp"

namespace doclayout {

// ---------------------------------------------------------------------------
// COCO-style ground truth

struct AnnotationLoadOptions {
  // Extra category names (matched after lowercasing and dropping '-', '_'
  // and spaces) on top of the built-in ones.
  std::map<std::string, ClassLabel> category_aliases;
};

struct Dataset {
  std::vector<DocumentRecord> documents;
  // Non-fatal problems, e.g. skipped degenerate polygons.
  std::vector<std::string> warnings;
  std::size_t instance_count = 0;
  std::size_t polygon_count = 0;
};

// Document ids are the image file_name without directory or extension
// (the numeric image id when file_name is absent). Throws MalformedInput on
// unknown category names, annotations referencing missing images, or
// duplicate document ids. Polygons with fewer than 3 points are skipped with
// a warning.
Dataset parse_annotations(std::string_view json_text, const AnnotationLoadOptions& options = {});
Dataset load_annotations(const std::filesystem::path& path,
                         const AnnotationLoadOptions& options = {});

// ---------------------------------------------------------------------------
// Model predictions (JSON; schema in README.md)

ModelPredictionSet parse_predictions(std::string_view json_text);
ModelPredictionSet load_predictions(const std::filesystem::path& path);
std::string format_predictions(const ModelPredictionSet& set);

// ---------------------------------------------------------------------------
// Fused results (JSON, RLE masks)

std::string format_fused_results(std::span<const FusedDocumentResult> results);
std::vector<FusedDocumentResult> parse_fused_results(std::string_view json_text);
void write_fused_results(std::span<const FusedDocumentResult> results,
                         const std::filesystem::path& path);
std::vector<FusedDocumentResult> load_fused_results(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Submission: header "document_id,class_name,rle_counts", then one row per
// (document, class) sorted by document id then class name, counts
// space-separated in column-major background-first order.

struct SubmissionRow {
  std::string document_id;
  ClassLabel label = ClassLabel::kParagraph;
  std::vector<RleMask::Count> counts;

  bool operator==(const SubmissionRow&) const = default;
};

std::string format_submission(std::span<const FusedDocumentResult> results);
// Returns the number of data rows written (header excluded).
std::size_t write_submission(std::span<const FusedDocumentResult> results,
                             const std::filesystem::path& path);
std::vector<SubmissionRow> parse_submission(std::string_view text);

// ---------------------------------------------------------------------------

struct RunManifest {
  std::filesystem::path dataset_path;
  std::filesystem::path general_predictions_path;
  std::optional<std::filesystem::path> image_model_predictions_path;
  EnsembleConfig config;
  std::filesystem::path output_directory;
  bool emit_overlays = false;

  // Throws Error naming the first input path that does not exist, and
  // creates the output directory.
  void validate() const;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace doclayout
