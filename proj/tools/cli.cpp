#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "doclayout/config.hpp"
#include "doclayout/ensemble.hpp"
#include "doclayout/error.hpp"
#include "doclayout/evaluation.hpp"
#include "doclayout/io.hpp"
#include "doclayout/overlay.hpp"
#include "doclayout/sweep.hpp"
#include "json.hpp"

namespace doclayout {

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct ConfigFlags {
  std::string config_path;
  std::optional<double> paragraph;
  std::optional<double> text_box;
  std::optional<double> image;
  std::optional<double> table;
  std::optional<double> image_model;
  std::optional<std::string> hull_fill;
  std::optional<bool> image_override;
  std::optional<bool> fallback_to_general;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "Configuration file (key = value sections)")
        ->check(CLI::ExistingFile);
    cmd.add_option("--paragraph-threshold", paragraph)->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--textbox-threshold", text_box)->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--image-threshold", image)->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--table-threshold", table)->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--image-model-threshold", image_model)->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--hull-fill", hull_fill,
                   "Comma-separated classes to hull-fill, or 'none'");
    cmd.add_option("--image-override", image_override, "Enable the image-model override");
    cmd.add_option("--fallback-to-general", fallback_to_general,
                   "Keep general image instances when the image model finds none");
  }

  EnsembleConfig resolve() const {
    EnsembleConfig config =
        config_path.empty() ? EnsembleConfig::paper_defaults() : load_config(config_path);
    if (paragraph) config.threshold_per_class[ClassLabel::kParagraph] = *paragraph;
    if (text_box) config.threshold_per_class[ClassLabel::kTextBox] = *text_box;
    if (image) config.threshold_per_class[ClassLabel::kImage] = *image;
    if (table) config.threshold_per_class[ClassLabel::kTable] = *table;
    if (image_model) config.image_model_threshold = *image_model;
    if (image_override) config.image_override_enabled = *image_override;
    if (fallback_to_general) config.override_fallback_to_general = *fallback_to_general;
    if (hull_fill) {
      ClassSet set{};
      if (*hull_fill != "none") {
        std::stringstream items(*hull_fill);
        std::string item;
        while (std::getline(items, item, ',')) {
          const auto label = parse_class_label(item);
          if (!label) throw MalformedInput("--hull-fill: unknown class '" + item + "'");
          set[*label] = true;
        }
      }
      config.hull_fill_classes = set;
    }
    config.validate();
    return config;
  }
};

struct DatasetFlags {
  std::string dataset;
  std::vector<std::string> aliases;

  void attach(CLI::App& cmd) {
    cmd.add_option("--dataset", dataset, "COCO-style annotation file")->required();
    cmd.add_option("--category-alias", aliases,
                   "Extra category mapping NAME=CLASS (repeatable)");
  }

  Dataset load(std::ostream& err) const {
    if (!fs::is_regular_file(dataset)) throw Error("dataset file not found: '" + dataset + "'");
    AnnotationLoadOptions options;
    for (const std::string& alias : aliases) {
      const auto eq = alias.find('=');
      const auto label =
          eq == std::string::npos ? std::nullopt : parse_class_label(alias.substr(eq + 1));
      if (!label) throw MalformedInput("--category-alias expects NAME=CLASS, got '" + alias + "'");
      options.category_aliases[alias.substr(0, eq)] = *label;
    }
    Dataset data = load_annotations(dataset, options);
    for (const std::string& w : data.warnings) err << "warning: " << w << '\n';
    return data;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void print_report(const EvaluationReport& report, std::ostream& out) {
  out << std::left << std::setw(11) << "class" << std::setw(10) << "dice" << std::setw(12)
      << "micro_dice" << std::setw(10) << "ap50" << std::setw(11) << "predicted" << std::setw(9)
      << "correct" << std::setw(15) << "predicted_area"
      << "intersection_area\n";
  for (ClassLabel c : kAllClasses) {
    const ClassCounts& counts = report.per_class_counts[c];
    const auto& ap = report.per_class_ap50[c];
    out << std::left << std::setw(11) << class_name(c) << std::setw(10)
        << fmt(report.per_class_dice[c]) << std::setw(12) << fmt(report.per_class_micro_dice[c])
        << std::setw(10) << (ap ? fmt(*ap) : std::string("n/a")) << std::setw(11)
        << counts.instances_predicted << std::setw(9) << counts.correct_predictions
        << std::setw(15) << counts.predicted_area << counts.intersection_area << '\n';
  }
  out << "mean_dice " << fmt(report.mean_dice) << '\n';
  out << "map50 " << fmt(report.map50) << '\n';
  out << "documents " << report.document_count << '\n';
}

std::string report_json(const EvaluationReport& report) {
  nlohmann::json classes = nlohmann::json::object();
  for (ClassLabel c : kAllClasses) {
    const ClassCounts& counts = report.per_class_counts[c];
    nlohmann::json entry{{"dice", report.per_class_dice[c]},
                         {"micro_dice", report.per_class_micro_dice[c]},
                         {"instances_predicted", counts.instances_predicted},
                         {"correct_predictions", counts.correct_predictions},
                         {"predicted_area", counts.predicted_area},
                         {"intersection_area", counts.intersection_area}};
    entry["ap50"] = report.per_class_ap50[c] ? nlohmann::json(*report.per_class_ap50[c])
                                             : nlohmann::json(nullptr);
    classes[std::string(class_name(c))] = entry;
  }
  return nlohmann::json{{"documents", report.document_count},
                        {"mean_dice", report.mean_dice},
                        {"map50", report.map50},
                        {"classes", classes}}
             .dump(2) +
         "\n";
}

std::vector<FusedDocumentResult> fuse_dataset(const Dataset& data, const std::string& general_path,
                                              const std::string& image_model_path,
                                              EnsembleConfig config) {
  const ModelPredictionSet general = load_predictions(general_path);
  if (image_model_path.empty()) {
    config.image_override_enabled = false;
    return run_pipeline_batch(data.documents, general, nullptr, config);
  }
  const ModelPredictionSet image_model = load_predictions(image_model_path);
  return run_pipeline_batch(data.documents, general, &image_model, config);
}

RunManifest make_manifest(const std::string& dataset, const std::string& general,
                          const std::string& image_model, const EnsembleConfig& config,
                          const std::string& output_directory) {
  RunManifest manifest;
  manifest.dataset_path = dataset;
  manifest.general_predictions_path = general;
  if (!image_model.empty()) manifest.image_model_predictions_path = image_model;
  manifest.config = config;
  manifest.output_directory = output_directory;
  return manifest;
}

void require_file(const std::string& path, std::string_view what) {
  if (!fs::is_regular_file(path)) throw Error(std::string(what) + " not found: '" + path + "'");
}

std::optional<fs::path> find_source_image(const std::string& images_dir, const std::string& id) {
  if (images_dir.empty()) return std::nullopt;
  return fs::path(images_dir) / (id + ".png");
}

void emit_overlays(const Dataset& data, std::span<const FusedDocumentResult> results,
                   const fs::path& out_dir, const std::string& images_dir, std::ostream& err) {
  fs::create_directories(out_dir);
  std::map<std::string, const FusedDocumentResult*> by_id;
  for (const auto& r : results) by_id[r.document_id] = &r;
  for (const DocumentRecord& doc : data.documents) {
    auto it = by_id.find(doc.id());
    if (it == by_id.end()) throw MissingDocument(doc.id(), "fused results");
    const auto warnings = render_overlay_file(doc, *it->second,
                                              find_source_image(images_dir, doc.id()),
                                              out_dir / (doc.id() + ".png"));
    for (const std::string& w : warnings) err << "warning: " << w << '\n';
  }
}

// "640=general.json" or "640=general.json,image.json"
std::pair<int, SizePredictions> parse_size_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  int size = 0;
  if (eq == std::string::npos ||
      std::from_chars(spec.data(), spec.data() + eq, size).ptr != spec.data() + eq || size < 1) {
    throw MalformedInput("--size expects SIZE=GENERAL[,IMAGE], got '" + spec + "'");
  }
  const std::string rest = spec.substr(eq + 1);
  const auto comma = rest.find(',');
  const std::string general = rest.substr(0, comma);
  require_file(general, "general-model predictions");
  SizePredictions preds{load_predictions(general), std::nullopt};
  if (comma != std::string::npos) {
    const std::string image = rest.substr(comma + 1);
    require_file(image, "image-model predictions");
    preds.image_model = load_predictions(image);
  }
  return {size, std::move(preds)};
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Document layout ensemble post-processing and evaluation", "doclayout"};
  app.require_subcommand(1);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Fuse predictions and score them");
  DatasetFlags eval_data;
  ConfigFlags eval_config;
  std::string eval_general;
  std::string eval_image;
  std::string eval_report;
  eval_data.attach(*evaluate);
  eval_config.attach(*evaluate);
  evaluate->add_option("--general", eval_general, "General-model predictions")->required();
  evaluate->add_option("--image-model", eval_image, "Image-model predictions");
  evaluate->add_option("--report", eval_report, "Also write the report as JSON");

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Fuse predictions into masks and a submission");
  DatasetFlags fuse_data;
  ConfigFlags fuse_config;
  std::string fuse_general;
  std::string fuse_image;
  std::string fuse_out;
  std::string fuse_images_dir;
  bool fuse_overlays = false;
  fuse_data.attach(*fuse);
  fuse_config.attach(*fuse);
  fuse->add_option("--general", fuse_general, "General-model predictions")->required();
  fuse->add_option("--image-model", fuse_image, "Image-model predictions");
  fuse->add_option("--out-dir", fuse_out, "Output directory")->required();
  fuse->add_flag("--overlays", fuse_overlays, "Also render overlay PNGs");
  fuse->add_option("--images-dir", fuse_images_dir, "Directory of <document_id>.png sources");

  // submit
  auto* submit = app.add_subcommand("submit", "Write a submission file from fused results");
  std::string submit_fused;
  std::string submit_out;
  submit->add_option("--fused", submit_fused, "Fused results JSON")->required();
  submit->add_option("--out", submit_out, "Submission file")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Evaluate an image size x threshold grid");
  DatasetFlags sweep_data;
  ConfigFlags sweep_config;
  std::vector<std::string> sweep_sizes;
  std::vector<double> sweep_thresholds = kDefaultSweepThresholds;
  std::string sweep_out;
  sweep_data.attach(*sweep);
  sweep_config.attach(*sweep);
  sweep->add_option("--size", sweep_sizes, "SIZE=GENERAL[,IMAGE] (repeatable)")->required();
  sweep->add_option("--thresholds", sweep_thresholds, "Confidence thresholds")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--out-dir", sweep_out, "Write grid.csv and optimal.csv here");

  // overlay
  auto* overlay = app.add_subcommand("overlay", "Render fused masks as PNG overlays");
  DatasetFlags overlay_data;
  std::string overlay_fused;
  std::string overlay_out;
  std::string overlay_images_dir;
  overlay_data.attach(*overlay);
  overlay->add_option("--fused", overlay_fused, "Fused results JSON")->required();
  overlay->add_option("--out-dir", overlay_out, "Output directory")->required();
  overlay->add_option("--images-dir", overlay_images_dir,
                      "Directory of <document_id>.png sources");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitUsage;
  }

  try {
    if (evaluate->parsed()) {
      const RunManifest manifest =
          make_manifest(eval_data.dataset, eval_general, eval_image, eval_config.resolve(), {});
      manifest.validate();
      const Dataset data = eval_data.load(err);
      const auto fused = fuse_dataset(data, eval_general, eval_image, manifest.config);
      const EvaluationReport report = evaluate_dataset(fused, data.documents);
      print_report(report, out);
      if (!eval_report.empty()) write_text_file(eval_report, report_json(report));
    } else if (fuse->parsed()) {
      RunManifest manifest =
          make_manifest(fuse_data.dataset, fuse_general, fuse_image, fuse_config.resolve(), fuse_out);
      manifest.emit_overlays = fuse_overlays;
      manifest.validate();
      const Dataset data = fuse_data.load(err);
      const fs::path& out_dir = manifest.output_directory;
      const auto fused = fuse_dataset(data, fuse_general, fuse_image, manifest.config);
      write_fused_results(fused, out_dir / "fused.json");
      const std::size_t rows = write_submission(fused, out_dir / "submission.csv");
      if (manifest.emit_overlays) emit_overlays(data, fused, out_dir / "overlays", fuse_images_dir, err);
      out << "fused " << fused.size() << " documents, " << rows << " submission rows -> "
          << out_dir.string() << '\n';
    } else if (submit->parsed()) {
      require_file(submit_fused, "fused results");
      const auto fused = load_fused_results(submit_fused);
      const std::size_t rows = write_submission(fused, submit_out);
      out << "wrote " << rows << " rows to " << submit_out << '\n';
    } else if (sweep->parsed()) {
      const EnsembleConfig config = sweep_config.resolve();
      const Dataset data = sweep_data.load(err);
      std::map<int, SizePredictions> by_size;
      std::vector<int> sizes;
      for (const std::string& spec : sweep_sizes) {
        auto [size, preds] = parse_size_spec(spec);
        if (!by_size.emplace(size, std::move(preds)).second) {
          throw MalformedInput("--size " + std::to_string(size) + " given twice");
        }
        sizes.push_back(size);
      }
      std::sort(sizes.begin(), sizes.end());
      const SweepGrid grid = run_sweep(data.documents, by_size, sizes, sweep_thresholds, config);
      const auto rows = grid_report(grid);
      const OptimalSelection best = select_optimal(grid);
      if (!sweep_out.empty()) {
        fs::create_directories(sweep_out);
        std::ostringstream grid_csv;
        write_grid_report(rows, grid_csv);
        write_text_file(fs::path(sweep_out) / "grid.csv", grid_csv.str());
        std::ostringstream best_csv;
        write_optimal_selection(best, best_csv);
        write_text_file(fs::path(sweep_out) / "optimal.csv", best_csv.str());
      }
      out << "grid " << sizes.size() << "x" << sweep_thresholds.size() << " ("
          << rows.size() << " rows)\n";
      write_optimal_selection(best, out);
    } else if (overlay->parsed()) {
      const Dataset data = overlay_data.load(err);
      require_file(overlay_fused, "fused results");
      const auto fused = load_fused_results(overlay_fused);
      emit_overlays(data, fused, overlay_out, overlay_images_dir, err);
      out << "rendered " << data.documents.size() << " overlays -> " << overlay_out << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("doclayout");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace doclayout
