#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "doclayout/error.hpp"
#include "doclayout/io.hpp"
#include "json.hpp"

namespace doclayout {

using nlohmann::json;

namespace {

std::string normalize_category(std::string_view name) {
  std::string key;
  for (char ch : name) {
    if (ch == '-' || ch == '_' || ch == ' ') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return key;
}

std::optional<ClassLabel> map_category(const std::string& name,
                                       const AnnotationLoadOptions& options) {
  if (auto label = parse_class_label(name)) return label;
  const std::string key = normalize_category(name);
  for (const auto& [alias, label] : options.category_aliases) {
    if (normalize_category(alias) == key) return label;
  }
  return std::nullopt;
}

std::string document_id_for(const json& image) {
  if (image.contains("file_name") && image["file_name"].is_string()) {
    const std::filesystem::path file(image["file_name"].get<std::string>());
    const std::string stem = file.stem().string();
    if (!stem.empty()) return stem;
  }
  return image.at("id").dump();
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedInput(std::string(what) + " is not valid JSON: " + e.what());
  }
}

}  // namespace

Dataset parse_annotations(std::string_view json_text, const AnnotationLoadOptions& options) {
  const json root = parse_json(json_text, "annotation file");
  try {
    std::map<long long, ClassLabel> categories;
    for (const json& cat : root.at("categories")) {
      const std::string name = cat.at("name").get<std::string>();
      const auto label = map_category(name, options);
      if (!label) throw MalformedInput("unknown category name '" + name + "'");
      categories[cat.at("id").get<long long>()] = *label;
    }

    struct Pending {
      std::string id;
      int width;
      int height;
      std::vector<GroundTruthInstance> instances;
    };
    std::vector<Pending> pending;
    std::map<long long, std::size_t> image_index;
    std::set<std::string> seen_ids;
    for (const json& image : root.at("images")) {
      const long long image_id = image.at("id").get<long long>();
      Pending doc{document_id_for(image), image.at("width").get<int>(),
                  image.at("height").get<int>(), {}};
      if (!seen_ids.insert(doc.id).second) {
        throw MalformedInput("duplicate document id '" + doc.id + "'");
      }
      if (!image_index.emplace(image_id, pending.size()).second) {
        throw MalformedInput("duplicate image id " + std::to_string(image_id));
      }
      pending.push_back(std::move(doc));
    }

    Dataset dataset;
    const json empty = json::array();
    const json& annotations = root.contains("annotations") ? root["annotations"] : empty;
    for (const json& ann : annotations) {
      const long long image_id = ann.at("image_id").get<long long>();
      auto img = image_index.find(image_id);
      if (img == image_index.end()) {
        throw MalformedInput("annotation references missing image id " +
                             std::to_string(image_id));
      }
      const long long category_id = ann.at("category_id").get<long long>();
      auto cat = categories.find(category_id);
      if (cat == categories.end()) {
        throw MalformedInput("annotation references unknown category id " +
                             std::to_string(category_id));
      }
      const std::string ann_name =
          ann.contains("id") ? "annotation " + ann["id"].dump() : "annotation";
      const json& seg = ann.at("segmentation");
      if (!seg.is_array()) {
        dataset.warnings.push_back(ann_name + ": non-polygon segmentation skipped");
        continue;
      }
      GroundTruthInstance instance{cat->second, {}};
      for (const json& flat : seg) {
        if (!flat.is_array() || flat.size() % 2 != 0 || flat.size() < 6) {
          dataset.warnings.push_back(ann_name + ": polygon with fewer than 3 points skipped");
          continue;
        }
        std::vector<Point> pts;
        pts.reserve(flat.size() / 2);
        for (std::size_t i = 0; i < flat.size(); i += 2) {
          pts.push_back({flat[i].get<double>(), flat[i + 1].get<double>()});
        }
        instance.parts.emplace_back(std::move(pts));
      }
      if (instance.parts.empty()) continue;
      dataset.polygon_count += instance.parts.size();
      ++dataset.instance_count;
      pending[img->second].instances.push_back(std::move(instance));
    }

    dataset.documents.reserve(pending.size());
    for (Pending& p : pending) {
      dataset.documents.emplace_back(std::move(p.id), p.width, p.height, std::move(p.instances));
    }
    return dataset;
  } catch (const json::exception& e) {
    throw MalformedInput(std::string("annotation file: ") + e.what());
  }
}

Dataset load_annotations(const std::filesystem::path& path, const AnnotationLoadOptions& options) {
  return parse_annotations(read_text_file(path), options);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

void RunManifest::validate() const {
  auto require = [](const std::filesystem::path& p, std::string_view what) {
    if (!std::filesystem::is_regular_file(p)) {
      throw Error(std::string(what) + " not found: '" + p.string() + "'");
    }
  };
  require(dataset_path, "dataset file");
  require(general_predictions_path, "general-model predictions");
  if (image_model_predictions_path) {
    require(*image_model_predictions_path, "image-model predictions");
  }
  config.validate();
  if (!output_directory.empty()) std::filesystem::create_directories(output_directory);
}

}  // namespace doclayout
