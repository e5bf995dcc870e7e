#include <set>

#include "doclayout/error.hpp"
#include "doclayout/geometry.hpp"
#include "doclayout/io.hpp"
#include "json.hpp"

namespace doclayout {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedInput(std::string(what) + " is not valid JSON: " + e.what());
  }
}

ClassLabel class_from_json(const json& value) {
  const std::string name = value.get<std::string>();
  const auto label = parse_class_label(name);
  if (!label) throw MalformedInput("unknown class '" + name + "'");
  return *label;
}

std::vector<RleMask::Count> counts_from_json(const json& counts) {
  std::vector<RleMask::Count> out;
  out.reserve(counts.size());
  for (const json& c : counts) {
    if (!c.is_number_integer()) throw MalformedInput("RLE counts must be integers");
    if (c.get<long long>() < 0) throw MalformedInput("negative RLE run count");
    out.push_back(c.get<RleMask::Count>());
  }
  return out;
}

MaskRepr mask_from_json(const json& mask) {
  if (mask.contains("polygon")) {
    const json& pts = mask["polygon"];
    std::vector<Point> vertices;
    if (!pts.empty() && pts.front().is_array()) {
      for (const json& p : pts) {
        if (p.size() != 2) throw MalformedInput("polygon points must be [x, y] pairs");
        vertices.push_back({p[0].get<double>(), p[1].get<double>()});
      }
    } else {
      if (pts.size() % 2 != 0) throw MalformedInput("flat polygon has an odd coordinate count");
      for (std::size_t i = 0; i < pts.size(); i += 2) {
        vertices.push_back({pts[i].get<double>(), pts[i + 1].get<double>()});
      }
    }
    return Polygon(std::move(vertices));
  }
  if (mask.contains("rle")) {
    const json& rle = mask["rle"];
    return RleMask(rle.at("width").get<int>(), rle.at("height").get<int>(),
                   counts_from_json(rle.at("counts")));
  }
  if (mask.contains("bitmap")) {
    const json& bitmap = mask["bitmap"];
    const int width = bitmap.at("width").get<int>();
    const int height = bitmap.at("height").get<int>();
    const json& rows = bitmap.at("rows");
    if (static_cast<int>(rows.size()) != height) {
      throw MalformedInput("bitmap has " + std::to_string(rows.size()) + " rows, expected " +
                           std::to_string(height));
    }
    BinaryMask out(width, height);
    for (int y = 0; y < height; ++y) {
      const std::string row = rows[static_cast<std::size_t>(y)].get<std::string>();
      if (static_cast<int>(row.size()) != width) {
        throw MalformedInput("bitmap row " + std::to_string(y) + " has the wrong length");
      }
      for (int x = 0; x < width; ++x) {
        const char ch = row[static_cast<std::size_t>(x)];
        if (ch != '0' && ch != '1') throw MalformedInput("bitmap rows may only contain 0 and 1");
        if (ch == '1') out.set(x, y);
      }
    }
    return out;
  }
  throw MalformedInput("mask needs one of polygon, rle or bitmap");
}

json rle_to_json(const RleMask& rle) {
  return json{{"width", rle.width()}, {"height", rle.height()},
              {"counts", std::vector<RleMask::Count>(rle.counts().begin(), rle.counts().end())}};
}

json mask_to_json(const MaskRepr& repr) {
  if (const auto* poly = std::get_if<Polygon>(&repr)) {
    json pts = json::array();
    for (const Point& p : poly->vertices()) pts.push_back({p.x, p.y});
    return json{{"polygon", pts}};
  }
  if (const auto* rle = std::get_if<RleMask>(&repr)) return json{{"rle", rle_to_json(*rle)}};
  const auto& bits = std::get<BinaryMask>(repr);
  json rows = json::array();
  for (int y = 0; y < bits.height(); ++y) {
    std::string row(static_cast<std::size_t>(bits.width()), '0');
    for (int x = 0; x < bits.width(); ++x) {
      if (bits.get(x, y)) row[static_cast<std::size_t>(x)] = '1';
    }
    rows.push_back(row);
  }
  return json{{"bitmap", {{"width", bits.width()}, {"height", bits.height()}, {"rows", rows}}}};
}

}  // namespace

ModelPredictionSet parse_predictions(std::string_view json_text) {
  const json root = parse_json(json_text, "prediction file");
  try {
    ModelPredictionSet set;
    set.model_id = root.at("model_id").get<std::string>();
    set.inference_image_size = root.value("inference_image_size", 640);
    if (set.inference_image_size < 1) throw MalformedInput("inference_image_size must be positive");
    for (const json& doc : root.at("documents")) {
      const std::string id = doc.at("document_id").get<std::string>();
      DocumentPredictions entry;
      entry.high_resolution = doc.value("high_resolution", true);
      for (const json& inst : doc.at("instances")) {
        const std::string source = inst.value("source_model", set.model_id);
        entry.predictions.emplace_back(class_from_json(inst.at("class")),
                                       inst.at("confidence").get<double>(),
                                       mask_from_json(inst.at("mask")), source);
      }
      if (!set.per_document.emplace(id, std::move(entry)).second) {
        throw MalformedInput("duplicate document '" + id + "' in prediction file");
      }
    }
    return set;
  } catch (const json::exception& e) {
    throw MalformedInput(std::string("prediction file: ") + e.what());
  }
}

ModelPredictionSet load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_text_file(path));
}

std::string format_predictions(const ModelPredictionSet& set) {
  json docs = json::array();
  for (const auto& [id, entry] : set.per_document) {
    json instances = json::array();
    for (const InstancePrediction& p : entry.predictions) {
      instances.push_back({{"class", class_name(p.label)},
                           {"confidence", p.confidence},
                           {"source_model", p.source_model},
                           {"mask", mask_to_json(p.mask)}});
    }
    docs.push_back({{"document_id", id},
                    {"high_resolution", entry.high_resolution},
                    {"instances", instances}});
  }
  json root{{"model_id", set.model_id},
            {"inference_image_size", set.inference_image_size},
            {"documents", docs}};
  return root.dump() + "\n";
}

std::string format_fused_results(std::span<const FusedDocumentResult> results) {
  json docs = json::array();
  for (const FusedDocumentResult& r : results) {
    json classes = json::object();
    json instances = json::array();
    for (ClassLabel c : kAllClasses) {
      const RleMask rle = rle_encode(r.per_class_mask[c]);
      classes[std::string(class_name(c))] =
          std::vector<RleMask::Count>(rle.counts().begin(), rle.counts().end());
      for (std::size_t i = 0; i < r.surviving_instances[c].size(); ++i) {
        const InstancePrediction& p = r.surviving_instances[c][i];
        const RleMask inst = rle_encode(r.instance_masks[c][i]);
        instances.push_back(
            {{"class", class_name(c)},
             {"confidence", p.confidence},
             {"source_model", p.source_model},
             {"counts", std::vector<RleMask::Count>(inst.counts().begin(), inst.counts().end())}});
      }
    }
    docs.push_back({{"document_id", r.document_id},
                    {"width", r.size.width},
                    {"height", r.size.height},
                    {"classes", classes},
                    {"instances", instances}});
  }
  return json{{"documents", docs}}.dump() + "\n";
}

std::vector<FusedDocumentResult> parse_fused_results(std::string_view json_text) {
  const json root = parse_json(json_text, "fused results file");
  try {
    std::vector<FusedDocumentResult> out;
    std::set<std::string> seen;
    for (const json& doc : root.at("documents")) {
      const std::string id = doc.at("document_id").get<std::string>();
      if (!seen.insert(id).second) throw MalformedInput("duplicate fused document '" + id + "'");
      const int width = doc.at("width").get<int>();
      const int height = doc.at("height").get<int>();
      const json& classes = doc.at("classes");
      auto per_class = ClassMap<BinaryMask>::generate([&](ClassLabel c) {
        return rle_decode(
            RleMask(width, height, counts_from_json(classes.at(std::string(class_name(c))))));
      });
      ClassMap<std::vector<InstancePrediction>> instances;
      ClassMap<std::vector<BinaryMask>> masks;
      for (const json& inst : doc.at("instances")) {
        const ClassLabel label = class_from_json(inst.at("class"));
        RleMask rle(width, height, counts_from_json(inst.at("counts")));
        masks[label].push_back(rle_decode(rle));
        instances[label].emplace_back(label, inst.at("confidence").get<double>(), std::move(rle),
                                      inst.value("source_model", std::string()));
      }
      out.push_back(FusedDocumentResult{id, Size{width, height}, std::move(per_class),
                                        std::move(instances), std::move(masks)});
    }
    return out;
  } catch (const json::exception& e) {
    throw MalformedInput(std::string("fused results file: ") + e.what());
  }
}

void write_fused_results(std::span<const FusedDocumentResult> results,
                         const std::filesystem::path& path) {
  write_text_file(path, format_fused_results(results));
}

std::vector<FusedDocumentResult> load_fused_results(const std::filesystem::path& path) {
  return parse_fused_results(read_text_file(path));
}

}  // namespace doclayout
