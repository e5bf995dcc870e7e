#include "doclayout/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "doclayout/error.hpp"

namespace doclayout {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Drops a trailing '#' comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

class LineError {
 public:
  explicit LineError(int line) : line_(line) {}
  [[noreturn]] void raise(const std::string& what) const {
    throw MalformedInput("config line " + std::to_string(line_) + ": " + what);
  }

 private:
  int line_;
};

double parse_number(std::string_view value, const LineError& err) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    err.raise("expected a number, got '" + std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view value, const LineError& err) {
  if (value == "true") return true;
  if (value == "false") return false;
  err.raise("expected true or false, got '" + std::string(value) + "'");
}

ClassSet parse_class_list(std::string_view value, const LineError& err) {
  if (value.size() < 2 || value.front() != '[' || value.back() != ']') {
    err.raise("expected a list like [\"table\"]");
  }
  ClassSet set{};
  std::string_view body = trim(value.substr(1, value.size() - 2));
  while (!body.empty()) {
    const auto comma = body.find(',');
    std::string_view item = trim(body.substr(0, comma));
    if (item.size() < 2 || item.front() != '"' || item.back() != '"') {
      err.raise("list items must be quoted class names");
    }
    item = item.substr(1, item.size() - 2);
    const auto label = parse_class_label(item);
    if (!label) err.raise("unknown class '" + std::string(item) + "'");
    set[*label] = true;
    if (comma == std::string_view::npos) break;
    body = trim(body.substr(comma + 1));
  }
  return set;
}

}  // namespace

EnsembleConfig parse_config(std::string_view text) {
  EnsembleConfig config = EnsembleConfig::paper_defaults();
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const LineError err(line_no);
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') err.raise("unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "thresholds" && section != "image_model" && section != "post_processing") {
        err.raise("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) err.raise("expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));

    if (section == "thresholds") {
      const auto label = parse_class_label(key);
      if (!label) err.raise("unknown class '" + key + "'");
      config.threshold_per_class[*label] = parse_number(value, err);
    } else if (section == "image_model") {
      if (key == "override") {
        config.image_override_enabled = parse_bool(value, err);
      } else if (key == "threshold") {
        config.image_model_threshold = parse_number(value, err);
      } else if (key == "fallback_to_general") {
        config.override_fallback_to_general = parse_bool(value, err);
      } else {
        err.raise("unknown key '" + key + "' in [image_model]");
      }
    } else if (section == "post_processing") {
      if (key != "hull_fill") err.raise("unknown key '" + key + "' in [post_processing]");
      config.hull_fill_classes = parse_class_list(value, err);
    } else {
      err.raise("key '" + key + "' outside of a section");
    }
  }
  config.validate();
  return config;
}

EnsembleConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string format_config(const EnsembleConfig& config) {
  std::ostringstream out;
  auto number = [](double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
  };
  out << "[thresholds]\n";
  for (ClassLabel c : kAllClasses) {
    out << class_name(c) << " = " << number(config.threshold_per_class[c]) << '\n';
  }
  out << "\n[image_model]\n"
      << "override = " << (config.image_override_enabled ? "true" : "false") << '\n'
      << "threshold = " << number(config.image_model_threshold) << '\n'
      << "fallback_to_general = " << (config.override_fallback_to_general ? "true" : "false")
      << '\n';
  out << "\n[post_processing]\nhull_fill = [";
  bool first = true;
  for (ClassLabel c : kAllClasses) {
    if (!config.hull_fill_classes[c]) continue;
    out << (first ? "" : ", ") << '"' << class_name(c) << '"';
    first = false;
  }
  out << "]\n";
  return out.str();
}

}  // namespace doclayout
