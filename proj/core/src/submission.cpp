#include <algorithm>
#include <charconv>
#include <sstream>
#include <tuple>

#include "doclayout/error.hpp"
#include "doclayout/geometry.hpp"
#include "doclayout/io.hpp"

namespace doclayout {

namespace {

constexpr std::string_view kHeader = "document_id,class_name,rle_counts";

}  // namespace

std::string format_submission(std::span<const FusedDocumentResult> results) {
  if (results.empty()) throw MalformedInput("submission needs at least one fused result");
  struct Row {
    std::string_view id;
    std::string_view name;
    RleMask rle;
  };
  std::vector<Row> rows;
  rows.reserve(results.size() * kNumClasses);
  for (const FusedDocumentResult& r : results) {
    if (r.document_id.find_first_of(",\n\r") != std::string::npos) {
      throw MalformedInput("document id '" + r.document_id + "' cannot appear in a submission");
    }
    for (ClassLabel c : kAllClasses) {
      rows.push_back({r.document_id, class_name(c), rle_encode(r.per_class_mask[c])});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.id, a.name) < std::tie(b.id, b.name);
  });

  std::ostringstream out;
  out << kHeader << '\n';
  for (const Row& row : rows) {
    out << row.id << ',' << row.name << ',';
    bool first = true;
    for (RleMask::Count c : row.rle.counts()) {
      if (!first) out << ' ';
      out << c;
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

std::size_t write_submission(std::span<const FusedDocumentResult> results,
                             const std::filesystem::path& path) {
  write_text_file(path, format_submission(results));
  return results.size() * kNumClasses;
}

std::vector<SubmissionRow> parse_submission(std::string_view text) {
  std::vector<SubmissionRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw MalformedInput("submission must start with header '" + std::string(kHeader) + "'");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw MalformedInput("submission line " + std::to_string(line_no) + " needs 3 fields");
    }
    SubmissionRow row;
    row.document_id = line.substr(0, c1);
    const auto label = parse_class_label(line.substr(c1 + 1, c2 - c1 - 1));
    if (!label) throw MalformedInput("submission line " + std::to_string(line_no) + ": bad class");
    row.label = *label;
    std::istringstream counts(line.substr(c2 + 1));
    std::string token;
    while (counts >> token) {
      RleMask::Count value = 0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw MalformedInput("submission line " + std::to_string(line_no) + ": bad count '" +
                             token + "'");
      }
      row.counts.push_back(value);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace doclayout
