#include "segaudit/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "segaudit/errors.hpp"

namespace segaudit {

using nlohmann::json;

namespace {

std::string Upper(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

json ParseJson(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

template <typename T>
T Field(const json& object, const char* key, std::string_view what) {
  if (!object.is_object() || !object.contains(key)) {
    throw FormatError(std::string(what) + ": missing field '" + key + "'");
  }
  try {
    return object.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": field '" + key + "': " + e.what());
  }
}

std::string CsvEscape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

double ParseDouble(const std::string& text, std::string_view what) {
  double value = 0.0;
  const auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw FormatError(std::string(what) + ": bad number '" + text + "'");
  }
  return value;
}

std::int64_t ParseInt(const std::string& text, std::string_view what) {
  std::int64_t value = 0;
  const auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw FormatError(std::string(what) + ": bad integer '" + text + "'");
  }
  return value;
}

json ParamsToJson(const ErrorParams& params) {
  json out = json::object();
  if (const auto* p = std::get_if<DropParams>(&params)) {
    out["dropped_class"] = p->dropped_class;
  } else if (const auto* p = std::get_if<SwapParams>(&params)) {
    out["class_a"] = p->class_a;
    out["class_b"] = p->class_b;
  } else if (const auto* p = std::get_if<ShiftParams>(&params)) {
    out["class"] = p->shifted_class;
    out["op"] = std::string(ToString(p->op));
    out["radius"] = p->radius;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return std::move(buffer).str();
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("short write to " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

std::string FormatDouble(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

// ---------------------------------------------------------------------------
// Manifest

std::filesystem::path DatasetManifest::ResolveProb(std::size_t index) const {
  const auto& p = entries.at(index).prob_path;
  return p.is_absolute() ? p : base_dir / p;
}

std::filesystem::path DatasetManifest::ResolveLabel(std::size_t index) const {
  const auto& p = entries.at(index).label_path;
  return p.is_absolute() ? p : base_dir / p;
}

void DatasetManifest::Validate() const {
  if (num_classes < 2 || num_classes > 256) {
    throw ValidationError("manifest: num_classes must be in [2,256], got " +
                          std::to_string(num_classes));
  }
  if (unlabeled_class < 0 || unlabeled_class >= num_classes) {
    throw ValidationError("manifest: unlabeled_class " +
                          std::to_string(unlabeled_class) + " outside [0," +
                          std::to_string(num_classes) + ")");
  }
  std::set<std::string> seen;
  for (const ManifestEntry& e : entries) {
    if (e.image_id.empty()) throw ValidationError("manifest: empty image_id");
    if (!seen.insert(e.image_id).second) {
      throw ValidationError("manifest: duplicate image_id '" + e.image_id + "'");
    }
    if (e.height < 1 || e.width < 1) {
      throw ValidationError("manifest: image '" + e.image_id +
                            "' has non-positive dimensions");
    }
  }
}

DatasetManifest ParseManifest(std::string_view json_text,
                              const std::filesystem::path& base_dir) {
  const json doc = ParseJson(json_text, "manifest");
  DatasetManifest manifest;
  manifest.base_dir = base_dir;
  manifest.num_classes = Field<int>(doc, "num_classes", "manifest");
  manifest.unlabeled_class =
      doc.contains("unlabeled_class")
          ? Field<ClassIndex>(doc, "unlabeled_class", "manifest")
          : 0;
  const json& entries = doc.contains("entries") ? doc.at("entries") : json();
  if (!entries.is_array()) throw FormatError("manifest: 'entries' must be an array");
  for (const json& e : entries) {
    ManifestEntry entry;
    entry.image_id = Field<std::string>(e, "image_id", "manifest entry");
    entry.prob_path = Field<std::string>(e, "prob_path", "manifest entry");
    entry.label_path = Field<std::string>(e, "label_path", "manifest entry");
    entry.height = Field<int>(e, "height", "manifest entry");
    entry.width = Field<int>(e, "width", "manifest entry");
    manifest.entries.push_back(std::move(entry));
  }
  manifest.Validate();
  return manifest;
}

DatasetManifest ReadManifest(const std::filesystem::path& path) {
  return ParseManifest(ReadFile(path), path.parent_path());
}

std::string SerializeManifest(const DatasetManifest& manifest) {
  json entries = json::array();
  for (const ManifestEntry& e : manifest.entries) {
    entries.push_back({{"image_id", e.image_id},
                       {"prob_path", e.prob_path.generic_string()},
                       {"label_path", e.label_path.generic_string()},
                       {"height", e.height},
                       {"width", e.width}});
  }
  const json doc = {{"num_classes", manifest.num_classes},
                    {"unlabeled_class", manifest.unlabeled_class},
                    {"entries", std::move(entries)}};
  return doc.dump(2) + "\n";
}

void WriteManifest(const std::filesystem::path& path,
                   const DatasetManifest& manifest) {
  manifest.Validate();
  WriteFileAtomic(path, SerializeManifest(manifest));
}

AnnotatedMask LoadMask(const DatasetManifest& manifest, std::size_t index) {
  const ManifestEntry& e = manifest.entries.at(index);
  AnnotatedMask labels = ReadMask(manifest.ResolveLabel(index), manifest.num_classes);
  if (!labels.SameShape(e.height, e.width)) {
    throw ShapeError("image '" + e.image_id + "': mask is " +
                     std::to_string(labels.height()) + "x" +
                     std::to_string(labels.width()) + ", manifest declares " +
                     std::to_string(e.height) + "x" + std::to_string(e.width));
  }
  return labels;
}

LoadedImage LoadImage(const DatasetManifest& manifest, std::size_t index) {
  const ManifestEntry& e = manifest.entries.at(index);
  ProbabilityMap probs = ReadTensor(
      manifest.ResolveProb(index), {manifest.num_classes, e.height, e.width});
  return {std::move(probs), LoadMask(manifest, index)};
}

// ---------------------------------------------------------------------------
// Reports

std::string_view ToString(Method method) {
  switch (method) {
    case Method::kCcp: return "CCP";
    case Method::kTccp: return "TCCP";
    case Method::kCil: return "CIL";
    case Method::kSoftmin: return "SOFTMIN";
    case Method::kClc: return "CLC";
    case Method::kIou: return "IOU";
    case Method::kCoco: return "COCO";
  }
  return "CIL";
}

Method ParseMethod(std::string_view text) {
  const std::string upper = Upper(text);
  for (Method m : kAllMethods) {
    if (ToString(m) == upper) return m;
  }
  throw ValidationError("unknown method '" + std::string(text) + "'");
}

ReportFormat ParseReportFormat(std::string_view text) {
  const std::string upper = Upper(text);
  if (upper == "CSV") return ReportFormat::kCsv;
  if (upper == "JSON") return ReportFormat::kJson;
  throw ValidationError("unknown report format '" + std::string(text) + "'");
}

std::vector<ScoreRecord> RankScores(
    Method method, std::span<const std::pair<std::string, double>> scores) {
  std::vector<ScoreRecord> records;
  records.reserve(scores.size());
  for (const auto& [id, score] : scores) {
    if (!std::isfinite(score)) {
      throw ValidationError("non-finite score for image '" + id + "'");
    }
    records.push_back({id, method, score, 0});
  }
  std::sort(records.begin(), records.end(),
            [](const ScoreRecord& a, const ScoreRecord& b) {
              if (a.score != b.score) return a.score < b.score;
              return a.image_id < b.image_id;
            });
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].rank = static_cast<std::int64_t>(i) + 1;
  }
  return records;
}

std::string SerializeReport(std::span<const ScoreRecord> records,
                            ReportFormat format) {
  if (records.empty()) throw ValidationError("report has no records");
  std::vector<ScoreRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoreRecord& a, const ScoreRecord& b) {
              if (a.method != b.method) return a.method < b.method;
              if (a.rank != b.rank) return a.rank < b.rank;
              return a.image_id < b.image_id;
            });
  if (format == ReportFormat::kJson) {
    json rows = json::array();
    for (const ScoreRecord& r : sorted) {
      rows.push_back({{"image_id", r.image_id},
                      {"method", std::string(ToString(r.method))},
                      {"score", r.score},
                      {"rank", r.rank}});
    }
    return rows.dump(2) + "\n";
  }
  std::string out = "image_id,method,score,rank\n";
  for (const ScoreRecord& r : sorted) {
    out += CsvEscape(r.image_id);
    out += ',';
    out += ToString(r.method);
    out += ',';
    out += FormatDouble(r.score);
    out += ',';
    out += std::to_string(r.rank);
    out += '\n';
  }
  return out;
}

void WriteReport(std::span<const ScoreRecord> records,
                 const std::filesystem::path& path, ReportFormat format) {
  WriteFileAtomic(path, SerializeReport(records, format));
}

std::vector<ScoreRecord> ParseReport(std::string_view text) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  std::vector<ScoreRecord> records;
  if (first != std::string_view::npos && text[first] == '[') {
    const json rows = ParseJson(text, "report");
    for (const json& row : rows) {
      records.push_back({Field<std::string>(row, "image_id", "report"),
                         ParseMethod(Field<std::string>(row, "method", "report")),
                         Field<double>(row, "score", "report"),
                         Field<std::int64_t>(row, "rank", "report")});
    }
    return records;
  }
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw FormatError("report: empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "image_id,method,score,rank") {
    throw FormatError("report: unexpected CSV header '" + line + "'");
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = SplitCsvLine(line);
    if (fields.size() != 4) {
      throw FormatError("report: expected 4 fields in '" + line + "'");
    }
    records.push_back({fields[0], ParseMethod(fields[1]),
                       ParseDouble(fields[2], "report score"),
                       ParseInt(fields[3], "report rank")});
  }
  return records;
}

std::vector<ScoreRecord> ReadReport(const std::filesystem::path& path) {
  return ParseReport(ReadFile(path));
}

// ---------------------------------------------------------------------------
// Error logs

std::string SerializeErrorLog(const ErrorLogHeader& header,
                              std::span<const ErrorLog> logs) {
  const json head = {
      {"header",
       {{"generator", header.generator},
        {"seed", header.seed},
        {"error_type", std::string(ToString(header.error_type))},
        {"proportion", header.proportion},
        {"shift_radius_range",
         {header.shift_radius_range.first, header.shift_radius_range.second}}}}};
  std::string out = head.dump() + "\n";
  for (const ErrorLog& log : logs) {
    const json row = {{"image_id", log.image_id},
                      {"error_type", std::string(ToString(log.error_type))},
                      {"params", ParamsToJson(log.params)},
                      {"pixels_changed", log.pixels_changed}};
    out += row.dump();
    out += '\n';
  }
  return out;
}

void WriteErrorLog(const std::filesystem::path& path,
                   const ErrorLogHeader& header, std::span<const ErrorLog> logs) {
  WriteFileAtomic(path, SerializeErrorLog(header, logs));
}

std::vector<ErrorLog> ParseErrorLog(std::string_view text) {
  std::vector<ErrorLog> logs;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json row = ParseJson(line, "error log");
    if (row.contains("header")) continue;
    ErrorLog log;
    log.image_id = Field<std::string>(row, "image_id", "error log");
    log.error_type =
        ParseErrorType(Field<std::string>(row, "error_type", "error log"));
    log.pixels_changed = Field<std::int64_t>(row, "pixels_changed", "error log");
    const json params = row.contains("params") ? row.at("params") : json::object();
    switch (log.error_type) {
      case ErrorType::kNone:
        break;
      case ErrorType::kDrop:
        log.params = DropParams{Field<ClassIndex>(params, "dropped_class", "params")};
        break;
      case ErrorType::kSwap:
        log.params = SwapParams{Field<ClassIndex>(params, "class_a", "params"),
                                Field<ClassIndex>(params, "class_b", "params")};
        break;
      case ErrorType::kShift:
        log.params = ShiftParams{
            Field<ClassIndex>(params, "class", "params"),
            ParseMorphOp(Field<std::string>(params, "op", "params")),
            Field<int>(params, "radius", "params")};
        break;
    }
    logs.push_back(std::move(log));
  }
  return logs;
}

std::vector<ErrorLog> ReadErrorLog(const std::filesystem::path& path) {
  return ParseErrorLog(ReadFile(path));
}

// ---------------------------------------------------------------------------
// Evaluation

std::string SerializeEvaluation(const std::map<Method, DetectionMetrics>& table) {
  json doc = json::object();
  for (const auto& [method, m] : table) {
    doc[std::string(ToString(method))] = {
        {"auroc", m.auroc},
        {"auprc", m.auprc},
        {"lift_at_E", m.lift_at_errors},
        {"lift_at_100", m.lift_at_100},
        {"precision_at_E", m.precision_at_errors},
        {"precision_at_100", m.precision_at_100},
        {"num_images", m.num_items},
        {"num_errors", m.num_errors}};
  }
  return doc.dump(2) + "\n";
}

void WriteEvaluation(const std::filesystem::path& path,
                     const std::map<Method, DetectionMetrics>& table) {
  WriteFileAtomic(path, SerializeEvaluation(table));
}

// ---------------------------------------------------------------------------
// Overlays

GrayImage OverlayMask(const PixelScoreMap& scores, const FlagMask& flags,
                      double threshold) {
  RequireSameShape(scores, flags, "overlay");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ValidationError("overlay threshold must be in [0,1], got " +
                          std::to_string(threshold));
  }
  GrayImage mask(scores.height(), scores.width(), 0);
  for (int i = 0; i < scores.height(); ++i) {
    for (int j = 0; j < scores.width(); ++j) {
      if (scores(i, j) < threshold || flags(i, j) == 0) mask(i, j) = 255;
    }
  }
  return mask;
}

OverlayInfo EmitOverlay(std::string_view image_id, const PixelScoreMap& scores,
                        const FlagMask& flags, double threshold,
                        const std::filesystem::path& path) {
  GrayImage mask;
  try {
    mask = OverlayMask(scores, flags, threshold);
  } catch (const ShapeError& e) {
    throw ShapeError("image '" + std::string(image_id) + "': " + e.what());
  }
  OverlayInfo info;
  for (std::uint8_t v : mask.values()) info.marked_pixels += v != 0;
  WriteGrayPng(path, mask);
  return info;
}

}  // namespace segaudit
