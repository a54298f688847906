#include "udderid/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "udderid/error.hpp"
#include "udderid/lbp.hpp"

namespace udderid {

using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

void check_schema_version(const Json& j, ErrorCode code) {
  if (!j.contains("schema")) return;
  if (!j["schema"].is_number_integer() || j["schema"].get<int>() != 1) {
    throw Error(code, "unsupported schema version");
  }
}

// ---------------------------------------------------------------------------
// Manifest

const Json& required(const Json& obj, const char* key, std::string_view where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::SchemaViolation, std::string(where) + ": missing `" + key + "`");
  }
  return obj[key];
}

int required_int(const Json& obj, const char* key, std::string_view where) {
  const Json& v = required(obj, key, where);
  if (!v.is_number_integer()) throw Error(ErrorCode::SchemaViolation, std::string(where) + ": `" + key + "` must be an integer");
  return v.get<int>();
}

std::string required_string(const Json& obj, const char* key, std::string_view where) {
  const Json& v = required(obj, key, where);
  if (!v.is_string() || v.get<std::string>().empty()) {
    throw Error(ErrorCode::SchemaViolation, std::string(where) + ": `" + key + "` must be a non-empty string");
  }
  return v.get<std::string>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

std::string relative_to(const fs::path& base, const fs::path& p) {
  if (base.empty()) return p.generic_string();
  const fs::path rel = p.lexically_relative(base);
  if (rel.empty() || *rel.begin() == "..") return p.generic_string();
  return rel.generic_string();
}

// ---------------------------------------------------------------------------
// Annotation

Box parse_box(const Json& j, std::string_view where) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, std::string(where) + ": box must be an object");
  Box b;
  double* fields[] = {&b.x, &b.y, &b.w, &b.h};
  const char* names[] = {"x", "y", "w", "h"};
  for (int i = 0; i < 4; ++i) {
    if (!j.contains(names[i]) || !j[names[i]].is_number()) {
      throw Error(ErrorCode::ParseError, std::string(where) + ": `" + names[i] + "` must be a number");
    }
    *fields[i] = j[names[i]].get<double>();
  }
  return b;
}

Json box_json(const Box& b) { return {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}; }

// %.17g survives a text round trip exactly.
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Manifest parse_manifest(std::string_view text, const fs::path& base_dir) {
  const Json j = parse_json(text);
  if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "manifest must be a JSON object");
  check_schema_version(j, ErrorCode::SchemaViolation);

  Manifest m;
  m.collection = required_int(j, "collection", "manifest");
  if (m.collection != 1 && m.collection != 2) throw Error(ErrorCode::SchemaViolation, "collection must be 1 or 2");
  const Json& entries = required(j, "entries", "manifest");
  if (!entries.is_array()) throw Error(ErrorCode::SchemaViolation, "`entries` must be an array");

  std::set<std::pair<std::string, int>> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Json& e = entries[i];
    const std::string where = "entries[" + std::to_string(i) + "]";
    ManifestEntry entry;
    entry.cow_id = required_string(e, "cow_id", where);
    entry.day = required_int(e, "day", where);
    if (entry.day != 1 && entry.day != 2) throw Error(ErrorCode::SchemaViolation, where + ": day must be 1 or 2");
    entry.annotation = resolve(base_dir, required_string(e, "annotation", where));
    if (e.contains("image") && !e["image"].is_null()) entry.image = resolve(base_dir, required_string(e, "image", where));
    if (e.contains("rotation_deg")) {
      if (!e["rotation_deg"].is_number()) throw Error(ErrorCode::SchemaViolation, where + ": rotation_deg must be a number");
      entry.rotation_deg = e["rotation_deg"].get<double>();
    }
    if (e.contains("crop") && !e["crop"].is_null()) {
      const Json& c = e["crop"];
      const std::string cw = where + ".crop";
      entry.crop = CropRect{required_int(c, "x", cw), required_int(c, "y", cw), required_int(c, "w", cw),
                            required_int(c, "h", cw)};
      if (entry.crop->w < 1 || entry.crop->h < 1) throw Error(ErrorCode::SchemaViolation, cw + ": w and h must be >= 1");
    }
    if (!seen.emplace(entry.cow_id, entry.day).second) {
      throw Error(ErrorCode::DuplicateEntry, "cow " + entry.cow_id + " day " + std::to_string(entry.day));
    }
    m.entries.push_back(std::move(entry));
  }
  return m;
}

Manifest load_manifest(const fs::path& path) {
  return parse_manifest(read_file(path), fs::absolute(path).parent_path());
}

std::string manifest_json(const Manifest& m, const fs::path& base_dir) {
  Json entries = Json::array();
  for (const ManifestEntry& e : m.entries) {
    Json j = {{"cow_id", e.cow_id}, {"day", e.day}, {"annotation", relative_to(base_dir, e.annotation)}};
    if (e.image) j["image"] = relative_to(base_dir, *e.image);
    j["rotation_deg"] = e.rotation_deg;
    if (e.crop) j["crop"] = {{"x", e.crop->x}, {"y", e.crop->y}, {"w", e.crop->w}, {"h", e.crop->h}};
    entries.push_back(std::move(j));
  }
  const Json j = {{"schema", 1}, {"collection", m.collection}, {"entries", std::move(entries)}};
  return j.dump(2) + "\n";
}

void save_manifest(const Manifest& m, const fs::path& path) {
  write_file_atomic(path, manifest_json(m, fs::absolute(path).parent_path().lexically_normal()));
}

UdderAnnotation parse_annotation(std::string_view text) {
  const Json j = parse_json(text);
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "annotation must be a JSON object");
  check_schema_version(j, ErrorCode::ParseError);

  UdderAnnotation ann;
  if (j.contains("image")) {
    if (!j["image"].is_string()) throw Error(ErrorCode::ParseError, "`image` must be a string");
    ann.image_ref = j["image"].get<std::string>();
  }
  if (!j.contains("udder_box")) throw Error(ErrorCode::ParseError, "missing `udder_box`");
  ann.udder_box = parse_box(j["udder_box"], "udder_box");
  if (!j.contains("teats") || !j["teats"].is_array()) throw Error(ErrorCode::ParseError, "`teats` must be an array");

  std::array<bool, 4> present{};
  for (const Json& t : j["teats"]) {
    if (!t.is_object() || !t.contains("position") || !t["position"].is_string()) {
      throw Error(ErrorCode::ParseError, "teat entry needs a string `position`");
    }
    const std::string label = t["position"].get<std::string>();
    const auto position = parse_teat_position(label);
    if (!position) throw Error(ErrorCode::ParseError, "unknown teat position \"" + label + "\"");
    const auto idx = static_cast<std::size_t>(*position);
    if (present[idx]) throw Error(ErrorCode::DuplicatePosition, "teat " + label + " appears twice");
    present[idx] = true;
    if (!t.contains("box")) throw Error(ErrorCode::ParseError, "teat " + label + " has no `box`");
    ann.teats[idx] = parse_box(t["box"], "teat " + label);
  }
  for (const TeatPosition p : kTeatOrder) {
    if (!present[static_cast<std::size_t>(p)]) {
      throw Error(ErrorCode::MissingTeat, "no box for teat " + std::string(to_string(p)));
    }
  }
  validate(ann);
  return ann;
}

std::string annotation_json(const UdderAnnotation& ann) {
  Json teats = Json::array();
  for (const TeatPosition p : kTeatOrder) {
    teats.push_back({{"position", std::string(to_string(p))}, {"box", box_json(ann.teat(p))}});
  }
  const Json j = {{"schema", 1}, {"image", ann.image_ref}, {"udder_box", box_json(ann.udder_box)}, {"teats", teats}};
  return j.dump(2) + "\n";
}

UdderAnnotation load_annotation(const fs::path& path) { return parse_annotation(read_file(path)); }

void save_annotation(const UdderAnnotation& ann, const fs::path& path) {
  validate(ann);
  write_file_atomic(path, annotation_json(ann));
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out.flush()) throw Error(ErrorCode::IoError, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "rename to " + path.string() + ": " + ec.message());
}

GrayImage preprocess_frame(const ManifestEntry& entry) {
  if (!entry.image) throw Error(ErrorCode::FileNotFound, "entry has no image");
  const GrayImage rotated = rotate(load_grayscale(*entry.image), entry.rotation_deg);
  return crop(rotated, entry.crop.value_or(full_rect(rotated)));
}

FeatureVector extract_features(const ManifestEntry& entry, FeatureLayout layout, bool normalize) {
  Eigen::VectorXd values(dims(layout));
  Eigen::Index offset = 0;
  if (layout != FeatureLayout::Texture72) {
    values.segment(0, kGeometryDims) = geometric_features(load_annotation(entry.annotation), normalize).flatten();
    offset = kGeometryDims;
  }
  if (layout != FeatureLayout::Geometry17) {
    values.segment(offset, 2 * kNecklaceClasses) = texture_features(preprocess_frame(entry)).flatten();
  }
  return make_feature_vector(layout, std::move(values));
}

ExtractionResult extract_dataset(std::span<const Manifest> manifests, FeatureLayout layout, bool normalize) {
  ExtractionResult result;
  for (const Manifest& m : manifests) {
    for (const ManifestEntry& e : m.entries) {
      try {
        result.dataset.samples.push_back({e.cow_id, m.collection, e.day, extract_features(e, layout, normalize)});
      } catch (const Error& err) {
        result.failures.push_back({e.cow_id, m.collection, e.day, err.what()});
      }
    }
  }
  validate(result.dataset);
  return result;
}

std::string features_csv(const Dataset& ds, FeatureLayout layout) {
  const int d = dims(layout);
  std::string out = "cow_id,collection,day";
  for (int i = 0; i < d; ++i) out += ",f" + std::to_string(i);
  out += '\n';
  for (const Sample& s : ds.samples) {
    if (s.features.layout != layout || s.features.values.size() != d) {
      throw Error(ErrorCode::InconsistentLayout, "sample for cow " + s.cow_id + " is not " + std::string(to_string(layout)));
    }
    if (s.cow_id.find_first_of(",\"\r\n") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "cow id not representable in CSV: " + s.cow_id);
    }
    out += s.cow_id + "," + std::to_string(s.collection) + "," + std::to_string(s.day);
    for (int i = 0; i < d; ++i) out += "," + format_double(s.features.values(i));
    out += '\n';
  }
  return out;
}

void export_features(const Dataset& ds, FeatureLayout layout, const fs::path& path) {
  const std::string csv = features_csv(ds, layout);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << csv;
  if (!out.flush()) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

Dataset import_features(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty feature file " + path.string());

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) header.push_back(cell);
  }
  const int d = static_cast<int>(header.size()) - 3;
  std::optional<FeatureLayout> layout;
  for (const FeatureLayout l : {FeatureLayout::Geometry17, FeatureLayout::Texture72, FeatureLayout::Combined89}) {
    if (dims(l) == d) layout = l;
  }
  if (!layout || header[0] != "cow_id" || header[1] != "collection" || header[2] != "day") {
    throw Error(ErrorCode::ParseError, "unrecognized feature header in " + path.string());
  }

  Dataset ds;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != d + 3) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    }
    try {
      Eigen::VectorXd values(d);
      for (int i = 0; i < d; ++i) values(i) = std::stod(cells[static_cast<std::size_t>(i + 3)]);
      ds.samples.push_back({cells[0], std::stoi(cells[1]), std::stoi(cells[2]), make_feature_vector(*layout, values)});
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  validate(ds);
  return ds;
}

}  // namespace udderid
