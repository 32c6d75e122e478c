#include "conspec/manifest.hpp"

#include <json.hpp>

#include "conspec/csv.hpp"
#include "conspec/error.hpp"

namespace conspec {

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const json& obj, const char* key,
                              bool required) {
  if (!obj.contains(key) || obj[key].is_null()) {
    if (required) throw Error(ErrorKind::FormatError, std::string("manifest: missing files.") + key);
    return {};
  }
  if (!obj[key].is_string()) throw Error(ErrorKind::FormatError, std::string("manifest: files.") + key + " must be a string");
  std::filesystem::path p = obj[key].get<std::string>();
  if (p.is_relative()) p = base / p;
  if (!std::filesystem::exists(p)) throw Error(ErrorKind::IoError, "manifest references missing file " + p.string());
  return p;
}

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw Error(ErrorKind::FormatError, std::string("manifest: ") + key + " must be an array of strings");
  }
  std::vector<std::string> out;
  for (const auto& v : j[key]) {
    if (!v.is_string()) throw Error(ErrorKind::FormatError, std::string("manifest: ") + key + " must contain strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Manifest Manifest::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(csv::read_text_file(path));
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::FormatError, path.string() + ": " + ex.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::FormatError, "manifest must be a JSON object");

  Manifest m;
  m.base_dir = path.parent_path();
  if (!j.contains("dim") || !j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0) {
    throw Error(ErrorKind::FormatError, "manifest: dim must be a positive integer");
  }
  m.dim = j["dim"].get<std::size_t>();
  m.vlm_dim = m.dim;
  if (j.contains("vlm_dim")) {
    if (!j["vlm_dim"].is_number_unsigned() || j["vlm_dim"].get<std::size_t>() == 0) {
      throw Error(ErrorKind::FormatError, "manifest: vlm_dim must be a positive integer");
    }
    m.vlm_dim = j["vlm_dim"].get<std::size_t>();
  }
  m.vocab = TaskVocabulary(string_list(j, "concept_names"), string_list(j, "class_names"));

  if (!j.contains("files") || !j["files"].is_object()) throw Error(ErrorKind::FormatError, "manifest: missing files object");
  const json& files = j["files"];
  SplitFiles train;
  train.embeddings = resolve(m.base_dir, files, "embeddings", true);
  train.labels = resolve(m.base_dir, files, "labels", false);
  train.attributes = resolve(m.base_dir, files, "attributes", false);
  train.vlm_embeddings = resolve(m.base_dir, files, "vlm_embeddings", false);
  m.splits["train"] = train;
  m.captions = resolve(m.base_dir, files, "captions", false);
  m.head = resolve(m.base_dir, files, "head", false);
  m.templates = resolve(m.base_dir, files, "templates", false);
  m.partition = resolve(m.base_dir, files, "partition", false);

  if (j.contains("splits")) {
    if (!j["splits"].is_object()) throw Error(ErrorKind::FormatError, "manifest: splits must be an object");
    for (const auto& [name, obj] : j["splits"].items()) {
      if (!obj.is_object()) throw Error(ErrorKind::FormatError, "manifest: split '" + name + "' must be an object");
      SplitFiles s;
      s.embeddings = resolve(m.base_dir, obj, "embeddings", true);
      s.labels = resolve(m.base_dir, obj, "labels", false);
      s.attributes = resolve(m.base_dir, obj, "attributes", false);
      s.vlm_embeddings = resolve(m.base_dir, obj, "vlm_embeddings", false);
      m.splits[name] = s;
    }
  }
  return m;
}

const SplitFiles& Manifest::split(const std::string& name) const {
  const auto it = splits.find(name);
  if (it == splits.end()) throw Error(ErrorKind::InvalidArgument, "manifest has no split '" + name + "'");
  return it->second;
}

EmbeddingSet Manifest::load_split(const std::string& name, Space space) const {
  const SplitFiles& s = split(name);
  const auto& file = space == Space::Vision ? s.embeddings : s.vlm_embeddings;
  if (file.empty()) {
    throw Error(ErrorKind::InvalidArgument, "split '" + name + "' has no " +
                                                (space == Space::Vision ? "vision" : "VLM") + " embeddings");
  }
  EmbeddingSet e = load_embeddings_csv(file);
  const std::size_t want = space == Space::Vision ? dim : vlm_dim;
  if (e.dim() != want) {
    throw Error(ErrorKind::DimMismatch, file.string() + " has dim " + std::to_string(e.dim()) +
                                            ", manifest declares " + std::to_string(want));
  }
  if (!s.labels.empty()) attach_labels_csv(e, s.labels);
  if (!s.attributes.empty()) attach_attributes_csv(e, s.attributes);
  for (const auto* labels : {&e.ground_truth, &e.predicted}) {
    if (!*labels) continue;
    for (const auto& l : **labels) {
      if (!vocab.find_class(l)) throw Error(ErrorKind::UnknownName, s.labels.string() + ": unknown class '" + l + "'");
    }
  }
  if (e.attributes) {
    for (const auto& c : e.attributes->concepts) {
      if (!vocab.has_concept(c)) throw Error(ErrorKind::UnknownName, s.attributes.string() + ": unknown concept '" + c + "'");
    }
  }
  return e;
}

}  // namespace conspec
