#include "conspec/directions.hpp"

#include <fstream>
#include <sstream>

#include "conspec/csv.hpp"
#include "conspec/embedding.hpp"
#include "conspec/error.hpp"
#include "conspec/simd.hpp"

namespace conspec {

namespace {

std::size_t count_placeholders(std::string_view t) {
  std::size_t n = 0;
  for (std::size_t pos = t.find("{}"); pos != std::string_view::npos; pos = t.find("{}", pos + 2)) ++n;
  return n;
}

}  // namespace

CaptionTemplateSet::CaptionTemplateSet(std::vector<std::string> templates) : templates_(std::move(templates)) {
  if (templates_.empty()) throw Error(ErrorKind::InvalidArgument, "empty caption template set");
  for (const auto& t : templates_) {
    if (count_placeholders(t) != 1) {
      throw Error(ErrorKind::InvalidArgument, "template needs exactly one {} placeholder: '" + t + "'");
    }
  }
}

CaptionTemplateSet CaptionTemplateSet::defaults() {
  return CaptionTemplateSet({
    "a bad photo of a {}.",
    "a photo of many {}.",
    "a photo of the hard to see {}.",
    "a low resolution photo of the {}.",
    "a rendering of a {}.",
    "a bad photo of the {}.",
    "a cropped photo of the {}.",
    "a photo of a hard to see {}.",
    "a bright photo of a {}.",
    "a photo of a clean {}.",
    "a photo of a dirty {}.",
    "a dark photo of the {}.",
    "a drawing of a {}.",
    "a photo of my {}.",
    "a photo of the cool {}.",
    "a close-up photo of a {}.",
    "a black and white photo of the {}.",
    "a painting of the {}.",
    "a painting of a {}.",
    "a pixelated photo of the {}.",
    "a bright photo of the {}.",
    "a cropped photo of a {}.",
    "a photo of the dirty {}.",
    "a jpeg corrupted photo of a {}.",
    "a blurry photo of the {}.",
    "a photo of the {}.",
    "a good photo of the {}.",
    "a rendering of the {}.",
    "a {} in an image.",
    "a photo of one {}.",
    "a doodle of a {}.",
    "a close-up photo of the {}.",
    "a photo of a {}.",
    "the {} in an image.",
    "a sketch of a {}.",
    "a doodle of the {}.",
    "a low resolution photo of a {}.",
    "a photo of the clean {}.",
    "a photo of a large {}.",
    "a photo of a nice {}.",
    "a photo of a weird {}.",
    "a blurry photo of a {}.",
    "a cartoon {}.",
    "art of a {}.",
    "a sketch of the {}.",
    "a pixelated photo of a {}.",
    "a jpeg corrupted photo of the {}.",
    "a good photo of a {}.",
    "a photo of the nice {}.",
    "a photo of the small {}.",
    "a photo of the weird {}.",
    "the cartoon {}.",
    "art of the {}.",
    "a drawing of the {}.",
    "a photo of the large {}.",
    "a black and white photo of a {}.",
    "a dark photo of a {}.",
    "a photo of a cool {}.",
    "a photo of a small {}.",
    "a photo containing a {}.",
    "a photo containing the {}.",
    "a photo with a {}.",
    "a photo with the {}.",
    "a photo containing a {} object.",
    "a photo containing the {} object.",
    "a photo with a {} object.",
    "a photo with the {} object.",
    "a photo of a {} object.",
    "a photo of the {} object.",
  });
}

CaptionTemplateSet CaptionTemplateSet::load(const std::filesystem::path& path) {
  std::istringstream in(csv::read_text_file(path));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(std::move(line));
  }
  return CaptionTemplateSet(std::move(out));
}

CaptionTemplateSet CaptionTemplateSet::select(std::span<const std::size_t> indices) const {
  std::vector<std::string> out;
  for (std::size_t i : indices) {
    if (i >= templates_.size()) throw Error(ErrorKind::InvalidArgument, "template index out of range");
    out.push_back(templates_[i]);
  }
  return CaptionTemplateSet(std::move(out));
}

std::vector<std::string> expand_captions(const CaptionTemplateSet& templates, std::string_view name) {
  if (name.empty()) throw Error(ErrorKind::InvalidArgument, "empty caption subject");
  std::vector<std::string> out;
  out.reserve(templates.size());
  for (const auto& t : templates.templates()) {
    std::string caption = t;
    caption.replace(caption.find("{}"), 2, name);
    out.push_back(std::move(caption));
  }
  return out;
}

void TextEmbedder::insert(std::string caption, Vector embedding) {
  if (embedding.empty()) throw Error(ErrorKind::DimMismatch, "empty caption embedding");
  if (dim_ == 0) dim_ = embedding.size();
  if (embedding.size() != dim_) {
    throw Error(ErrorKind::DimMismatch, "caption embedding of dim " + std::to_string(embedding.size()) +
                                            ", table has dim " + std::to_string(dim_));
  }
  if (!all_finite(embedding)) throw Error(ErrorKind::FormatError, "non-finite caption embedding");
  auto [it, inserted] = table_.insert_or_assign(caption, std::move(embedding));
  if (inserted) order_.push_back(it->first);
}

const Vector* TextEmbedder::find(std::string_view caption) const {
  const auto it = table_.find(std::string(caption));
  return it == table_.end() ? nullptr : &it->second;
}

TextEmbedder TextEmbedder::load_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read_file(path);
  const std::string src = path.string();
  if (t.header.size() < 2 || t.header[0] != "caption") {
    throw Error(ErrorKind::FormatError, src + ": header must be caption,d0,...,d{p-1}");
  }
  const std::size_t p = t.header.size() - 1;
  for (std::size_t j = 0; j < p; ++j) {
    if (t.header[j + 1] != "d" + std::to_string(j)) {
      throw Error(ErrorKind::FormatError, src + ": expected column d" + std::to_string(j));
    }
  }
  TextEmbedder e;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Vector v(p);
    const std::string ctx = src + ":" + std::to_string(t.lines[r]);
    for (std::size_t j = 0; j < p; ++j) v[j] = csv::parse_double(t.rows[r][j + 1], ctx);
    if (e.find(t.rows[r][0])) throw Error(ErrorKind::FormatError, ctx + ": duplicate caption");
    e.insert(t.rows[r][0], std::move(v));
  }
  return e;
}

void TextEmbedder::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  csv::Record header{"caption"};
  for (std::size_t j = 0; j < dim_; ++j) header.push_back("d" + std::to_string(j));
  csv::write_record(out, header);
  for (const auto& caption : order_) {
    csv::Record rec{caption};
    for (double v : table_.at(caption)) rec.push_back(csv::format_double(v));
    csv::write_record(out, rec);
  }
}

ConceptDirection concept_direction(const std::string& name, const CaptionTemplateSet& templates,
                                   const TextEmbedder& embed) {
  const auto captions = expand_captions(templates, name);
  Vector sum(embed.dim(), 0.0);
  for (const auto& c : captions) {
    const Vector* v = embed.find(c);
    if (!v) throw Error(ErrorKind::MissingCaptionEmbedding, "no embedding for caption '" + c + "'");
    simd::axpy(1.0, *v, sum);
  }
  const double inv = 1.0 / static_cast<double>(captions.size());
  for (double& x : sum) x *= inv;
  if (!(simd::squared_norm(sum) > 0.0)) {
    throw Error(ErrorKind::ZeroMeanVector, "caption embeddings for '" + name + "' average to zero");
  }
  return {name, std::move(sum), captions.size()};
}

ClassLabel zero_shot_classify(std::span<const double> img_embedding, std::span<const ConceptDirection> class_dirs) {
  if (class_dirs.size() < 2) throw Error(ErrorKind::InvalidArgument, "zero-shot head needs at least two classes");
  std::size_t best = 0;
  double best_cos = cosine_similarity(img_embedding, class_dirs[0].direction);
  for (std::size_t k = 1; k < class_dirs.size(); ++k) {
    const double c = cosine_similarity(img_embedding, class_dirs[k].direction);
    if (c > best_cos) {
      best = k;
      best_cos = c;
    }
  }
  return {class_dirs[best].name, best};
}

const ConceptDirection* DirectionTable::find_concept(std::string_view name) const {
  for (const auto& d : concepts) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

void save_directions_csv(const DirectionTable& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  const std::size_t p = !t.concepts.empty() ? t.concepts[0].direction.size()
                        : !t.classes.empty() ? t.classes[0].direction.size()
                                             : 0;
  csv::Record header{"name", "kind", "caption_count"};
  for (std::size_t j = 0; j < p; ++j) header.push_back("d" + std::to_string(j));
  csv::write_record(out, header);
  auto emit = [&](const ConceptDirection& d, const char* kind) {
    csv::Record rec{d.name, kind, std::to_string(d.caption_count)};
    for (double v : d.direction) rec.push_back(csv::format_double(v));
    csv::write_record(out, rec);
  };
  for (const auto& d : t.concepts) emit(d, "concept");
  for (const auto& d : t.classes) emit(d, "class");
}

DirectionTable load_directions_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read_file(path);
  const std::string src = path.string();
  if (t.header.size() < 4 || t.header[0] != "name" || t.header[1] != "kind" || t.header[2] != "caption_count") {
    throw Error(ErrorKind::FormatError, src + ": header must be name,kind,caption_count,d0,...");
  }
  const std::size_t p = t.header.size() - 3;
  DirectionTable out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string ctx = src + ":" + std::to_string(t.lines[r]);
    ConceptDirection d;
    d.name = row[0];
    d.caption_count = static_cast<std::size_t>(csv::parse_double(row[2], ctx));
    d.direction.resize(p);
    for (std::size_t j = 0; j < p; ++j) d.direction[j] = csv::parse_double(row[j + 3], ctx);
    if (row[1] == "concept") {
      out.concepts.push_back(std::move(d));
    } else if (row[1] == "class") {
      out.classes.push_back(std::move(d));
    } else {
      throw Error(ErrorKind::FormatError, ctx + ": kind must be concept or class");
    }
  }
  return out;
}

DirectionTable build_directions(const TaskVocabulary& vocab, const CaptionTemplateSet& templates,
                                const TextEmbedder& embed) {
  DirectionTable t;
  for (const auto& c : vocab.concepts()) t.concepts.push_back(concept_direction(c, templates, embed));
  for (const auto& c : vocab.classes()) t.classes.push_back(concept_direction(c, templates, embed));
  return t;
}

}  // namespace conspec
