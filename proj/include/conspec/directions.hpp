#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "conspec/linalg.hpp"
#include "conspec/vocab.hpp"

namespace conspec {

// Caption templates, each with exactly one "{}" placeholder.
class CaptionTemplateSet {
 public:
  // Throws InvalidArgument if empty or any template lacks exactly one "{}".
  explicit CaptionTemplateSet(std::vector<std::string> templates);

  // The shipped 69-template list (also in data/templates.txt).
  static CaptionTemplateSet defaults();
  // One template per line; blank lines ignored.
  static CaptionTemplateSet load(const std::filesystem::path& path);

  const std::vector<std::string>& templates() const noexcept { return templates_; }
  std::size_t size() const noexcept { return templates_.size(); }

  // Subset by position, order preserved.
  CaptionTemplateSet select(std::span<const std::size_t> indices) const;

 private:
  std::vector<std::string> templates_;
};

std::vector<std::string> expand_captions(const CaptionTemplateSet& templates, std::string_view name);

// Precomputed text-encoder outputs keyed by exact caption text.
class TextEmbedder {
 public:
  TextEmbedder() = default;

  void insert(std::string caption, Vector embedding);
  const Vector* find(std::string_view caption) const;
  std::size_t size() const noexcept { return table_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  // captions.csv: `caption,d0,...,d{p-1}`, caption quoted per RFC 4180.
  static TextEmbedder load_csv(const std::filesystem::path& path);
  void save_csv(const std::filesystem::path& path) const;

 private:
  std::unordered_map<std::string, Vector> table_;
  std::vector<std::string> order_;
  std::size_t dim_ = 0;
};

struct ConceptDirection {
  std::string name;
  Vector direction;  // mean caption embedding, not normalized
  std::size_t caption_count = 0;
};

ConceptDirection concept_direction(const std::string& name, const CaptionTemplateSet& templates,
                                   const TextEmbedder& embed);

// Label whose direction has the largest cosine with the image embedding;
// ties go to the lowest index. class_dirs[k] belongs to class k.
ClassLabel zero_shot_classify(std::span<const double> img_embedding, std::span<const ConceptDirection> class_dirs);

// directions.csv: `name,kind,caption_count,d0,...` with kind concept|class.
struct DirectionTable {
  std::vector<ConceptDirection> concepts;
  std::vector<ConceptDirection> classes;

  const ConceptDirection* find_concept(std::string_view name) const;
};
void save_directions_csv(const DirectionTable& t, const std::filesystem::path& path);
DirectionTable load_directions_csv(const std::filesystem::path& path);

// Directions for every concept and class of a vocabulary.
DirectionTable build_directions(const TaskVocabulary& vocab, const CaptionTemplateSet& templates,
                                const TextEmbedder& embed);

}  // namespace conspec
