#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "conspec/embedding.hpp"
#include "conspec/vocab.hpp"

namespace conspec {

enum class Space { Vision, Vlm };

struct SplitFiles {
  std::filesystem::path embeddings;      // vision-model space
  std::filesystem::path vlm_embeddings;  // optional: VLM image space
  std::filesystem::path labels;          // optional
  std::filesystem::path attributes;      // optional
};

// Project manifest (JSON):
//   {"dim": p, "vlm_dim": p_g?, "class_names": [...], "concept_names": [...],
//    "files": {"embeddings", "labels", "attributes", "captions",
//              "vlm_embeddings"?, "head"?, "templates"?, "partition"?},
//    "splits": {"test": {"embeddings", "vlm_embeddings", "labels", "attributes"}}?}
// `files` describes the default "train" split; `splits` adds or overrides
// named splits. Relative paths resolve against the manifest's directory.
struct Manifest {
  std::filesystem::path base_dir;
  std::size_t dim = 0;
  std::size_t vlm_dim = 0;
  TaskVocabulary vocab;
  std::map<std::string, SplitFiles> splits;
  std::filesystem::path captions;
  std::filesystem::path head;
  std::filesystem::path templates;
  std::filesystem::path partition;

  // Parses and validates structure, names and file existence without
  // reading any data file.
  static Manifest load(const std::filesystem::path& path);

  const SplitFiles& split(const std::string& name) const;

  // Loads one split in one space, with labels and attributes attached when
  // the manifest lists them. Checks the declared dimension.
  EmbeddingSet load_split(const std::string& name, Space space) const;
};

}  // namespace conspec
