#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "conspec/linalg.hpp"

namespace conspec {

using RowSelection = std::vector<std::size_t>;

// Binary concept annotations, one row per embedding row.
struct AttributeTable {
  std::vector<std::string> concepts;
  std::vector<std::uint8_t> cells;  // row-major, rows x concepts.size()

  bool has(std::size_t row, std::size_t concept_index) const {
    return cells[row * concepts.size() + concept_index] != 0;
  }
  std::size_t concept_index(const std::string& name) const;  // npos if absent
};

// Labeled matrix of embedding vectors. Labels are class names.
struct EmbeddingSet {
  std::vector<std::string> ids;
  Matrix matrix;
  std::optional<std::vector<std::string>> ground_truth;
  std::optional<std::vector<std::string>> predicted;
  std::optional<AttributeTable> attributes;

  std::size_t size() const { return ids.size(); }
  std::size_t dim() const { return matrix.cols(); }
  std::span<const double> row(std::size_t i) const { return matrix.row(i); }

  // Throws FormatError when ids repeat, entries are non-finite, or an
  // optional column does not cover every row.
  void validate() const;

  // Row index for an id, if present.
  std::optional<std::size_t> find(const std::string& id) const;

  RowSelection all_rows() const;
  RowSelection rows_where_predicted(const std::string& cls) const;
  RowSelection rows_where_ground_truth(const std::string& cls) const;
  RowSelection rows_where_correct(const std::string& cls) const;
};

struct ColumnStats {
  Vector mean;
  Vector std;  // population standard deviation
  Vector min;
  Vector max;
};

// (a.b) / (|a| |b|), clamped to [-1, 1].
double cosine_similarity(std::span<const double> a, std::span<const double> b);

ColumnStats column_stats(const EmbeddingSet& e, const RowSelection& rows);

// Reorders `other` so its rows line up with `reference` by id. Throws
// RowMismatch if the id sets differ.
EmbeddingSet align_rows(const EmbeddingSet& reference, const EmbeddingSet& other);

// File formats: embeddings.csv `id,d0,...`; labels.csv
// `id,ground_truth[,predicted]`; attributes.csv `id,<concept>...` with 0/1.
EmbeddingSet load_embeddings_csv(const std::filesystem::path& path);
void save_embeddings_csv(const EmbeddingSet& e, const std::filesystem::path& path);
void attach_labels_csv(EmbeddingSet& e, const std::filesystem::path& path);
void save_labels_csv(const EmbeddingSet& e, const std::filesystem::path& path);
void attach_attributes_csv(EmbeddingSet& e, const std::filesystem::path& path);
void save_attributes_csv(const EmbeddingSet& e, const std::filesystem::path& path);

}  // namespace conspec
