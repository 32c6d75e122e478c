#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "conspec/embedding.hpp"
#include "conspec/vocab.hpp"

namespace conspec {

struct Provenance {
  enum class Kind { A1, A2, A3, GammaSigma };
  Kind kind = Kind::A1;
  std::string cell;  // A3
  double gamma = 0;  // GammaSigma

  // "A1", "A2", "A3:<cell>", "gamma:<g>"
  std::string str() const;
  static Provenance parse(const std::string& text);

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// Axis-aligned box [lower_i, upper_i] in an embedding space.
struct BoxRegion {
  Vector lower;
  Vector upper;
  Provenance provenance;
  std::string cls;

  std::size_t dim() const noexcept { return lower.size(); }
  bool contains(std::span<const double> x, double tol = 0.0) const;
  bool subset_of(const BoxRegion& other) const;
  Vector center() const;
};

// Componentwise min/max hull of the selected rows.
BoxRegion hull(const EmbeddingSet& e, const RowSelection& rows);

// Rows predicted as c.
BoxRegion region_a1(const EmbeddingSet& e, const ClassLabel& c);
// Rows predicted as c whose ground truth is also c.
BoxRegion region_a2(const EmbeddingSet& e, const ClassLabel& c);

// Row id -> cell id.
struct RegionPartition {
  std::map<std::string, std::string> assignment;
};

// One box per cell that holds rows predicted as c, ordered by cell id.
std::vector<BoxRegion> region_a3(const EmbeddingSet& e, const ClassLabel& c, const RegionPartition& part);

// mean +- gamma * std over rows whose ground truth is c.
BoxRegion region_gamma(const EmbeddingSet& e, const ClassLabel& c, double gamma);

// Sign pattern of the k highest-variance columns over the given rows: cell
// "101" means columns one and three at or above their mean, column two below.
RegionPartition surrogate_partition(const EmbeddingSet& e, const RowSelection& rows, std::size_t k = 3);

// partition.csv: `id,cell`
RegionPartition load_partition_csv(const std::filesystem::path& path);
void save_partition_csv(const RegionPartition& part, const std::filesystem::path& path);

// regions.json: [{"provenance", "class", "lower", "upper"}, ...]
void save_regions_json(const std::vector<BoxRegion>& regions, const std::filesystem::path& path);
std::vector<BoxRegion> load_regions_json(const std::filesystem::path& path);

}  // namespace conspec
