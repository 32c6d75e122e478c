#include "conspec/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <unordered_set>

#include "conspec/csv.hpp"
#include "conspec/error.hpp"
#include "conspec/simd.hpp"

namespace conspec {

std::size_t AttributeTable::concept_index(const std::string& name) const {
  const auto it = std::find(concepts.begin(), concepts.end(), name);
  return it == concepts.end() ? std::string::npos : static_cast<std::size_t>(it - concepts.begin());
}

void EmbeddingSet::validate() const {
  if (matrix.rows() != ids.size()) {
    throw Error(ErrorKind::FormatError, "embedding matrix rows do not match id count");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw Error(ErrorKind::FormatError, "duplicate row id '" + id + "'");
  }
  if (!all_finite(matrix.data())) throw Error(ErrorKind::FormatError, "non-finite embedding entry");
  if (ground_truth && ground_truth->size() != ids.size()) {
    throw Error(ErrorKind::FormatError, "ground truth labels do not cover every row");
  }
  if (predicted && predicted->size() != ids.size()) {
    throw Error(ErrorKind::FormatError, "predicted labels do not cover every row");
  }
  if (attributes && attributes->cells.size() != ids.size() * attributes->concepts.size()) {
    throw Error(ErrorKind::FormatError, "attributes do not cover every row");
  }
}

std::optional<std::size_t> EmbeddingSet::find(const std::string& id) const {
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids.begin());
}

RowSelection EmbeddingSet::all_rows() const {
  RowSelection rows(size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

namespace {

RowSelection select_by(const std::optional<std::vector<std::string>>& labels, const std::string& cls,
                       const char* what) {
  if (!labels) throw Error(ErrorKind::InvalidArgument, std::string("embedding set has no ") + what);
  RowSelection rows;
  for (std::size_t i = 0; i < labels->size(); ++i) {
    if ((*labels)[i] == cls) rows.push_back(i);
  }
  return rows;
}

// Deterministic pairwise (tree) reduction over rows: fill(row, out) writes a
// row's contribution, which is summed in a fixed binary-tree order.
void pairwise_sum(const RowSelection& rows, std::size_t lo, std::size_t hi, std::size_t dim,
                  const std::function<void(std::size_t, std::span<double>)>& fill,
                  std::span<double> acc) {
  constexpr std::size_t kLeaf = 8;
  std::fill(acc.begin(), acc.end(), 0.0);
  if (hi - lo <= kLeaf) {
    Vector tmp(dim);
    for (std::size_t i = lo; i < hi; ++i) {
      fill(rows[i], tmp);
      simd::axpy(1.0, tmp, acc);
    }
    return;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  Vector right(dim);
  pairwise_sum(rows, lo, mid, dim, fill, acc);
  pairwise_sum(rows, mid, hi, dim, fill, right);
  simd::axpy(1.0, right, acc);
}

}  // namespace

RowSelection EmbeddingSet::rows_where_predicted(const std::string& cls) const {
  return select_by(predicted, cls, "predicted labels");
}

RowSelection EmbeddingSet::rows_where_ground_truth(const std::string& cls) const {
  return select_by(ground_truth, cls, "ground truth labels");
}

RowSelection EmbeddingSet::rows_where_correct(const std::string& cls) const {
  if (!ground_truth || !predicted) {
    throw Error(ErrorKind::InvalidArgument, "embedding set needs ground truth and predicted labels");
  }
  RowSelection rows;
  for (std::size_t i = 0; i < size(); ++i) {
    if ((*ground_truth)[i] == cls && (*predicted)[i] == cls) rows.push_back(i);
  }
  return rows;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimMismatch, "cosine_similarity of dims " + std::to_string(a.size()) +
                                            " and " + std::to_string(b.size()));
  }
  const double na = simd::squared_norm(a);
  const double nb = simd::squared_norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw Error(ErrorKind::ZeroVector, "cosine_similarity of a zero vector");
  const double c = simd::dot(a, b) / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

ColumnStats column_stats(const EmbeddingSet& e, const RowSelection& rows) {
  if (rows.empty()) throw Error(ErrorKind::EmptySelection, "column_stats over an empty selection");
  const std::size_t p = e.dim();
  const double n = static_cast<double>(rows.size());
  ColumnStats s;
  s.min.assign(e.row(rows[0]).begin(), e.row(rows[0]).end());
  s.max = s.min;
  for (std::size_t r : rows) simd::minmax_update(e.row(r), s.min, s.max);

  s.mean.assign(p, 0.0);
  pairwise_sum(
      rows, 0, rows.size(), p,
      [&](std::size_t r, std::span<double> out) { std::copy(e.row(r).begin(), e.row(r).end(), out.begin()); },
      s.mean);
  for (double& m : s.mean) m /= n;
  // Rounding can push the mean a hair outside [min, max] on constant columns.
  for (std::size_t j = 0; j < p; ++j) s.mean[j] = std::clamp(s.mean[j], s.min[j], s.max[j]);

  s.std.assign(p, 0.0);
  pairwise_sum(
      rows, 0, rows.size(), p,
      [&](std::size_t r, std::span<double> out) {
        const auto x = e.row(r);
        for (std::size_t j = 0; j < p; ++j) {
          const double d = x[j] - s.mean[j];
          out[j] = d * d;
        }
      },
      s.std);
  for (double& v : s.std) v = std::sqrt(v / n);
  return s;
}

EmbeddingSet align_rows(const EmbeddingSet& reference, const EmbeddingSet& other) {
  if (reference.size() != other.size()) {
    throw Error(ErrorKind::RowMismatch, "row counts differ: " + std::to_string(reference.size()) +
                                            " vs " + std::to_string(other.size()));
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < other.size(); ++i) index.emplace(other.ids[i], i);
  EmbeddingSet out;
  out.ids = reference.ids;
  out.matrix = Matrix(reference.size(), other.dim());
  std::vector<std::size_t> perm(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const auto it = index.find(reference.ids[i]);
    if (it == index.end()) throw Error(ErrorKind::RowMismatch, "id '" + reference.ids[i] + "' missing");
    perm[i] = it->second;
    std::copy(other.row(it->second).begin(), other.row(it->second).end(), out.matrix.row(i).begin());
  }
  auto permute = [&](const std::optional<std::vector<std::string>>& col) {
    std::optional<std::vector<std::string>> res;
    if (col) {
      res.emplace(perm.size());
      for (std::size_t i = 0; i < perm.size(); ++i) (*res)[i] = (*col)[perm[i]];
    }
    return res;
  };
  out.ground_truth = permute(other.ground_truth);
  out.predicted = permute(other.predicted);
  if (other.attributes) {
    AttributeTable t;
    t.concepts = other.attributes->concepts;
    const std::size_t k = t.concepts.size();
    t.cells.resize(perm.size() * k);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      std::copy_n(other.attributes->cells.begin() + static_cast<std::ptrdiff_t>(perm[i] * k), k,
                  t.cells.begin() + static_cast<std::ptrdiff_t>(i * k));
    }
    out.attributes = std::move(t);
  }
  return out;
}

namespace {

std::unordered_map<std::string, std::size_t> id_index(const EmbeddingSet& e) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < e.size(); ++i) index.emplace(e.ids[i], i);
  return index;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

}  // namespace

EmbeddingSet load_embeddings_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read_file(path);
  const std::string src = path.string();
  if (t.header.size() < 2 || t.header[0] != "id") {
    throw Error(ErrorKind::FormatError, src + ": header must be id,d0,...,d{p-1}");
  }
  const std::size_t p = t.header.size() - 1;
  for (std::size_t j = 0; j < p; ++j) {
    if (t.header[j + 1] != "d" + std::to_string(j)) {
      throw Error(ErrorKind::FormatError, src + ": expected column d" + std::to_string(j) + ", found '" +
                                              t.header[j + 1] + "'");
    }
  }
  EmbeddingSet e;
  e.matrix = Matrix(t.rows.size(), p);
  e.ids.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    e.ids.push_back(row[0]);
    const std::string ctx = src + ":" + std::to_string(t.lines[r]);
    for (std::size_t j = 0; j < p; ++j) e.matrix(r, j) = csv::parse_double(row[j + 1], ctx);
  }
  e.validate();
  return e;
}

void save_embeddings_csv(const EmbeddingSet& e, const std::filesystem::path& path) {
  auto out = open_out(path);
  csv::Record header{"id"};
  for (std::size_t j = 0; j < e.dim(); ++j) header.push_back("d" + std::to_string(j));
  csv::write_record(out, header);
  for (std::size_t r = 0; r < e.size(); ++r) {
    csv::Record rec{e.ids[r]};
    for (double v : e.row(r)) rec.push_back(csv::format_double(v));
    csv::write_record(out, rec);
  }
}

void attach_labels_csv(EmbeddingSet& e, const std::filesystem::path& path) {
  const csv::Table t = csv::read_file(path);
  const std::string src = path.string();
  const std::size_t id_col = t.column("id");
  const std::size_t gt_col = t.column("ground_truth");
  const std::size_t pred_col = t.column("predicted");
  if (id_col == std::string::npos || gt_col == std::string::npos) {
    throw Error(ErrorKind::FormatError, src + ": header must be id,ground_truth[,predicted]");
  }
  const auto index = id_index(e);
  std::vector<std::string> gt(e.size());
  std::vector<std::string> pred(e.size());
  std::vector<bool> covered(e.size(), false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto it = index.find(t.rows[r][id_col]);
    if (it == index.end()) {
      throw Error(ErrorKind::RowMismatch, src + ":" + std::to_string(t.lines[r]) + ": unknown id '" +
                                              t.rows[r][id_col] + "'");
    }
    covered[it->second] = true;
    gt[it->second] = t.rows[r][gt_col];
    if (pred_col != std::string::npos) {
      if (t.rows[r][pred_col].empty()) {
        throw Error(ErrorKind::FormatError, src + ":" + std::to_string(t.lines[r]) + ": empty predicted label");
      }
      pred[it->second] = t.rows[r][pred_col];
    }
  }
  for (std::size_t i = 0; i < covered.size(); ++i) {
    if (!covered[i]) throw Error(ErrorKind::RowMismatch, src + ": no label for id '" + e.ids[i] + "'");
  }
  e.ground_truth = std::move(gt);
  if (pred_col != std::string::npos) e.predicted = std::move(pred);
}

void save_labels_csv(const EmbeddingSet& e, const std::filesystem::path& path) {
  if (!e.ground_truth) throw Error(ErrorKind::InvalidArgument, "no labels to save");
  auto out = open_out(path);
  csv::Record header{"id", "ground_truth"};
  if (e.predicted) header.push_back("predicted");
  csv::write_record(out, header);
  for (std::size_t r = 0; r < e.size(); ++r) {
    csv::Record rec{e.ids[r], (*e.ground_truth)[r]};
    if (e.predicted) rec.push_back((*e.predicted)[r]);
    csv::write_record(out, rec);
  }
}

void attach_attributes_csv(EmbeddingSet& e, const std::filesystem::path& path) {
  const csv::Table t = csv::read_file(path);
  const std::string src = path.string();
  if (t.header.empty() || t.header[0] != "id") {
    throw Error(ErrorKind::FormatError, src + ": header must be id,<concept>...");
  }
  AttributeTable table;
  table.concepts.assign(t.header.begin() + 1, t.header.end());
  const std::size_t k = table.concepts.size();
  table.cells.assign(e.size() * k, 0);
  const auto index = id_index(e);
  std::vector<bool> covered(e.size(), false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto it = index.find(t.rows[r][0]);
    const std::string ctx = src + ":" + std::to_string(t.lines[r]);
    if (it == index.end()) throw Error(ErrorKind::RowMismatch, ctx + ": unknown id '" + t.rows[r][0] + "'");
    covered[it->second] = true;
    for (std::size_t c = 0; c < k; ++c) {
      const std::string& cell = t.rows[r][c + 1];
      if (cell != "0" && cell != "1") throw Error(ErrorKind::FormatError, ctx + ": attribute cell must be 0 or 1");
      table.cells[it->second * k + c] = cell == "1" ? 1 : 0;
    }
  }
  for (std::size_t i = 0; i < covered.size(); ++i) {
    if (!covered[i]) throw Error(ErrorKind::RowMismatch, src + ": no attributes for id '" + e.ids[i] + "'");
  }
  e.attributes = std::move(table);
}

void save_attributes_csv(const EmbeddingSet& e, const std::filesystem::path& path) {
  if (!e.attributes) throw Error(ErrorKind::InvalidArgument, "no attributes to save");
  auto out = open_out(path);
  csv::Record header{"id"};
  header.insert(header.end(), e.attributes->concepts.begin(), e.attributes->concepts.end());
  csv::write_record(out, header);
  const std::size_t k = e.attributes->concepts.size();
  for (std::size_t r = 0; r < e.size(); ++r) {
    csv::Record rec{e.ids[r]};
    for (std::size_t c = 0; c < k; ++c) rec.push_back(e.attributes->has(r, c) ? "1" : "0");
    csv::write_record(out, rec);
  }
}

}  // namespace conspec
