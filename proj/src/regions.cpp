#include "conspec/regions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "conspec/csv.hpp"
#include "conspec/error.hpp"
#include "conspec/simd.hpp"

namespace conspec {

namespace {

using nlohmann::json;

const std::vector<std::string>& predicted_of(const EmbeddingSet& e) {
  if (!e.predicted) throw Error(ErrorKind::InvalidArgument, "embedding set has no predicted labels");
  return *e.predicted;
}

const std::vector<std::string>& ground_truth_of(const EmbeddingSet& e) {
  if (!e.ground_truth) throw Error(ErrorKind::InvalidArgument, "embedding set has no ground-truth labels");
  return *e.ground_truth;
}

BoxRegion class_hull(const EmbeddingSet& e, const RowSelection& rows, const ClassLabel& c, Provenance p) {
  if (rows.empty()) {
    throw Error(ErrorKind::EmptyClassSelection, "no rows selected for class '" + c.name + "' (" + p.str() + ")");
  }
  BoxRegion box = hull(e, rows);
  box.provenance = std::move(p);
  box.cls = c.name;
  return box;
}

}  // namespace

std::string Provenance::str() const {
  switch (kind) {
    case Kind::A1:
      return "A1";
    case Kind::A2:
      return "A2";
    case Kind::A3:
      return "A3:" + cell;
    case Kind::GammaSigma:
      return "gamma:" + csv::format_double(gamma);
  }
  return {};
}

Provenance Provenance::parse(const std::string& text) {
  Provenance p;
  if (text == "A1") {
    p.kind = Kind::A1;
  } else if (text == "A2") {
    p.kind = Kind::A2;
  } else if (text.rfind("A3:", 0) == 0) {
    p.kind = Kind::A3;
    p.cell = text.substr(3);
  } else if (text.rfind("gamma:", 0) == 0) {
    p.kind = Kind::GammaSigma;
    p.gamma = csv::parse_double(text.substr(6), "region provenance");
  } else {
    throw Error(ErrorKind::FormatError, "unknown region provenance '" + text + "'");
  }
  return p;
}

bool BoxRegion::contains(std::span<const double> x, double tol) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
  }
  return true;
}

bool BoxRegion::subset_of(const BoxRegion& other) const {
  if (dim() != other.dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (lower[i] < other.lower[i] || upper[i] > other.upper[i]) return false;
  }
  return true;
}

Vector BoxRegion::center() const {
  Vector c(dim());
  for (std::size_t i = 0; i < dim(); ++i) c[i] = lower[i] + 0.5 * (upper[i] - lower[i]);
  return c;
}

BoxRegion hull(const EmbeddingSet& e, const RowSelection& rows) {
  if (rows.empty()) throw Error(ErrorKind::EmptySelection, "hull of zero rows");
  BoxRegion box;
  box.lower.assign(e.dim(), std::numeric_limits<double>::infinity());
  box.upper.assign(e.dim(), -std::numeric_limits<double>::infinity());
  for (std::size_t r : rows) {
    if (r >= e.size()) throw Error(ErrorKind::InvalidArgument, "row index out of range");
    simd::minmax_update(e.row(r), box.lower, box.upper);
  }
  return box;
}

BoxRegion region_a1(const EmbeddingSet& e, const ClassLabel& c) {
  predicted_of(e);
  return class_hull(e, e.rows_where_predicted(c.name), c, {Provenance::Kind::A1, {}, 0});
}

BoxRegion region_a2(const EmbeddingSet& e, const ClassLabel& c) {
  predicted_of(e);
  ground_truth_of(e);
  return class_hull(e, e.rows_where_correct(c.name), c, {Provenance::Kind::A2, {}, 0});
}

std::vector<BoxRegion> region_a3(const EmbeddingSet& e, const ClassLabel& c, const RegionPartition& part) {
  predicted_of(e);
  const RowSelection rows = e.rows_where_predicted(c.name);
  if (rows.empty()) throw Error(ErrorKind::EmptyClassSelection, "no rows predicted as '" + c.name + "'");
  std::map<std::string, RowSelection> cells;
  for (std::size_t r : rows) {
    const auto it = part.assignment.find(e.ids[r]);
    if (it == part.assignment.end()) {
      throw Error(ErrorKind::UncoveredRow, "row '" + e.ids[r] + "' has no partition cell");
    }
    cells[it->second].push_back(r);
  }
  std::vector<BoxRegion> out;
  for (const auto& [cell, members] : cells) {
    out.push_back(class_hull(e, members, c, {Provenance::Kind::A3, cell, 0}));
  }
  return out;
}

BoxRegion region_gamma(const EmbeddingSet& e, const ClassLabel& c, double gamma) {
  if (!(gamma > 0) || !std::isfinite(gamma)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
  ground_truth_of(e);
  const RowSelection rows = e.rows_where_ground_truth(c.name);
  if (rows.empty()) throw Error(ErrorKind::EmptyClassSelection, "no rows labeled '" + c.name + "'");
  const ColumnStats s = column_stats(e, rows);
  BoxRegion box;
  box.lower.resize(e.dim());
  box.upper.resize(e.dim());
  for (std::size_t i = 0; i < e.dim(); ++i) {
    box.lower[i] = s.mean[i] - gamma * s.std[i];
    box.upper[i] = s.mean[i] + gamma * s.std[i];
  }
  box.provenance = {Provenance::Kind::GammaSigma, {}, gamma};
  box.cls = c.name;
  return box;
}

RegionPartition surrogate_partition(const EmbeddingSet& e, const RowSelection& rows, std::size_t k) {
  if (rows.empty()) throw Error(ErrorKind::EmptySelection, "surrogate partition of zero rows");
  const ColumnStats s = column_stats(e, rows);
  std::vector<std::size_t> order(e.dim());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.std[a] > s.std[b]; });
  order.resize(std::min(k, order.size()));
  RegionPartition part;
  for (std::size_t r : rows) {
    std::string cell;
    for (std::size_t i : order) cell += e.matrix(r, i) >= s.mean[i] ? '1' : '0';
    part.assignment[e.ids[r]] = cell;
  }
  return part;
}

RegionPartition load_partition_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read_file(path);
  if (t.header.size() != 2 || t.header[0] != "id" || t.header[1] != "cell") {
    throw Error(ErrorKind::FormatError, path.string() + ": header must be id,cell");
  }
  RegionPartition part;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (!part.assignment.emplace(t.rows[r][0], t.rows[r][1]).second) {
      throw Error(ErrorKind::FormatError,
                  path.string() + ":" + std::to_string(t.lines[r]) + ": duplicate id '" + t.rows[r][0] + "'");
    }
  }
  return part;
}

void save_partition_csv(const RegionPartition& part, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  csv::write_record(out, {"id", "cell"});
  for (const auto& [id, cell] : part.assignment) csv::write_record(out, {id, cell});
}

void save_regions_json(const std::vector<BoxRegion>& regions, const std::filesystem::path& path) {
  json arr = json::array();
  for (const auto& r : regions) {
    arr.push_back({{"provenance", r.provenance.str()}, {"class", r.cls}, {"lower", r.lower}, {"upper", r.upper}});
  }
  csv::write_text_file(path, arr.dump(1) + "\n");
}

std::vector<BoxRegion> load_regions_json(const std::filesystem::path& path) {
  const std::string src = path.string();
  json arr;
  try {
    arr = json::parse(csv::read_text_file(path));
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::FormatError, src + ": " + ex.what());
  }
  if (!arr.is_array()) throw Error(ErrorKind::FormatError, src + ": expected a JSON array");
  std::vector<BoxRegion> out;
  for (const auto& j : arr) {
    BoxRegion r;
    try {
      r.provenance = Provenance::parse(j.at("provenance").get<std::string>());
      r.cls = j.at("class").get<std::string>();
      r.lower = j.at("lower").get<Vector>();
      r.upper = j.at("upper").get<Vector>();
    } catch (const json::exception& ex) {
      throw Error(ErrorKind::FormatError, src + ": " + ex.what());
    }
    if (r.lower.size() != r.upper.size() || r.lower.empty()) {
      throw Error(ErrorKind::FormatError, src + ": lower and upper must be non-empty and equally long");
    }
    for (std::size_t i = 0; i < r.dim(); ++i) {
      if (!std::isfinite(r.lower[i]) || !std::isfinite(r.upper[i]) || r.lower[i] > r.upper[i]) {
        throw Error(ErrorKind::FormatError, src + ": invalid bound at dim " + std::to_string(i));
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace conspec
