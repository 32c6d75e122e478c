#include "conspec/rep_maps.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "conspec/csv.hpp"
#include "conspec/error.hpp"
#include "conspec/simd.hpp"

namespace conspec {

namespace {

using nlohmann::json;

Vector column_means(const Matrix& x) {
  Vector mean(x.cols(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) simd::axpy(1.0, x.row(r), mean);
  const double inv = 1.0 / static_cast<double>(x.rows());
  for (double& v : mean) v *= inv;
  return mean;
}

AffineMap closed_form(const Matrix& f, const Matrix& g, double ridge) {
  const std::size_t n = f.rows(), pf = f.cols(), pg = g.cols();
  if (n < pf + 1) {
    throw Error(ErrorKind::SingularSystem, std::to_string(n) + " rows cannot determine an affine map from dim " +
                                               std::to_string(pf));
  }
  const Vector mf = column_means(f);
  const Vector mg = column_means(g);

  Matrix gram(pf, pf);
  Matrix cross(pf, pg);
  Vector fc(pf), gc(pg);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < pf; ++i) fc[i] = f(r, i) - mf[i];
    for (std::size_t j = 0; j < pg; ++j) gc[j] = g(r, j) - mg[j];
    for (std::size_t i = 0; i < pf; ++i) {
      simd::axpy(fc[i], fc, gram.row(i));
      simd::axpy(fc[i], gc, cross.row(i));
    }
  }

  double max_diag = 0;
  for (std::size_t i = 0; i < pf; ++i) max_diag = std::max(max_diag, gram(i, i));
  const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * max_diag * static_cast<double>(pf);
  const double threshold = std::max(0.5 * ridge, rounding);
  if (!cholesky_solve(gram, ridge, threshold, cross)) {
    throw Error(ErrorKind::SingularSystem, "normal equations are rank deficient beyond the ridge term");
  }

  AffineMap out{Matrix(pg, pf), Vector(pg)};
  for (std::size_t i = 0; i < pf; ++i) {
    for (std::size_t j = 0; j < pg; ++j) out.m(j, i) = cross(i, j);
  }
  const Vector mapped_mean = matvec(out.m, mf);
  for (std::size_t j = 0; j < pg; ++j) out.d[j] = mg[j] - mapped_mean[j];
  return out;
}

void sgd(const Matrix& f, const Matrix& g, const FitOptions& o, AffineMap& map) {
  const std::size_t n = f.rows(), pf = f.cols(), pg = g.cols();
  if (o.batch_size == 0) throw Error(ErrorKind::InvalidArgument, "batch size must be positive");
  Matrix grad_m(pg, pf), buf_m(pg, pf);
  Vector grad_d(pg), buf_d(pg), resid(pg);
  bool first = true;
  for (std::size_t epoch = 0; epoch < o.epochs; ++epoch) {
    for (std::size_t start = 0; start < n; start += o.batch_size) {
      const std::size_t end = std::min(n, start + o.batch_size);
      const double scale = 2.0 / static_cast<double>((end - start) * pg);
      std::fill(grad_m.data().begin(), grad_m.data().end(), 0.0);
      std::fill(grad_d.begin(), grad_d.end(), 0.0);
      for (std::size_t r = start; r < end; ++r) {
        const Vector z = apply_map(map, f.row(r));
        for (std::size_t j = 0; j < pg; ++j) resid[j] = scale * (z[j] - g(r, j));
        for (std::size_t j = 0; j < pg; ++j) simd::axpy(resid[j], f.row(r), grad_m.row(j));
        simd::axpy(1.0, resid, grad_d);
      }
      simd::axpy(o.weight_decay, map.m.data(), grad_m.data());
      simd::axpy(o.weight_decay, map.d, grad_d);
      if (first) {
        buf_m = grad_m;
        buf_d = grad_d;
        first = false;
      } else {
        for (double& v : buf_m.data()) v *= o.momentum;
        for (double& v : buf_d) v *= o.momentum;
        simd::axpy(1.0, grad_m.data(), buf_m.data());
        simd::axpy(1.0, grad_d, buf_d);
      }
      simd::axpy(-o.learning_rate, buf_m.data(), map.m.data());
      simd::axpy(-o.learning_rate, buf_d, map.d);
    }
  }
  if (!all_finite(map.m.data()) || !all_finite(map.d)) {
    throw Error(ErrorKind::NumericalBreakdown, "gradient descent diverged");
  }
}

std::vector<double> json_numbers(const json& j, const char* key, std::size_t expected, const std::string& src) {
  if (!j.contains(key) || !j[key].is_array()) throw Error(ErrorKind::FormatError, src + ": missing array '" + key + "'");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw Error(ErrorKind::FormatError, src + ": non-numeric entry in '" + key + "'");
    out.push_back(v.get<double>());
  }
  if (out.size() != expected) {
    throw Error(ErrorKind::FormatError, src + ": '" + key + "' has " + std::to_string(out.size()) +
                                            " entries, expected " + std::to_string(expected));
  }
  if (!all_finite(out)) throw Error(ErrorKind::FormatError, src + ": non-finite entry in '" + key + "'");
  return out;
}

}  // namespace

Vector apply_map(const AffineMap& map, std::span<const double> w) {
  if (w.size() != map.p_f()) {
    throw Error(ErrorKind::DimMismatch, "map expects dim " + std::to_string(map.p_f()) + ", got " +
                                            std::to_string(w.size()));
  }
  Vector z = matvec(map.m, w);
  simd::axpy(1.0, map.d, z);
  return z;
}

void save_affine_map_json(const AffineMap& map, const std::filesystem::path& path) {
  json j;
  j["p_f"] = map.p_f();
  j["p_g"] = map.p_g();
  j["M"] = map.m.data();
  j["d"] = map.d;
  csv::write_text_file(path, j.dump() + "\n");
}

AffineMap load_affine_map_json(const std::filesystem::path& path) {
  const std::string src = path.string();
  json j;
  try {
    j = json::parse(csv::read_text_file(path));
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::FormatError, src + ": " + ex.what());
  }
  if (!j.is_object() || !j.contains("p_f") || !j.contains("p_g") || !j["p_f"].is_number_unsigned() ||
      !j["p_g"].is_number_unsigned()) {
    throw Error(ErrorKind::FormatError, src + ": p_f and p_g must be non-negative integers");
  }
  const auto pf = j["p_f"].get<std::size_t>();
  const auto pg = j["p_g"].get<std::size_t>();
  if (pf == 0 || pg == 0) throw Error(ErrorKind::FormatError, src + ": zero dimension");
  AffineMap out;
  out.m = Matrix(pg, pf, json_numbers(j, "M", pf * pg, src));
  out.d = json_numbers(j, "d", pg, src);
  return out;
}

AffineMap fit_affine_map(const EmbeddingSet& f, const EmbeddingSet& g, const FitOptions& options) {
  const EmbeddingSet aligned = align_rows(f, g);
  if (f.size() == 0) throw Error(ErrorKind::EmptySelection, "no rows to fit");
  if (options.gradient_descent) {
    AffineMap map = options.warm_start ? closed_form(f.matrix, aligned.matrix, options.ridge)
                                       : AffineMap{Matrix(aligned.dim(), f.dim()), Vector(aligned.dim(), 0.0)};
    sgd(f.matrix, aligned.matrix, options, map);
    return map;
  }
  return closed_form(f.matrix, aligned.matrix, options.ridge);
}

MapQuality map_metrics(const AffineMap& map, const EmbeddingSet& f, const EmbeddingSet& g) {
  const EmbeddingSet aligned = align_rows(f, g);
  const std::size_t n = f.size();
  if (n == 0) throw Error(ErrorKind::EmptySelection, "no rows to score");
  if (aligned.dim() != map.p_g()) throw Error(ErrorKind::DimMismatch, "map output dim differs from target dim");
  const Vector mean = column_means(aligned.matrix);
  double ss_res = 0, ss_tot = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const Vector z = apply_map(map, f.row(r));
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double e = z[j] - aligned.matrix(r, j);
      const double t = aligned.matrix(r, j) - mean[j];
      ss_res += e * e;
      ss_tot += t * t;
    }
  }
  MapQuality q;
  q.mse = ss_res / static_cast<double>(n);
  if (ss_tot > 0) {
    q.r2 = 1.0 - ss_res / ss_tot;
  } else {
    q.r2 = ss_res == 0 ? 1.0 : -std::numeric_limits<double>::infinity();
  }
  return q;
}

namespace {

std::map<std::string, Vector, std::less<>> direction_table(std::span<const ConceptDirection> dirs) {
  std::map<std::string, Vector, std::less<>> out;
  for (const auto& d : dirs) out.insert_or_assign(d.name, d.direction);
  return out;
}

}  // namespace

RepMap RepMap::vlm_only(std::span<const ConceptDirection> dirs) {
  return {RepMode::VlmOnly, direction_table(dirs), std::nullopt};
}

RepMap RepMap::via_affine(std::span<const ConceptDirection> dirs, AffineMap map) {
  return {RepMode::ViaAffine, direction_table(dirs), std::move(map)};
}

RepMap RepMap::hat(std::span<const ConceptDirection> dirs, std::optional<AffineMap> map) {
  return {RepMode::HatOnEmbeddings, direction_table(dirs), std::move(map)};
}

Vector RepMap::project(std::span<const double> v) const {
  switch (mode) {
    case RepMode::VlmOnly:
      return Vector(v.begin(), v.end());
    case RepMode::ViaAffine:
      if (!map) throw Error(ErrorKind::InvalidArgument, "ViaAffine rep map has no affine map");
      return apply_map(*map, v);
    case RepMode::HatOnEmbeddings:
      return map ? apply_map(*map, v) : Vector(v.begin(), v.end());
  }
  return {};
}

double rep_value(const RepMap& r, std::string_view con, std::span<const double> v) {
  const auto it = r.directions.find(con);
  if (it == r.directions.end()) {
    throw Error(ErrorKind::UnknownConcept, "no direction for concept '" + std::string(con) + "'");
  }
  return cosine_similarity(r.project(v), it->second);
}

lang::RepValues rep_values(const RepMap& r, std::span<const double> v) {
  const Vector z = r.project(v);
  lang::RepValues out;
  for (const auto& [name, dir] : r.directions) out.emplace(name, cosine_similarity(z, dir));
  return out;
}

std::vector<FaithfulnessViolation> check_faithfulness(const AffineMap& map, const EmbeddingSet& f,
                                                      const EmbeddingSet& g,
                                                      std::span<const ConceptDirection> class_dirs, double tol) {
  const EmbeddingSet aligned = align_rows(f, g);
  std::vector<Vector> mapped;
  mapped.reserve(f.size());
  for (std::size_t r = 0; r < f.size(); ++r) mapped.push_back(apply_map(map, f.row(r)));

  std::vector<FaithfulnessViolation> out;
  for (std::size_t r = 0; r < f.size(); ++r) {
    const double dist = std::sqrt(simd::squared_distance(mapped[r], aligned.row(r)));
    if (dist > tol) {
      FaithfulnessViolation v;
      v.kind = FaithfulnessViolation::Kind::Distance;
      v.row = r;
      v.id = f.ids[r];
      v.distance = dist;
      out.push_back(std::move(v));
    }
  }
  if (class_dirs.size() < 2) return out;

  auto label = [&](std::span<const double> x) -> std::string {
    if (!(simd::squared_norm(x) > 0)) return {};
    return zero_shot_classify(x, class_dirs).name;
  };
  for (std::size_t r = 0; r < f.size(); ++r) {
    const std::string a = label(mapped[r]);
    const std::string b = label(aligned.row(r));
    if (a != b) {
      FaithfulnessViolation v;
      v.kind = FaithfulnessViolation::Kind::ClassDivergence;
      v.row = r;
      v.id = f.ids[r];
      v.distance = std::sqrt(simd::squared_distance(mapped[r], aligned.row(r)));
      v.mapped_class = a;
      v.target_class = b;
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace conspec
