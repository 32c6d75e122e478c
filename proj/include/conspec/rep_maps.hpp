#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "conspec/directions.hpp"
#include "conspec/embedding.hpp"
#include "conspec/lang.hpp"
#include "conspec/linalg.hpp"

namespace conspec {

// z = M w + d, from the vision space (p_f) into the VLM space (p_g).
struct AffineMap {
  Matrix m;  // p_g x p_f
  Vector d;  // p_g

  std::size_t p_f() const noexcept { return m.cols(); }
  std::size_t p_g() const noexcept { return m.rows(); }
};

Vector apply_map(const AffineMap& map, std::span<const double> w);

// affine_map.json: {"p_f", "p_g", "M": row-major, "d"}
void save_affine_map_json(const AffineMap& map, const std::filesystem::path& path);
AffineMap load_affine_map_json(const std::filesystem::path& path);

struct FitOptions {
  double ridge = 1e-8;
  // Momentum SGD on the mean squared error, PyTorch update convention.
  bool gradient_descent = false;
  bool warm_start = false;  // start SGD from the closed-form solution
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
};

// Least-squares fit of G ~ M F + d. Rows are matched by id.
AffineMap fit_affine_map(const EmbeddingSet& f, const EmbeddingSet& g, const FitOptions& options = {});

struct MapQuality {
  double mse = 0;  // mean over rows of |Mw + d - g|^2
  double r2 = 0;   // pooled over all entries
};

MapQuality map_metrics(const AffineMap& map, const EmbeddingSet& f, const EmbeddingSet& g);

enum class RepMode {
  VlmOnly,          // cos(v, dir), v already in the VLM space
  ViaAffine,        // cos(M v + d, dir), v in the vision space
  HatOnEmbeddings,  // like ViaAffine when a map is set, like VlmOnly otherwise
};

struct RepMap {
  RepMode mode = RepMode::VlmOnly;
  std::map<std::string, Vector, std::less<>> directions;
  std::optional<AffineMap> map;

  static RepMap vlm_only(std::span<const ConceptDirection> dirs);
  static RepMap via_affine(std::span<const ConceptDirection> dirs, AffineMap map);
  static RepMap hat(std::span<const ConceptDirection> dirs, std::optional<AffineMap> map = std::nullopt);

  // Embedding as seen by the directions (mapped when the mode requires it).
  Vector project(std::span<const double> v) const;
};

double rep_value(const RepMap& r, std::string_view con, std::span<const double> v);
// Every concept of the map at once, sharing the projection.
lang::RepValues rep_values(const RepMap& r, std::span<const double> v);

struct FaithfulnessViolation {
  enum class Kind { Distance, ClassDivergence };
  Kind kind = Kind::Distance;
  std::size_t row = 0;
  std::string id;
  double distance = 0;
  std::string mapped_class;  // ClassDivergence only
  std::string target_class;
};

// Rows where |Mw + d - g| > tol, then rows where the zero-shot label of the
// mapped embedding differs from that of g. Skips the label check when fewer
// than two class directions are given.
std::vector<FaithfulnessViolation> check_faithfulness(const AffineMap& map, const EmbeddingSet& f,
                                                      const EmbeddingSet& g,
                                                      std::span<const ConceptDirection> class_dirs, double tol);

}  // namespace conspec
