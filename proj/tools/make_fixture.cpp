// Writes the synthetic 16-dim "mini-RIVAL" project used by the end-to-end
// tests: two embedding spaces related by a near-identity affine map, caption
// embeddings for a template subset, a linear head, and planted specs.
#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "conspec/csv.hpp"
#include "conspec/directions.hpp"
#include "conspec/embedding.hpp"
#include "conspec/rep_maps.hpp"
#include "conspec/verifier.hpp"

namespace {

using conspec::Matrix;
using conspec::Vector;

const std::vector<std::string> kConcepts{"wheels", "metallic", "long", "text", "wings", "feathers"};
const std::vector<std::string> kClasses{"truck", "car", "plane", "bird"};

// Presence probability of each concept per class.
const double kProfile[4][6] = {
    {1.0, 0.9, 0.9, 0.9, 0.0, 0.1},  // truck
    {1.0, 0.9, 0.1, 0.1, 0.0, 0.0},  // car
    {0.1, 0.9, 0.9, 0.1, 1.0, 0.0},  // plane
    {0.0, 0.0, 0.1, 0.1, 1.0, 0.9},  // bird
};

constexpr std::size_t kDim = 16;
constexpr double kConceptScale = 1.5;
constexpr double kClassScale = 2.0;
constexpr double kNoise = 0.1;

Matrix invert(Matrix a) {
  const std::size_t n = a.rows();
  Matrix inv = Matrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    }
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(a(c, k), a(piv, k));
      std::swap(inv(c, k), inv(piv, k));
    }
    const double d = a(c, c);
    for (std::size_t k = 0; k < n; ++k) {
      a(c, k) /= d;
      inv(c, k) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      for (std::size_t k = 0; k < n; ++k) {
        a(r, k) -= f * a(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

struct Split {
  conspec::EmbeddingSet vision, vlm;
};

Split make_split(const std::string& prefix, std::size_t per_class, const Matrix& p, const Vector& t,
                 const conspec::LinearHead& head, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Split s;
  s.vision.ground_truth.emplace();
  s.vision.predicted.emplace();
  s.vision.attributes.emplace();
  s.vision.attributes->concepts = kConcepts;
  std::size_t row = 0;
  for (std::size_t round = 0; round < per_class; ++round) {
    for (std::size_t c = 0; c < kClasses.size(); ++c) {
      Vector g(kDim, 0.0);
      for (std::size_t k = 0; k < kConcepts.size(); ++k) {
        const bool present = unif(rng) < kProfile[c][k];
        s.vision.attributes->cells.push_back(present ? 1 : 0);
        if (present) g[k] += kConceptScale;
      }
      g[kConcepts.size() + c] += kClassScale;
      for (double& v : g) v += kNoise * noise(rng);
      Vector f = conspec::matvec(p, g);
      for (std::size_t i = 0; i < kDim; ++i) f[i] += t[i] + 0.01 * noise(rng);

      char id[32];
      std::snprintf(id, sizeof id, "%s%04zu", prefix.c_str(), row++);
      s.vision.ids.push_back(id);
      s.vision.matrix.push_row(f);
      s.vlm.matrix.push_row(g);

      const Vector scores = head.scores(f);
      std::size_t best = 0;
      for (std::size_t k = 1; k < scores.size(); ++k) {
        if (scores[k] > scores[best]) best = k;
      }
      s.vision.predicted->push_back(kClasses[best]);
      // A few ground-truth labels are wrong, so A2 is a strict subset of A1.
      std::string truth = kClasses[c];
      if (unif(rng) < 0.05) truth = kClasses[(c + 1 + static_cast<std::size_t>(unif(rng) * 3)) % kClasses.size()];
      s.vision.ground_truth->push_back(truth);
    }
  }
  s.vlm.ids = s.vision.ids;
  s.vlm.ground_truth = s.vision.ground_truth;
  s.vlm.predicted = s.vision.predicted;
  s.vlm.attributes = s.vision.attributes;
  return s;
}

void write_split(const Split& s, const std::filesystem::path& dir, const std::string& name) {
  conspec::save_embeddings_csv(s.vision, dir / (name + "_vision.csv"));
  conspec::save_embeddings_csv(s.vlm, dir / (name + "_vlm.csv"));
  conspec::save_labels_csv(s.vision, dir / (name + "_labels.csv"));
  conspec::save_attributes_csv(s.vision, dir / (name + "_attributes.csv"));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixture <output-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.8, 1.2);

  // Vision space: f = P g + t with P a scaled near-identity mixing.
  Matrix p = Matrix::identity(kDim);
  for (std::size_t i = 0; i < kDim; ++i) {
    for (std::size_t j = 0; j < kDim; ++j) p(i, j) += 0.05 * noise(rng);
  }
  for (std::size_t i = 0; i < kDim; ++i) {
    const double s = unif(rng);
    for (std::size_t j = 0; j < kDim; ++j) p(i, j) *= s;
  }
  Vector t(kDim);
  for (double& v : t) v = 0.5 * noise(rng);
  const Matrix m_star = invert(p);
  Vector d_star = conspec::matvec(m_star, t);
  for (double& v : d_star) v = -v;

  // Head reads the class coordinates of the VLM-space embedding.
  conspec::LinearHead head;
  head.classes = kClasses;
  head.a = Matrix(kClasses.size(), kDim);
  head.b.assign(kClasses.size(), 0.0);
  for (std::size_t c = 0; c < kClasses.size(); ++c) {
    const std::size_t coord = kConcepts.size() + c;
    for (std::size_t i = 0; i < kDim; ++i) head.a(c, i) = m_star(coord, i);
    head.b[c] = d_star[coord];
  }
  conspec::save_head_json(head, dir / "head.json");

  write_split(make_split("tr", 50, p, t, head, rng), dir, "train");
  write_split(make_split("te", 30, p, t, head, rng), dir, "test");

  const std::vector<std::size_t> keep{0, 1, 2, 3, 4, 5, 6, 7};
  const auto templates = conspec::CaptionTemplateSet::defaults().select(keep);
  {
    std::string text;
    for (const auto& tpl : templates.templates()) text += tpl + "\n";
    conspec::csv::write_text_file(dir / "templates.txt", text);
  }

  conspec::TextEmbedder captions;
  auto add_name = [&](const std::string& name, std::size_t coord) {
    for (const auto& caption : conspec::expand_captions(templates, name)) {
      Vector e(kDim, 0.0);
      e[coord] = 1.0 + 0.1 * noise(rng);
      for (double& v : e) v += 0.05 * noise(rng);
      captions.insert(caption, e);
    }
  };
  for (std::size_t k = 0; k < kConcepts.size(); ++k) add_name(kConcepts[k], k);
  for (std::size_t c = 0; c < kClasses.size(); ++c) add_name(kClasses[c], kConcepts.size() + c);
  captions.save_csv(dir / "captions.csv");

  nlohmann::ordered_json manifest;
  manifest["dim"] = kDim;
  manifest["vlm_dim"] = kDim;
  manifest["class_names"] = kClasses;
  manifest["concept_names"] = kConcepts;
  manifest["files"] = {{"embeddings", "train_vision.csv"}, {"vlm_embeddings", "train_vlm.csv"},
                       {"labels", "train_labels.csv"},     {"attributes", "train_attributes.csv"},
                       {"captions", "captions.csv"},       {"head", "head.json"},
                       {"templates", "templates.txt"}};
  manifest["splits"] = {{"test",
                         {{"embeddings", "test_vision.csv"},
                          {"vlm_embeddings", "test_vlm.csv"},
                          {"labels", "test_labels.csv"},
                          {"attributes", "test_attributes.csv"}}}};
  conspec::csv::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

  conspec::csv::write_text_file(dir / "planted_true.spec",
                                "# wings never appear on trucks\npredict(truck) => gt(wheels, wings)\n");
  conspec::csv::write_text_file(dir / "planted_false.spec",
                                "# trucks carry both, in either order\npredict(truck) => gt(metallic, long)\n");
  std::cout << "wrote fixture to " << dir << '\n';
  return 0;
}
