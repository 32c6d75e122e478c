#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "../support/check.hpp"
#include "../support/gen.hpp"
#include "conspec/cli.hpp"
#include "conspec/csv.hpp"
#include "conspec/rep_maps.hpp"
#include "conspec/verifier.hpp"

using namespace conspec;

namespace {

const std::filesystem::path kFixture{CONSPEC_FIXTURE_DIR};

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string manifest() { return (kFixture / "manifest.json").string(); }

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"verify", "--manifest", manifest()}).code == 2);
  CHECK(run({"regions", "--manifest", manifest(), "--class", "truck", "--out", "x", "--region", "A9"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("domain errors exit with 1") {
  testutil::TempDir dir;
  const auto missing = run({"directions", "--manifest", (dir / "none.json").string(), "--out", (dir / "d.csv").string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("error: ") == 0);
  const auto bad_class = run({"regions", "--manifest", manifest(), "--class", "bus", "--out", (dir / "r.json").string()});
  CHECK(bad_class.code == 1);
  const auto bad_spec = run({"verify", "--manifest", manifest(), "--class", "truck", "--spec", "gt(wheels,",
                             "--out", (dir / "r.jsonl").string()});
  CHECK(bad_spec.code == 1);
  CHECK(bad_spec.err.find("SyntaxError") != std::string::npos);
}

TEST_CASE("fit-map recovers an exact alignment") {
  testutil::TempDir dir;
  testgen::Rng rng(91);
  EmbeddingSet f, g;
  for (int i = 0; i < 50; ++i) {
    f.ids.push_back("x" + std::to_string(i));
    f.matrix.push_row(rng.normal_vector(3));
    Vector z = rng.normal_vector(0);
    for (double v : f.matrix.row(i)) z.push_back(2 * v + 1);
    g.matrix.push_row(z);
  }
  g.ids = f.ids;
  save_embeddings_csv(f, dir / "f.csv");
  save_embeddings_csv(g, dir / "g.csv");
  csv::write_text_file(dir / "m.json", R"({"dim": 3, "vlm_dim": 3, "class_names": ["a"], "concept_names": ["x"],
    "files": {"embeddings": "f.csv", "vlm_embeddings": "g.csv"}})");
  const auto r = run({"fit-map", "--manifest", (dir / "m.json").string(), "--out", (dir / "map.json").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("mse ") == 0);
  const auto m = load_affine_map_json(dir / "map.json");
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(m.m(i, j) - (i == j ? 2.0 : 0.0)) <= 1e-6);
    CHECK(std::abs(m.d[i] - 1.0) <= 1e-6);
  }
}

TEST_CASE("pipeline on the shipped fixture") {
  testutil::TempDir dir;
  const auto p = [&](const char* name) { return (dir / name).string(); };
  REQUIRE(run({"fit-map", "--manifest", manifest(), "--out", p("map.json")}).code == 0);
  REQUIRE(run({"directions", "--manifest", manifest(), "--out", p("dirs.csv")}).code == 0);
  CHECK(load_directions_csv(p("dirs.csv")).classes.size() == 4);

  REQUIRE(run({"regions", "--manifest", manifest(), "--class", "truck", "--region", "A1", "--out", p("a1.json")}).code == 0);
  REQUIRE(run({"regions", "--manifest", manifest(), "--class", "truck", "--region", "A2", "--out", p("a2.json")}).code == 0);
  const auto a1 = load_regions_json(p("a1.json"));
  const auto a2 = load_regions_json(p("a2.json"));
  REQUIRE(a1.size() == 1);
  REQUIRE(a2.size() == 1);
  CHECK(a2[0].subset_of(a1[0]));
  REQUIRE(run({"regions", "--manifest", manifest(), "--class", "truck", "--region", "gamma", "--out", p("g.json")}).code == 0);
  const auto gam = load_regions_json(p("g.json"));
  REQUIRE(gam.size() == 3);
  CHECK(gam[0].subset_of(gam[1]));
  CHECK(gam[1].subset_of(gam[2]));
  REQUIRE(run({"regions", "--manifest", manifest(), "--class", "truck", "--region", "A3", "--out", p("a3.json"),
               "--partition-out", p("part.csv")}).code == 0);
  for (const auto& b : load_regions_json(p("a3.json"))) CHECK(b.subset_of(a1[0]));

  REQUIRE(run({"elicit", "--manifest", manifest(), "--class", "truck", "--out", p("elicited.spec")}).code == 0);
  CHECK(lines_of(csv::read_text_file(p("elicited.spec"))).size() == 8);

  const auto val = run({"validate", "--manifest", manifest(), "--class", "truck", "--directions", p("dirs.csv"),
                        "--out", p("report.csv"), "--heatmap", p("heat.json"), "--significant", p("sig.spec")});
  REQUIRE(val.code == 0);
  CHECK(lines_of(csv::read_text_file(p("report.csv"))).size() == 9);
  CHECK(nlohmann::json::parse(csv::read_text_file(p("heat.json"))).size() == 1);

  const auto specs = {(kFixture / "planted_true.spec").string(), (kFixture / "planted_false.spec").string()};
  std::vector<std::string> args{"verify", "--manifest", manifest(), "--class", "truck", "--region", "A2",
                                "--map", p("map.json"), "--directions", p("dirs.csv"), "--deterministic",
                                "--out", p("a2.jsonl"), "--plot", p("plot.csv")};
  for (const auto& s : specs) {
    args.push_back("--specs");
    args.push_back(s);
  }
  const auto v2 = run(args);
  REQUIRE(v2.code == 0);
  const auto recs = load_report_jsonl(p("a2.jsonl"));
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].outcome == "Proved");
  CHECK(recs[1].outcome == "Counterexample");
  CHECK(v2.out.find("Counterexample") != std::string::npos);
  CHECK(lines_of(csv::read_text_file(p("plot.csv"))).size() == 3);

  // Byte-identical reruns, including with more workers.
  const auto first = csv::read_text_file(p("a2.jsonl"));
  args.push_back("--jobs");
  args.push_back("3");
  REQUIRE(run(args).code == 0);
  CHECK(csv::read_text_file(p("a2.jsonl")) == first);

  // A1 contains A2, so no spec may get a smaller violation there.
  for (auto& a : args) {
    if (a == "A2") a = "A1";
    if (a == p("a2.jsonl")) a = p("a1.jsonl");
  }
  REQUIRE(run(args).code == 0);
  const auto recs1 = load_report_jsonl(p("a1.jsonl"));
  REQUIRE(recs1.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(recs[i].epsilon <= recs1[i].epsilon + 1e-9);

  const auto rep = run({"report", "--in", p("a1.jsonl"), "--in", p("a2.jsonl")});
  REQUIRE(rep.code == 0);
  CHECK(rep.out.find("A1") != std::string::npos);

  const auto audit = run({"audit", "--manifest", manifest(), "--class", "truck", "--region", "A2", "--map", p("map.json"),
                          "--directions", p("dirs.csv"), "--spec", "predict(truck) => gt(metallic, long)",
                          "--dims", "2,3", "--step", "0.02", "--base", "counterexample"});
  CHECK(audit.code == 0);
}

TEST_CASE("non-deterministic runs carry timing fields") {
  testutil::TempDir dir;
  const auto out = (dir / "r.jsonl").string();
  REQUIRE(run({"verify", "--manifest", manifest(), "--class", "truck", "--spec", "predict(truck) => gt(wheels, wings)",
               "--out", out})
              .code == 0);
  const auto j = nlohmann::json::parse(lines_of(csv::read_text_file(out)).at(0));
  CHECK(j.contains("solve_ms"));
  CHECK(j.contains("timestamp"));
}
