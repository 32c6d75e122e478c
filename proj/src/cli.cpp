#include "conspec/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "conspec/csv.hpp"
#include "conspec/directions.hpp"
#include "conspec/error.hpp"
#include "conspec/lang.hpp"
#include "conspec/manifest.hpp"
#include "conspec/oracle.hpp"
#include "conspec/parallel.hpp"
#include "conspec/regions.hpp"
#include "conspec/rep_maps.hpp"
#include "conspec/stat_validate.hpp"
#include "conspec/verifier.hpp"

namespace conspec::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::size_t> parse_indices(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError(std::string("bad ") + what + " '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
  return out;
}

std::string fmt(double v) { return csv::format_double(v); }

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

CaptionTemplateSet templates_for(const Manifest& m, const std::string& subset) {
  CaptionTemplateSet all = m.templates.empty() ? CaptionTemplateSet::defaults() : CaptionTemplateSet::load(m.templates);
  if (subset.empty()) return all;
  const auto idx = parse_indices(subset, "template index");
  return all.select(idx);
}

DirectionTable directions_for(const Manifest& m, const std::string& path, const std::string& subset) {
  if (!path.empty()) return load_directions_csv(path);
  if (m.captions.empty()) throw Error(ErrorKind::InvalidArgument, "manifest lists no captions file; pass --directions");
  return build_directions(m.vocab, templates_for(m, subset), TextEmbedder::load_csv(m.captions));
}

AffineMap map_for(const Manifest& m, const std::string& path, const std::string& split) {
  if (!path.empty()) return load_affine_map_json(path);
  return fit_affine_map(m.load_split(split, Space::Vision), m.load_split(split, Space::Vlm));
}

LinearHead head_for(const Manifest& m, const std::string& path) {
  std::filesystem::path p = path.empty() ? m.head : std::filesystem::path(path);
  if (p.empty()) throw Error(ErrorKind::InvalidArgument, "no head file; pass --head or list files.head");
  LinearHead h = load_head_json(p);
  if (h.classes != m.vocab.classes()) {
    throw Error(ErrorKind::FormatError, p.string() + ": head classes differ from the manifest's class_names");
  }
  if (h.dim() != m.dim) throw Error(ErrorKind::DimMismatch, p.string() + ": head input dim differs from manifest dim");
  return h;
}

Space parse_space(const std::string& s) {
  if (s == "vision") return Space::Vision;
  if (s == "vlm") return Space::Vlm;
  throw UsageError("space must be vision or vlm");
}

struct RegionArgs {
  std::string method = "A1";
  std::string split = "train";
  std::string space;
  std::vector<double> gammas{0.25, 1.0, 2.0};
  std::string partition;
  std::string partition_out;
};

void add_region_options(CLI::App* sub, RegionArgs& r) {
  sub->add_option("--region", r.method, "A1, A2, A3 or gamma")->check(CLI::IsMember({"A1", "A2", "A3", "gamma"}));
  sub->add_option("--split", r.split, "split whose rows define the region");
  sub->add_option("--space", r.space, "vision or vlm (default: vlm for gamma, vision otherwise)");
  sub->add_option("--gamma", r.gammas, "gamma values for mu +- gamma*sigma boxes")->delimiter(',');
  sub->add_option("--partition", r.partition, "partition.csv for A3 (default: manifest, else surrogate)");
  sub->add_option("--partition-out", r.partition_out, "write the A3 partition used");
}

std::vector<BoxRegion> build_regions(const Manifest& m, const RegionArgs& r, const ClassLabel& c, Space space) {
  const EmbeddingSet e = m.load_split(r.split, space);
  if (r.method == "A1") return {region_a1(e, c)};
  if (r.method == "A2") return {region_a2(e, c)};
  if (r.method == "gamma") {
    std::vector<BoxRegion> out;
    for (double g : r.gammas) out.push_back(region_gamma(e, c, g));
    return out;
  }
  RegionPartition part;
  if (!r.partition.empty()) {
    part = load_partition_csv(r.partition);
  } else if (!m.partition.empty()) {
    part = load_partition_csv(m.partition);
  } else {
    if (!e.predicted) throw Error(ErrorKind::InvalidArgument, "split has no predicted labels");
    part = surrogate_partition(e, e.rows_where_predicted(c.name));
  }
  if (!r.partition_out.empty()) save_partition_csv(part, r.partition_out);
  return region_a3(e, c, part);
}

Space region_space(const RegionArgs& r) {
  if (!r.space.empty()) return parse_space(r.space);
  return r.method == "gamma" ? Space::Vlm : Space::Vision;
}

VerificationContext context_for(const Manifest& m, const std::string& path, const std::string& head_path,
                                const std::string& map_path, const std::string& dirs_path,
                                const std::string& template_subset, const std::string& map_split) {
  const DirectionTable dirs = directions_for(m, dirs_path, template_subset);
  DirectionMap concepts = direction_map(dirs.concepts);
  if (path == "vision") {
    return VerificationContext{VisionModel{head_for(m, head_path), map_for(m, map_path, map_split)},
                               std::move(concepts), {}};
  }
  ZeroShotModel zs;
  for (const auto& cls : m.vocab.classes()) {
    const auto it = std::find_if(dirs.classes.begin(), dirs.classes.end(),
                                 [&](const ConceptDirection& d) { return d.name == cls; });
    if (it == dirs.classes.end()) throw Error(ErrorKind::UnknownName, "no class direction for '" + cls + "'");
    zs.class_dirs.push_back(it->direction);
    zs.class_names.push_back(cls);
  }
  return VerificationContext{std::move(zs), std::move(concepts), {}};
}

std::vector<lang::SpecLine> specs_for(const Manifest& m, const std::vector<std::string>& files,
                                      const std::vector<std::string>& inline_specs) {
  std::vector<lang::SpecLine> out;
  for (const auto& f : files) {
    auto lines = lang::load_spec_file(f, m.vocab);
    out.insert(out.end(), lines.begin(), lines.end());
  }
  for (const auto& s : inline_specs) {
    out.push_back({0, s, lang::parse_spec(s, m.vocab)});
  }
  if (out.empty()) throw UsageError("no specifications given; use --specs or --spec");
  return out;
}

void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
    }
    out << line << '\n';
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Concept-based specification checking over embedding spaces", "conspec"};
  app.require_subcommand(1);

  std::string manifest_path;
  std::size_t jobs = default_jobs();
  bool deterministic = false;
  auto common = [&](CLI::App* sub, bool needs_manifest = true) {
    auto* opt = sub->add_option("--manifest", manifest_path, "project manifest (JSON)");
    if (needs_manifest) opt->required();
    sub->add_option("--jobs", jobs, "worker threads (default: CONSPEC_JOBS or 1)")->check(CLI::PositiveNumber);
    sub->add_flag("--deterministic", deterministic, "omit timestamps and timings");
  };

  std::string out_path, split = "train", cls, map_path, head_path, dirs_path, template_subset;
  std::string plot_path, heatmap_path, significant_path, filter_split = "train", mode = "vlm", path = "vision";
  std::string map_split = "train", validate_split = "test";
  double threshold = kRelevanceThreshold, level = kSignificanceLevel, faithful_tol = -1, step = 0.01;
  bool gd = false, warm = false;
  std::vector<std::string> spec_files, inline_specs, report_inputs;
  std::string dims_text, base = "center";
  RegionArgs region;

  auto* fit = app.add_subcommand("fit-map", "fit the affine map from vision to VLM embeddings");
  common(fit);
  fit->add_option("--out", out_path, "affine_map.json")->required();
  fit->add_option("--split", split, "training split");
  fit->add_flag("--gd", gd, "momentum SGD instead of the closed form");
  fit->add_flag("--warm-start", warm, "start SGD from the closed form");
  fit->add_option("--faithfulness", faithful_tol, "also report rows farther than this from their target");
  fit->add_option("--directions", dirs_path, "directions.csv for the label-divergence check");

  auto* dirs_cmd = app.add_subcommand("directions", "average caption embeddings into concept and class directions");
  common(dirs_cmd);
  dirs_cmd->add_option("--out", out_path, "directions.csv")->required();
  dirs_cmd->add_option("--templates", template_subset, "comma-separated template indices to keep");

  auto* regions_cmd = app.add_subcommand("regions", "build focus regions for a class");
  common(regions_cmd);
  regions_cmd->add_option("--class", cls, "class name")->required();
  regions_cmd->add_option("--out", out_path, "regions.json")->required();
  add_region_options(regions_cmd, region);

  auto* elicit = app.add_subcommand("elicit", "relevant concepts and candidate strength predicates");
  common(elicit);
  elicit->add_option("--class", cls, "class name (default: every class)");
  elicit->add_option("--split", split, "split with attribute annotations");
  elicit->add_option("--threshold", threshold, "relevance threshold")->check(CLI::Range(0.0, 1.0));
  elicit->add_option("--out", out_path, "spec file with one predicate per line")->required();

  auto* validate = app.add_subcommand("validate", "satisfaction probabilities of elicited predicates");
  common(validate);
  validate->add_option("--class", cls, "class name (default: every class)");
  validate->add_option("--split", validate_split, "split to measure on");
  validate->add_option("--filter-split", filter_split, "split for relevance and significance");
  validate->add_option("--mode", mode, "vlm or affine")->check(CLI::IsMember({"vlm", "affine"}));
  validate->add_option("--directions", dirs_path, "directions.csv (default: built from captions)");
  validate->add_option("--templates", template_subset, "template indices when building directions");
  validate->add_option("--map", map_path, "affine_map.json for --mode affine (default: fit on train)");
  validate->add_option("--threshold", threshold, "relevance threshold")->check(CLI::Range(0.0, 1.0));
  validate->add_option("--level", level, "significance level")->check(CLI::Range(0.0, 1.0));
  validate->add_option("--out", out_path, "report.csv")->required();
  validate->add_option("--heatmap", heatmap_path, "heat-map JSON, one grid per class");
  validate->add_option("--significant", significant_path, "spec file of significant predicates");

  auto* verify = app.add_subcommand("verify", "prove or refute specifications over focus regions");
  common(verify);
  verify->add_option("--class", cls, "class whose regions are checked")->required();
  verify->add_option("--specs", spec_files, "spec files");
  verify->add_option("--spec", inline_specs, "inline specification");
  verify->add_option("--path", path, "vision (head + map) or clip (zero-shot)")->check(CLI::IsMember({"vision", "clip"}));
  verify->add_option("--head", head_path, "head.json (default: manifest)");
  verify->add_option("--map", map_path, "affine_map.json (default: fit on --map-split)");
  verify->add_option("--map-split", map_split, "split used when fitting the map");
  verify->add_option("--directions", dirs_path, "directions.csv (default: built from captions)");
  verify->add_option("--templates", template_subset, "template indices when building directions");
  verify->add_option("--out", out_path, "report.jsonl")->required();
  verify->add_option("--plot", plot_path, "plot data CSV");
  add_region_options(verify, region);

  auto* audit = app.add_subcommand("audit", "compare the LP with a grid search on a low-dim projection");
  common(audit);
  audit->add_option("--class", cls, "class whose region is audited")->required();
  audit->add_option("--spec", inline_specs, "specification")->required();
  audit->add_option("--dims", dims_text, "comma-separated coordinates, at most 4")->required();
  audit->add_option("--step", step, "grid step")->check(CLI::PositiveNumber);
  audit->add_option("--base", base, "center or counterexample")->check(CLI::IsMember({"center", "counterexample"}));
  audit->add_option("--path", path, "vision or clip")->check(CLI::IsMember({"vision", "clip"}));
  audit->add_option("--head", head_path, "head.json (default: manifest)");
  audit->add_option("--map", map_path, "affine_map.json (default: fit on train)");
  audit->add_option("--directions", dirs_path, "directions.csv (default: built from captions)");
  audit->add_option("--templates", template_subset, "template indices when building directions");
  add_region_options(audit, region);

  auto* report = app.add_subcommand("report", "summarize verification reports");
  common(report, false);
  report->add_option("--in", report_inputs, "report.jsonl files")->required();
  report->add_option("--plot", plot_path, "plot data CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*report) {
      std::map<std::string, std::map<std::string, std::size_t>> counts;
      std::ostringstream plot;
      csv::write_record(plot, {"spec_index", "region", "epsilon"});
      std::map<std::string, std::size_t> spec_index;
      for (const auto& f : report_inputs) {
        for (const auto& r : load_report_jsonl(f)) {
          ++counts[r.region][r.outcome];
          const auto [it, _] = spec_index.emplace(r.spec_text, spec_index.size());
          csv::write_record(plot, {std::to_string(it->second), r.region, fmt(r.epsilon)});
        }
      }
      std::vector<std::vector<std::string>> rows{{"region", "Proved", "Counterexample", "VacuouslyTrue"}};
      for (auto& [reg, c] : counts) {
        rows.push_back({reg, std::to_string(c["Proved"]), std::to_string(c["Counterexample"]),
                        std::to_string(c["VacuouslyTrue"])});
      }
      print_table(out, rows);
      if (!plot_path.empty()) csv::write_text_file(plot_path, plot.str());
      return 0;
    }

    const Manifest m = Manifest::load(manifest_path);

    if (*fit) {
      FitOptions o;
      o.gradient_descent = gd;
      o.warm_start = warm;
      const EmbeddingSet f = m.load_split(split, Space::Vision);
      const EmbeddingSet g = m.load_split(split, Space::Vlm);
      const AffineMap map = fit_affine_map(f, g, o);
      save_affine_map_json(map, out_path);
      const MapQuality q = map_metrics(map, f, g);
      out << "mse " << fmt(q.mse) << "\nr2 " << fmt(q.r2) << '\n';
      if (faithful_tol >= 0) {
        std::vector<ConceptDirection> class_dirs;
        if (!dirs_path.empty()) class_dirs = load_directions_csv(dirs_path).classes;
        std::size_t dist = 0, diverge = 0;
        for (const auto& v : check_faithfulness(map, f, g, class_dirs, faithful_tol)) {
          (v.kind == FaithfulnessViolation::Kind::Distance ? dist : diverge)++;
        }
        out << "distance_violations " << dist << "\nlabel_divergences " << diverge << '\n';
      }
      return 0;
    }

    if (*dirs_cmd) {
      const DirectionTable t = directions_for(m, "", template_subset);
      save_directions_csv(t, out_path);
      out << t.concepts.size() << " concept and " << t.classes.size() << " class directions\n";
      return 0;
    }

    if (*regions_cmd) {
      const ClassLabel c = m.vocab.class_label(cls);
      const auto boxes = build_regions(m, region, c, region_space(region));
      save_regions_json(boxes, out_path);
      out << boxes.size() << " region(s) for " << c.name << '\n';
      return 0;
    }

    std::vector<ClassLabel> classes;
    if (!cls.empty()) {
      classes.push_back(m.vocab.class_label(cls));
    } else {
      for (const auto& name : m.vocab.classes()) classes.push_back(m.vocab.class_label(name));
    }

    if (*elicit) {
      const EmbeddingSet e = m.load_split(split, Space::Vision);
      std::vector<StrengthPredicate> all;
      for (const auto& c : classes) {
        const auto relevant = relevant_concepts(e, c, threshold);
        const auto preds = elicit_predicates(relevant, m.vocab.concepts(), c);
        out << c.name << ": " << relevant.size() << " relevant, " << preds.size() << " predicates\n";
        all.insert(all.end(), preds.begin(), preds.end());
      }
      csv::write_text_file(out_path, predicates_as_specs(all));
      return 0;
    }

    if (*validate) {
      const DirectionTable dirs = directions_for(m, dirs_path, template_subset);
      const Space space = mode == "vlm" ? Space::Vlm : Space::Vision;
      const RepMap rep = mode == "vlm" ? RepMap::vlm_only(dirs.concepts)
                                       : RepMap::via_affine(dirs.concepts, map_for(m, map_path, "train"));
      const EmbeddingSet measure = m.load_split(validate_split, space);
      const EmbeddingSet filter = m.load_split(filter_split, space);
      std::vector<ValidationReport> reports;
      std::vector<StrengthPredicate> significant;
      nlohmann::json heatmaps = nlohmann::json::array();
      for (const auto& c : classes) {
        const auto relevant = relevant_concepts(filter, c, threshold);
        const auto preds = elicit_predicates(relevant, m.vocab.concepts(), c);
        reports.push_back(satisfaction_probability(measure, preds, rep, c, jobs));
        const auto kept = filter_significant(satisfaction_probability(filter, preds, rep, c, jobs), level);
        significant.insert(significant.end(), kept.begin(), kept.end());
        out << c.name << ": " << preds.size() << " predicates, " << kept.size() << " significant\n";
        if (!heatmap_path.empty()) {
          heatmaps.push_back(nlohmann::json::parse(heatmap_json(reports.back(), relevant, m.vocab.concepts())));
        }
      }
      save_report_csv(reports, out_path);
      if (!heatmap_path.empty()) csv::write_text_file(heatmap_path, heatmaps.dump(1) + "\n");
      if (!significant_path.empty()) csv::write_text_file(significant_path, predicates_as_specs(significant));
      return 0;
    }

    if (*verify || *audit) {
      const ClassLabel c = classes.front();
      const Space space = path == "vision" ? Space::Vision : Space::Vlm;
      if (!region.space.empty() && parse_space(region.space) != space) {
        throw UsageError("--space must match the verification path");
      }
      const auto boxes = build_regions(m, region, c, space);
      VerificationContext ctx = context_for(m, path, head_path, map_path, dirs_path, template_subset, map_split);
      const auto specs = specs_for(m, spec_files, inline_specs);
      std::vector<lang::ExprPtr> exprs;
      for (const auto& s : specs) exprs.push_back(lang::desugar(s.expr, m.vocab));

      if (*audit) {
        const auto dims = parse_indices(dims_text, "dimension");
        if (dims.size() > 4) throw UsageError("at most 4 audit dims");
        std::vector<std::vector<std::string>> rows{{"region", "clause", "lp_eps", "grid_eps", "tolerance", "ok"}};
        bool all_ok = true;
        for (const auto& box : boxes) {
          Vector point = box.center();
          if (base == "counterexample") {
            const auto outcome = verify_spec(exprs.front(), ctx, box);
            if (outcome.verdict == Verdict::Counterexample) point = outcome.point;
          }
          for (const auto& r : audit_projection(exprs.front(), ctx, box, dims, point, step, jobs)) {
            all_ok = all_ok && r.consistent;
            rows.push_back({box.provenance.str(), r.clause, r.lp_feasible ? fmt(r.lp_epsilon) : "infeasible",
                            r.grid_feasible ? fmt(r.grid_epsilon) : "infeasible", fmt(r.tolerance),
                            r.consistent ? "yes" : "NO"});
          }
        }
        print_table(out, rows);
        return all_ok ? 0 : 1;
      }

      struct Task {
        std::size_t spec, box;
      };
      std::vector<Task> tasks;
      for (std::size_t s = 0; s < specs.size(); ++s) {
        for (std::size_t b = 0; b < boxes.size(); ++b) tasks.push_back({s, b});
      }
      std::vector<ReportRecord> records(tasks.size());
      parallel_for(tasks.size(), jobs, [&](std::size_t i) {
        const auto start = std::chrono::steady_clock::now();
        ReportRecord& r = records[i];
        r.spec_text = specs[tasks[i].spec].text;
        r.region = boxes[tasks[i].box].provenance.str();
        r.outcome = verify_spec(exprs[tasks[i].spec], ctx, boxes[tasks[i].box]);
        if (!deterministic) {
          r.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
      });
      const std::string stamp = deterministic ? std::string() : utc_timestamp();
      std::string jsonl;
      std::vector<std::size_t> indices;
      std::vector<std::vector<std::string>> rows{{"spec", "region", "outcome", "epsilon"}};
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (!deterministic) records[i].timestamp = stamp;
        jsonl += report_jsonl_line(records[i]);
        indices.push_back(tasks[i].spec);
        rows.push_back({records[i].spec_text, records[i].region, std::string(to_string(records[i].outcome.verdict)),
                        fmt(records[i].outcome.epsilon)});
      }
      csv::write_text_file(out_path, jsonl);
      if (!plot_path.empty()) csv::write_text_file(plot_path, plot_csv(records, indices));
      print_table(out, rows);
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace conspec::cli
