#include "conspec/stat_validate.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "conspec/csv.hpp"
#include "conspec/error.hpp"
#include "conspec/parallel.hpp"

namespace conspec {

namespace {

RowSelection class_rows(const EmbeddingSet& e, const ClassLabel& c) {
  if (!e.ground_truth) throw Error(ErrorKind::InvalidArgument, "embedding set has no ground-truth labels");
  RowSelection rows = e.rows_where_ground_truth(c.name);
  if (rows.empty()) throw Error(ErrorKind::NoRowsForClass, "no rows with ground truth '" + c.name + "'");
  return rows;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

std::vector<std::string> relevant_concepts(const EmbeddingSet& e, const ClassLabel& c, double threshold) {
  const RowSelection rows = class_rows(e, c);
  if (!e.attributes) throw Error(ErrorKind::InvalidArgument, "embedding set has no attribute annotations");
  const AttributeTable& a = *e.attributes;
  std::vector<std::string> out;
  for (std::size_t k = 0; k < a.concepts.size(); ++k) {
    std::size_t present = 0;
    for (std::size_t r : rows) present += a.has(r, k) ? 1 : 0;
    const double rate = static_cast<double>(present) / static_cast<double>(rows.size());
    if (rate > threshold) out.push_back(a.concepts[k]);
  }
  return out;
}

std::vector<StrengthPredicate> elicit_predicates(const std::vector<std::string>& relevant,
                                                 const std::vector<std::string>& all_concepts, const ClassLabel& c) {
  for (const auto& r : relevant) {
    if (!contains(all_concepts, r)) throw Error(ErrorKind::UnknownConcept, "relevant concept '" + r + "' unknown");
  }
  std::vector<StrengthPredicate> out;
  for (const auto& r : relevant) {
    for (const auto& ir : all_concepts) {
      if (!contains(relevant, ir)) out.push_back({r, ir, c});
    }
  }
  return out;
}

ValidationReport satisfaction_probability(const EmbeddingSet& e, const std::vector<StrengthPredicate>& preds,
                                          const RepMap& r, const ClassLabel& c, std::size_t jobs) {
  const RowSelection rows = class_rows(e, c);
  std::vector<lang::RepValues> values(rows.size());
  parallel_for(rows.size(), jobs, [&](std::size_t i) { values[i] = rep_values(r, e.row(rows[i])); });

  auto lookup = [](const lang::RepValues& v, const std::string& name) {
    const auto it = v.find(name);
    if (it == v.end()) throw Error(ErrorKind::UnknownConcept, "no direction for concept '" + name + "'");
    return it->second;
  };
  ValidationReport report{c, {}};
  report.rates.resize(preds.size());
  parallel_for(preds.size(), jobs, [&](std::size_t k) {
    PredicateRate& rate = report.rates[k];
    rate.predicate = preds[k];
    rate.n = rows.size();
    for (const auto& v : values) {
      if (lookup(v, preds[k].stronger) > lookup(v, preds[k].weaker)) ++rate.satisfied;
    }
    rate.probability = static_cast<double>(rate.satisfied) / static_cast<double>(rate.n);
  });
  return report;
}

std::vector<StrengthPredicate> filter_significant(const ValidationReport& report, double level) {
  std::vector<StrengthPredicate> out;
  for (const auto& r : report.rates) {
    if (r.probability > level) out.push_back(r.predicate);
  }
  return out;
}

void save_report_csv(const std::vector<ValidationReport>& reports, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  csv::write_record(out, {"class", "stronger", "weaker", "probability", "n"});
  for (const auto& rep : reports) {
    for (const auto& r : rep.rates) {
      csv::write_record(out, {rep.cls.name, r.predicate.stronger, r.predicate.weaker,
                              csv::format_double(r.probability), std::to_string(r.n)});
    }
  }
}

std::string heatmap_json(const ValidationReport& report, const std::vector<std::string>& relevant,
                         const std::vector<std::string>& all_concepts) {
  using nlohmann::json;
  json cells = json::array();
  for (const auto& y : all_concepts) {
    json row = json::array();
    for (const auto& x : all_concepts) {
      const bool ry = contains(relevant, y), rx = contains(relevant, x);
      const char* category = (ry && !rx) ? "elicited" : (!ry && !rx) ? "neither-relevant" : "other";
      json prob = nullptr;
      for (const auto& r : report.rates) {
        if (r.predicate.stronger == y && r.predicate.weaker == x) prob = r.probability;
      }
      row.push_back({{"category", category}, {"probability", prob}});
    }
    cells.push_back(std::move(row));
  }
  json j{{"class", report.cls.name}, {"y", all_concepts}, {"x", all_concepts}, {"cells", std::move(cells)}};
  return j.dump(1) + "\n";
}

std::string predicates_as_specs(const std::vector<StrengthPredicate>& preds) {
  std::string out;
  for (const auto& p : preds) {
    out += "predict(" + p.for_class.name + ") => gt(" + p.stronger + ", " + p.weaker + ")\n";
  }
  return out;
}

}  // namespace conspec
