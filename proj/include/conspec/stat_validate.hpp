#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "conspec/embedding.hpp"
#include "conspec/rep_maps.hpp"
#include "conspec/vocab.hpp"

namespace conspec {

// stronger > weaker, expected to hold on inputs of for_class.
struct StrengthPredicate {
  std::string stronger;
  std::string weaker;
  ClassLabel for_class;

  friend bool operator==(const StrengthPredicate&, const StrengthPredicate&) = default;
};

inline constexpr double kRelevanceThreshold = 0.70;
inline constexpr double kSignificanceLevel = 0.95;

// Concepts annotated on more than `threshold` of the rows whose ground truth
// is c, in attribute-column order.
std::vector<std::string> relevant_concepts(const EmbeddingSet& e, const ClassLabel& c,
                                           double threshold = kRelevanceThreshold);

// relevant x (all_concepts \ relevant), relevant-major.
std::vector<StrengthPredicate> elicit_predicates(const std::vector<std::string>& relevant,
                                                 const std::vector<std::string>& all_concepts, const ClassLabel& c);

struct PredicateRate {
  StrengthPredicate predicate;
  std::size_t satisfied = 0;
  std::size_t n = 0;
  double probability = 0;
};

struct ValidationReport {
  ClassLabel cls;
  std::vector<PredicateRate> rates;  // same order as the input predicates
};

// Fraction of ground-truth-c rows where rep(stronger) > rep(weaker).
ValidationReport satisfaction_probability(const EmbeddingSet& e, const std::vector<StrengthPredicate>& preds,
                                          const RepMap& r, const ClassLabel& c, std::size_t jobs = 1);

// Predicates whose probability is strictly above `level`.
std::vector<StrengthPredicate> filter_significant(const ValidationReport& report,
                                                  double level = kSignificanceLevel);

// report.csv: `class,stronger,weaker,probability,n`
void save_report_csv(const std::vector<ValidationReport>& reports, const std::filesystem::path& path);

// Heat-map data over every ordered concept pair: rows are the candidate
// stronger concept, columns the weaker one. Cell category is "elicited"
// (relevant over irrelevant), "neither-relevant", or "other"; probability is
// null where the report has no entry.
std::string heatmap_json(const ValidationReport& report, const std::vector<std::string>& relevant,
                         const std::vector<std::string>& all_concepts);

// One `predict(c) => gt(stronger, weaker)` line per predicate.
std::string predicates_as_specs(const std::vector<StrengthPredicate>& preds);

}  // namespace conspec
