#include "conspec/vocab.hpp"

#include <algorithm>
#include <unordered_set>

#include "conspec/error.hpp"

namespace conspec {

bool is_name_token(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '-' ||
           ch == '_';
  });
}

namespace {

void check_names(const std::vector<std::string>& names, const char* what) {
  if (names.empty()) throw Error(ErrorKind::InvalidArgument, std::string("empty ") + what + " list");
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (!is_name_token(n)) throw Error(ErrorKind::InvalidArgument, std::string("malformed ") + what + " name '" + n + "'");
    if (!seen.insert(n).second) throw Error(ErrorKind::InvalidArgument, std::string("duplicate ") + what + " '" + n + "'");
  }
}

}  // namespace

TaskVocabulary::TaskVocabulary(std::vector<std::string> concepts, std::vector<std::string> classes)
    : concepts_(std::move(concepts)), classes_(std::move(classes)) {
  check_names(concepts_, "concept");
  check_names(classes_, "class");
}

bool TaskVocabulary::has_concept(std::string_view name) const {
  return std::find(concepts_.begin(), concepts_.end(), name) != concepts_.end();
}

std::optional<ClassLabel> TaskVocabulary::find_class(std::string_view name) const {
  const auto it = std::find(classes_.begin(), classes_.end(), name);
  if (it == classes_.end()) return std::nullopt;
  return ClassLabel{*it, static_cast<std::size_t>(it - classes_.begin())};
}

ClassLabel TaskVocabulary::class_label(std::string_view name) const {
  if (auto c = find_class(name)) return *c;
  throw Error(ErrorKind::UnknownName, "unknown class '" + std::string(name) + "'");
}

}  // namespace conspec
