#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace conspec {

// Name tokens: letters, digits, '-' and '_'. Case-sensitive.
bool is_name_token(std::string_view s);

struct ClassLabel {
  std::string name;
  std::size_t index = 0;

  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

// Concepts and classes of one task, in declaration order.
class TaskVocabulary {
 public:
  TaskVocabulary() = default;
  // Throws InvalidArgument on empty lists, duplicates or malformed names.
  TaskVocabulary(std::vector<std::string> concepts, std::vector<std::string> classes);

  const std::vector<std::string>& concepts() const noexcept { return concepts_; }
  const std::vector<std::string>& classes() const noexcept { return classes_; }

  bool has_concept(std::string_view name) const;
  std::optional<ClassLabel> find_class(std::string_view name) const;
  // Throws UnknownName.
  ClassLabel class_label(std::string_view name) const;

 private:
  std::vector<std::string> concepts_;
  std::vector<std::string> classes_;
};

}  // namespace conspec
