#include <cctype>

#include "conspec/csv.hpp"
#include "conspec/error.hpp"
#include "conspec/lang.hpp"

namespace conspec::lang {

std::vector<SpecLine> parse_spec_text(std::string_view text, const TaskVocabulary& vocab) {
  std::vector<SpecLine> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    std::size_t lead = 0;
    while (lead < line.size() && std::isspace(static_cast<unsigned char>(line[lead]))) ++lead;
    line.remove_prefix(lead);
    if (line.empty()) continue;
    try {
      out.push_back({line_no, std::string(line), parse_spec(line, vocab)});
    } catch (const SyntaxError& ex) {
      throw SyntaxError(ex.offset(), "line " + std::to_string(line_no) + ": " + ex.message());
    } catch (const Error& ex) {
      throw Error(ex.kind(), "line " + std::to_string(line_no) + ": " + ex.message());
    }
  }
  return out;
}

std::vector<SpecLine> load_spec_file(const std::filesystem::path& path, const TaskVocabulary& vocab) {
  return parse_spec_text(csv::read_text_file(path), vocab);
}

}  // namespace conspec::lang
