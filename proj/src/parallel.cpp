#include "conspec/parallel.hpp"

#include <cstdlib>
#include <string>

namespace conspec {

std::size_t default_jobs() {
  const char* env = std::getenv("CONSPEC_JOBS");
  if (!env || !*env) return 1;
  try {
    const long v = std::stol(env);
    return v > 0 ? static_cast<std::size_t>(v) : 1;
  } catch (const std::exception&) {
    return 1;
  }
}

}  // namespace conspec
