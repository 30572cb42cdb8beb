#include "crossdiff/parallel.hpp"

#include <cstdlib>
#include <string>

namespace crossdiff {

int thread_limit() {
  if (const char* env = std::getenv("CROSSDIFF_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace crossdiff
