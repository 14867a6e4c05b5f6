#include "dsts/parallel.hpp"

#include <cstdlib>
#include <string>

namespace dsts {

unsigned default_thread_count() {
  if (const char* env = std::getenv("DSTS_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace dsts
