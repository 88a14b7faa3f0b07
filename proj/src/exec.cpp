#include "phasectx/exec.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace phasectx {

namespace {
int default_threads = -1;
}

void set_thread_count(int threads) {
  if (default_threads < 0) default_threads = omp_get_max_threads();
  omp_set_num_threads(threads > 0 ? threads : default_threads);
}

int thread_count() { return omp_get_max_threads(); }

void apply_thread_env() {
  if (const char* env = std::getenv("PHASECTX_THREADS")) {
    try {
      set_thread_count(std::stoi(env));
    } catch (const std::exception&) {
      // malformed value: keep the runtime default
    }
  }
}

}  // namespace phasectx
