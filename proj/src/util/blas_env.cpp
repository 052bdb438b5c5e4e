#include "regret/blas_env.hpp"

#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <string>

namespace regret {
namespace {

bool cpu_has_avx512f() {
  std::ifstream f("/proc/cpuinfo");
  std::string line;
  while (std::getline(f, line))
    if (line.rfind("flags", 0) == 0) return line.find(" avx512f") != std::string::npos;
  return false;
}

}  // namespace

void ensure_blas_env(char** argv) {
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr || !cpu_has_avx512f()) return;
  setenv("OPENBLAS_CORETYPE", "SkylakeX", 1);
  execv("/proc/self/exe", argv);
}

}  // namespace regret
