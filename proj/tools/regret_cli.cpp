#include "regret/blas_env.hpp"
#include "regret/cli.hpp"

int main(int argc, char** argv) {
  regret::ensure_blas_env(argv);
  return regret::cli::main_entry(argc, argv);
}
