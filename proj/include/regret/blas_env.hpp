#pragma once

namespace regret {

/// OpenBLAS mis-detects some AVX-512 hosts and falls back to slow generic
/// kernels.  If the CPU reports avx512f and OPENBLAS_CORETYPE is unset, sets
/// it and re-executes the program so that OpenBLAS sees it at load time.
/// Returns normally when no re-exec is needed or it fails.
void ensure_blas_env(char** argv);

}  // namespace regret
