#pragma once

#include <cstddef>

// Data-parallel inner loops used by the tensor/autodiff layer. Every kernel
// exists as a scalar reference implementation and (on x86-64 with AVX2+FMA)
// a vectorized variant; the active table is resolved once at startup from
// cpuid, overridable with VENOMGUARD_ISA=scalar|avx2.
//
// Matrices are row-major with explicit leading dimensions, so callers can
// operate on sub-blocks. Kernels never allocate and are safe to call
// concurrently on disjoint output ranges; each output element is produced by
// a single fixed-order accumulation, so results do not depend on how callers
// partition work.

namespace vg::kernels {

struct Ops {
    const char* name;

    // C[m x n] = A[m x k] * B[k x n]        (acc: C += ...)
    void (*gemm_nn)(const double* a, std::size_t lda, const double* b, std::size_t ldb,
                    double* c, std::size_t ldc,
                    std::size_t m, std::size_t n, std::size_t k, bool acc);
    // C[m x n] = A[k x m]^T * B[k x n]
    void (*gemm_tn)(const double* a, std::size_t lda, const double* b, std::size_t ldb,
                    double* c, std::size_t ldc,
                    std::size_t m, std::size_t n, std::size_t k, bool acc);
    // C[m x n] = A[m x k] * B[n x k]^T
    void (*gemm_nt)(const double* a, std::size_t lda, const double* b, std::size_t ldb,
                    double* c, std::size_t ldc,
                    std::size_t m, std::size_t n, std::size_t k, bool acc);

    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
    void (*scale)(double alpha, const double* x, double* y, std::size_t n); // y  = alpha*x
    void (*clamp)(const double* x, double lo, double hi, double* y, std::size_t n);

    double (*sum)(const double* x, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*abs_sum)(const double* x, std::size_t n);
    double (*sq_sum)(const double* x, std::size_t n);
    double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
};

const Ops& scalar_ops();

// Valid only when avx2_available() is true.
const Ops& avx2_ops();
bool avx2_available();

// cpuid + VENOMGUARD_ISA override, resolved on first use.
const Ops& active();

}  // namespace vg::kernels
