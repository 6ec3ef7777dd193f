// AVX2+FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after a runtime cpuid check (see dispatch.cpp).

#include "venomguard/kernels/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define VG_HAVE_AVX2_TU 1
#include <immintrin.h>
#else
#define VG_HAVE_AVX2_TU 0
#endif

#include <cmath>

namespace vg::kernels {

#if VG_HAVE_AVX2_TU

namespace {

void zero_block(double* c, std::size_t ldc, std::size_t m, std::size_t n) {
    const __m256d z = _mm256_setzero_pd();
    for (std::size_t i = 0; i < m; ++i) {
        double* row = c + i * ldc;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) _mm256_storeu_pd(row + j, z);
        for (; j < n; ++j) row[j] = 0.0;
    }
}

// ---------------------------------------------------------------------------
// gemm_nn / gemm_tn: broadcast-FMA microkernels, up to 4 rows x 16 columns.
// StrideA selects how A is addressed (row-major vs transposed access).
// ---------------------------------------------------------------------------

template <int IB>
inline void bc_tile16(const double* a, std::size_t a_row_stride, std::size_t a_col_stride,
                      const double* b, std::size_t ldb, double* c, std::size_t ldc,
                      std::size_t k, std::size_t i0, std::size_t j0) {
    __m256d acc[IB][4];
    for (int ii = 0; ii < IB; ++ii)
        for (int q = 0; q < 4; ++q)
            acc[ii][q] = _mm256_loadu_pd(c + (i0 + ii) * ldc + j0 + 4 * q);
    for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b + p * ldb + j0;
        __m256d b0 = _mm256_loadu_pd(brow);
        __m256d b1 = _mm256_loadu_pd(brow + 4);
        __m256d b2 = _mm256_loadu_pd(brow + 8);
        __m256d b3 = _mm256_loadu_pd(brow + 12);
        for (int ii = 0; ii < IB; ++ii) {
            __m256d av = _mm256_set1_pd(a[(i0 + ii) * a_row_stride + p * a_col_stride]);
            acc[ii][0] = _mm256_fmadd_pd(av, b0, acc[ii][0]);
            acc[ii][1] = _mm256_fmadd_pd(av, b1, acc[ii][1]);
            acc[ii][2] = _mm256_fmadd_pd(av, b2, acc[ii][2]);
            acc[ii][3] = _mm256_fmadd_pd(av, b3, acc[ii][3]);
        }
    }
    for (int ii = 0; ii < IB; ++ii)
        for (int q = 0; q < 4; ++q)
            _mm256_storeu_pd(c + (i0 + ii) * ldc + j0 + 4 * q, acc[ii][q]);
}

template <int IB>
inline void bc_tile4(const double* a, std::size_t a_row_stride, std::size_t a_col_stride,
                     const double* b, std::size_t ldb, double* c, std::size_t ldc,
                     std::size_t k, std::size_t i0, std::size_t j0) {
    __m256d acc[IB];
    for (int ii = 0; ii < IB; ++ii) acc[ii] = _mm256_loadu_pd(c + (i0 + ii) * ldc + j0);
    for (std::size_t p = 0; p < k; ++p) {
        __m256d bv = _mm256_loadu_pd(b + p * ldb + j0);
        for (int ii = 0; ii < IB; ++ii) {
            __m256d av = _mm256_set1_pd(a[(i0 + ii) * a_row_stride + p * a_col_stride]);
            acc[ii] = _mm256_fmadd_pd(av, bv, acc[ii]);
        }
    }
    for (int ii = 0; ii < IB; ++ii) _mm256_storeu_pd(c + (i0 + ii) * ldc + j0, acc[ii]);
}

void gemm_bc(const double* a, std::size_t a_row_stride, std::size_t a_col_stride,
             const double* b, std::size_t ldb, double* c, std::size_t ldc,
             std::size_t m, std::size_t n, std::size_t k, bool acc) {
    if (!acc) zero_block(c, ldc, m, n);
    std::size_t i = 0;
    auto edge_cols = [&](std::size_t i0, int ib, std::size_t j0) {
        for (int ii = 0; ii < ib; ++ii)
            for (std::size_t j = j0; j < n; ++j) {
                double s = c[(i0 + ii) * ldc + j];
                for (std::size_t p = 0; p < k; ++p)
                    s += a[(i0 + ii) * a_row_stride + p * a_col_stride] * b[p * ldb + j];
                c[(i0 + ii) * ldc + j] = s;
            }
    };
    for (; i + 4 <= m; i += 4) {
        std::size_t j = 0;
        for (; j + 16 <= n; j += 16) bc_tile16<4>(a, a_row_stride, a_col_stride, b, ldb, c, ldc, k, i, j);
        for (; j + 4 <= n; j += 4) bc_tile4<4>(a, a_row_stride, a_col_stride, b, ldb, c, ldc, k, i, j);
        if (j < n) edge_cols(i, 4, j);
    }
    for (; i < m; ++i) {
        std::size_t j = 0;
        for (; j + 16 <= n; j += 16) bc_tile16<1>(a, a_row_stride, a_col_stride, b, ldb, c, ldc, k, i, j);
        for (; j + 4 <= n; j += 4) bc_tile4<1>(a, a_row_stride, a_col_stride, b, ldb, c, ldc, k, i, j);
        if (j < n) edge_cols(i, 1, j);
    }
}

void gemm_nn_avx2(const double* a, std::size_t lda, const double* b, std::size_t ldb,
                  double* c, std::size_t ldc,
                  std::size_t m, std::size_t n, std::size_t k, bool acc) {
    gemm_bc(a, lda, 1, b, ldb, c, ldc, m, n, k, acc);
}

void gemm_tn_avx2(const double* a, std::size_t lda, const double* b, std::size_t ldb,
                  double* c, std::size_t ldc,
                  std::size_t m, std::size_t n, std::size_t k, bool acc) {
    // A[k x m] addressed as A^T: element (i, p) is a[p * lda + i]
    gemm_bc(a, 1, lda, b, ldb, c, ldc, m, n, k, acc);
}

// ---------------------------------------------------------------------------
// gemm_nt: rows of A dot rows of B, 2 x 4 tile vectorized over k.
// ---------------------------------------------------------------------------

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

template <int IB, int JB>
inline void nt_tile(const double* a, std::size_t lda, const double* b, std::size_t ldb,
                    double* c, std::size_t ldc,
                    std::size_t k, std::size_t i0, std::size_t j0, bool acc) {
    __m256d vacc[IB][JB];
    for (int ii = 0; ii < IB; ++ii)
        for (int jj = 0; jj < JB; ++jj) vacc[ii][jj] = _mm256_setzero_pd();
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) {
        __m256d av[IB];
        for (int ii = 0; ii < IB; ++ii) av[ii] = _mm256_loadu_pd(a + (i0 + ii) * lda + p);
        for (int jj = 0; jj < JB; ++jj) {
            __m256d bv = _mm256_loadu_pd(b + (j0 + jj) * ldb + p);
            for (int ii = 0; ii < IB; ++ii)
                vacc[ii][jj] = _mm256_fmadd_pd(av[ii], bv, vacc[ii][jj]);
        }
    }
    for (int ii = 0; ii < IB; ++ii)
        for (int jj = 0; jj < JB; ++jj) {
            double s = hsum(vacc[ii][jj]);
            for (std::size_t q = p; q < k; ++q)
                s += a[(i0 + ii) * lda + q] * b[(j0 + jj) * ldb + q];
            double* dst = c + (i0 + ii) * ldc + j0 + jj;
            *dst = acc ? *dst + s : s;
        }
}

void gemm_nt_avx2(const double* a, std::size_t lda, const double* b, std::size_t ldb,
                  double* c, std::size_t ldc,
                  std::size_t m, std::size_t n, std::size_t k, bool acc) {
    std::size_t i = 0;
    for (; i + 2 <= m; i += 2) {
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) nt_tile<2, 4>(a, lda, b, ldb, c, ldc, k, i, j, acc);
        for (; j < n; ++j) nt_tile<2, 1>(a, lda, b, ldb, c, ldc, k, i, j, acc);
    }
    for (; i < m; ++i) {
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) nt_tile<1, 4>(a, lda, b, ldb, c, ldc, k, i, j, acc);
        for (; j < n; ++j) nt_tile<1, 1>(a, lda, b, ldb, c, ldc, k, i, j, acc);
    }
}

// ---------------------------------------------------------------------------
// Elementwise / reductions
// ---------------------------------------------------------------------------

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double alpha, const double* x, double* y, std::size_t n) {
    __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = alpha * x[i];
}

void clamp_avx2(const double* x, double lo, double hi, double* y, std::size_t n) {
    __m256d lov = _mm256_set1_pd(lo), hiv = _mm256_set1_pd(hi);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_min_pd(hiv, _mm256_max_pd(lov, _mm256_loadu_pd(x + i))));
    for (; i < n; ++i) {
        double v = x[i];
        y[i] = v < lo ? lo : (v > hi ? hi : v);
    }
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double abs_sum_avx2(const double* x, std::size_t n) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
    double s = hsum(acc);
    for (; i < n; ++i) s += std::fabs(x[i]);
    return s;
}

double sq_sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_max_pd(acc, _mm256_and_pd(mask, d));
    }
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    lo = _mm_max_pd(lo, hi);
    double m = _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
    for (; i < n; ++i) {
        double d = std::fabs(a[i] - b[i]);
        if (d > m) m = d;
    }
    return m;
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops table{
        "avx2",
        gemm_nn_avx2, gemm_tn_avx2, gemm_nt_avx2,
        add_avx2, sub_avx2, mul_avx2, axpy_avx2, scale_avx2, clamp_avx2,
        sum_avx2, dot_avx2, abs_sum_avx2, sq_sum_avx2, max_abs_diff_avx2,
    };
    return table;
}

#else  // !VG_HAVE_AVX2_TU

const Ops& avx2_ops() { return scalar_ops(); }

#endif

}  // namespace vg::kernels
