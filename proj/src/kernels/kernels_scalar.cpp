#include "venomguard/kernels/kernels.hpp"

#include <cmath>

// Reference kernels. Plain loops, no unrolling tricks: these define the
// semantics the vector variants are tested against.

namespace vg::kernels {
namespace {

void zero_block(double* c, std::size_t ldc, std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] = 0.0;
}

void gemm_nn_scalar(const double* a, std::size_t lda, const double* b, std::size_t ldb,
                    double* c, std::size_t ldc,
                    std::size_t m, std::size_t n, std::size_t k, bool acc) {
    if (!acc) zero_block(c, ldc, m, n);
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * lda;
        double* crow = c + i * ldc;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * ldb;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void gemm_tn_scalar(const double* a, std::size_t lda, const double* b, std::size_t ldb,
                    double* c, std::size_t ldc,
                    std::size_t m, std::size_t n, std::size_t k, bool acc) {
    if (!acc) zero_block(c, ldc, m, n);
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * lda;
        const double* brow = b + p * ldb;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            double* crow = c + i * ldc;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void gemm_nt_scalar(const double* a, std::size_t lda, const double* b, std::size_t ldb,
                    double* c, std::size_t ldc,
                    std::size_t m, std::size_t n, std::size_t k, bool acc) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * lda;
        double* crow = c + i * ldc;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * ldb;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
            crow[j] = acc ? crow[j] + s : s;
        }
    }
}

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

void clamp_scalar(const double* x, double lo, double hi, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double v = x[i];
        y[i] = v < lo ? lo : (v > hi ? hi : v);
    }
}

double sum_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double abs_sum_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::fabs(x[i]);
    return s;
}

double sq_sum_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = std::fabs(a[i] - b[i]);
        if (d > m) m = d;
    }
    return m;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops table{
        "scalar",
        gemm_nn_scalar, gemm_tn_scalar, gemm_nt_scalar,
        add_scalar, sub_scalar, mul_scalar, axpy_scalar, scale_scalar, clamp_scalar,
        sum_scalar, dot_scalar, abs_sum_scalar, sq_sum_scalar, max_abs_diff_scalar,
    };
    return table;
}

}  // namespace vg::kernels
