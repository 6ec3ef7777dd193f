#include <doctest.h>

#include <vector>

#include "test_util.hpp"
#include "venomguard/kernels/kernels.hpp"

using namespace vg;

namespace {

// brute-force oracle, independent of kernel code paths
void naive_gemm(char mode, const std::vector<double>& a, const std::vector<double>& b,
                std::vector<double>& c, std::size_t m, std::size_t n, std::size_t k, bool acc) {
    if (!acc) std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                const double av = mode == 't' ? a[p * m + i] : a[i * k + p];
                const double bv = mode == 'x' ? b[j * k + p] : b[p * n + j];
                s += av * bv;
            }
            c[i * n + j] += s;
        }
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
    CHECK(worst <= tol);
}

}  // namespace

TEST_CASE("gemm variants match the brute-force oracle (scalar table)") {
    Rng rng(11);
    const auto& ops = kernels::scalar_ops();
    for (std::size_t m : {1u, 3u, 4u, 5u, 17u})
        for (std::size_t n : {1u, 4u, 16u, 33u})
            for (std::size_t k : {1u, 7u, 32u}) {
                auto a = random_vec(m * k, rng);
                auto b = random_vec(k * n, rng);
                auto at = random_vec(k * m, rng);
                auto bt = random_vec(n * k, rng);
                std::vector<double> c(m * n), ref(m * n);

                ops.gemm_nn(a.data(), k, b.data(), n, c.data(), n, m, n, k, false);
                naive_gemm('n', a, b, ref, m, n, k, false);
                check_close(c, ref, 1e-12);

                ops.gemm_tn(at.data(), m, b.data(), n, c.data(), n, m, n, k, false);
                naive_gemm('t', at, b, ref, m, n, k, false);
                check_close(c, ref, 1e-12);

                ops.gemm_nt(a.data(), k, bt.data(), k, c.data(), n, m, n, k, false);
                naive_gemm('x', a, bt, ref, m, n, k, false);
                check_close(c, ref, 1e-12);
            }
}

TEST_CASE("gemm accumulate adds onto existing output") {
    Rng rng(12);
    const std::size_t m = 5, n = 9, k = 6;
    auto a = random_vec(m * k, rng);
    auto b = random_vec(k * n, rng);
    std::vector<double> c(m * n, 0.5), ref(m * n, 0.5);
    kernels::scalar_ops().gemm_nn(a.data(), k, b.data(), n, c.data(), n, m, n, k, true);
    naive_gemm('n', a, b, ref, m, n, k, true);
    check_close(c, ref, 1e-12);
}

TEST_CASE("avx2 kernels agree with scalar reference") {
    if (!kernels::avx2_available()) return;  // nothing to compare on this host
    Rng rng(13);
    const auto& sc = kernels::scalar_ops();
    const auto& vx = kernels::avx2_ops();

    for (std::size_t m : {1u, 2u, 4u, 7u, 12u})
        for (std::size_t n : {1u, 5u, 16u, 40u})
            for (std::size_t k : {1u, 9u, 33u}) {
                auto a = random_vec(m * k, rng);
                auto b = random_vec(k * n, rng);
                auto at = random_vec(k * m, rng);
                auto bt = random_vec(n * k, rng);
                std::vector<double> c0(m * n), c1(m * n);

                sc.gemm_nn(a.data(), k, b.data(), n, c0.data(), n, m, n, k, false);
                vx.gemm_nn(a.data(), k, b.data(), n, c1.data(), n, m, n, k, false);
                check_close(c0, c1, 1e-12);

                sc.gemm_tn(at.data(), m, b.data(), n, c0.data(), n, m, n, k, false);
                vx.gemm_tn(at.data(), m, b.data(), n, c1.data(), n, m, n, k, false);
                check_close(c0, c1, 1e-12);

                sc.gemm_nt(a.data(), k, bt.data(), k, c0.data(), n, m, n, k, false);
                vx.gemm_nt(a.data(), k, bt.data(), k, c1.data(), n, m, n, k, false);
                check_close(c0, c1, 1e-12);
            }

    const std::size_t n = 1037;  // odd length exercises the remainder loops
    auto x = random_vec(n, rng);
    auto y = random_vec(n, rng);
    std::vector<double> o0(n), o1(n);

    sc.add(x.data(), y.data(), o0.data(), n);
    vx.add(x.data(), y.data(), o1.data(), n);
    check_close(o0, o1, 1e-15);

    sc.sub(x.data(), y.data(), o0.data(), n);
    vx.sub(x.data(), y.data(), o1.data(), n);
    check_close(o0, o1, 1e-15);

    sc.mul(x.data(), y.data(), o0.data(), n);
    vx.mul(x.data(), y.data(), o1.data(), n);
    check_close(o0, o1, 1e-15);

    o0 = y;
    o1 = y;
    sc.axpy(0.37, x.data(), o0.data(), n);
    vx.axpy(0.37, x.data(), o1.data(), n);
    check_close(o0, o1, 1e-15);

    sc.scale(-1.7, x.data(), o0.data(), n);
    vx.scale(-1.7, x.data(), o1.data(), n);
    check_close(o0, o1, 1e-15);

    sc.clamp(x.data(), -0.25, 0.5, o0.data(), n);
    vx.clamp(x.data(), -0.25, 0.5, o1.data(), n);
    check_close(o0, o1, 0.0);

    CHECK(std::fabs(sc.sum(x.data(), n) - vx.sum(x.data(), n)) < 1e-10);
    CHECK(std::fabs(sc.dot(x.data(), y.data(), n) - vx.dot(x.data(), y.data(), n)) < 1e-10);
    CHECK(std::fabs(sc.abs_sum(x.data(), n) - vx.abs_sum(x.data(), n)) < 1e-10);
    CHECK(std::fabs(sc.sq_sum(x.data(), n) - vx.sq_sum(x.data(), n)) < 1e-10);
    CHECK(sc.max_abs_diff(x.data(), y.data(), n) ==
          doctest::Approx(vx.max_abs_diff(x.data(), y.data(), n)).epsilon(1e-14));
}

TEST_CASE("active table is one of the registered ISAs") {
    const auto& ops = kernels::active();
    const bool named_scalar = std::string(ops.name) == "scalar";
    const bool named_avx2 = std::string(ops.name) == "avx2";
    CHECK((named_scalar || named_avx2));
    if (named_avx2) CHECK(kernels::avx2_available());
}
