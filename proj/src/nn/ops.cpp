#include "venomguard/nn/ops.hpp"

#include <cmath>

#include "venomguard/common/threadpool.hpp"
#include "venomguard/kernels/kernels.hpp"

namespace vg::nn {

namespace {

using kernels::active;

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (!a->value.same_shape(b->value))
        throw ShapeError(std::string(op) + ": shape mismatch " +
                         Tensor::shape_str(a->value.dims()) + " vs " +
                         Tensor::shape_str(b->value.dims()));
}

using GradFn = std::function<std::vector<Var>(const Var&, const std::vector<char>&)>;

// Unary op with a constant (re)computed multiplier mask is common enough to
// share: backward is g * mask where mask carries no history.
Var unary_masked(const Var& a, Tensor value, Tensor mask, const char* op) {
    auto mask_c = std::make_shared<Tensor>(std::move(mask));
    return make_node(
        std::move(value), {a},
        [mask_c](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {mul(g, constant(*mask_c))};
        },
        op);
}

}  // namespace

// --- elementwise -------------------------------------------------------------

Var add(const Var& a, const Var& b) {
    check_same_shape(a, b, "add");
    Tensor out = Tensor::zeros(a->value.dims());
    active().add(a->value.data(), b->value.data(), out.data(), out.size());
    return make_node(
        std::move(out), {a, b},
        [](const Var& g, const std::vector<char>&) -> std::vector<Var> { return {g, g}; },
        "add");
}

Var sub(const Var& a, const Var& b) {
    check_same_shape(a, b, "sub");
    Tensor out = Tensor::zeros(a->value.dims());
    active().sub(a->value.data(), b->value.data(), out.data(), out.size());
    return make_node(
        std::move(out), {a, b},
        [](const Var& g, const std::vector<char>& need) -> std::vector<Var> {
            return {g, need[1] ? neg(g) : Var()};
        },
        "sub");
}

Var mul(const Var& a, const Var& b) {
    check_same_shape(a, b, "mul");
    Tensor out = Tensor::zeros(a->value.dims());
    active().mul(a->value.data(), b->value.data(), out.data(), out.size());
    return make_node(
        std::move(out), {a, b},
        [a, b](const Var& g, const std::vector<char>& need) -> std::vector<Var> {
            return {need[0] ? mul(g, b) : Var(), need[1] ? mul(g, a) : Var()};
        },
        "mul");
}

Var scale(const Var& a, double s) {
    Tensor out = Tensor::zeros(a->value.dims());
    active().scale(s, a->value.data(), out.data(), out.size());
    return make_node(
        std::move(out), {a},
        [s](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {scale(g, s)};
        },
        "scale");
}

Var add_scalar(const Var& a, double s) {
    Tensor out = a->value.clone();
    double* p = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) p[i] += s;
    return make_node(
        std::move(out), {a},
        [](const Var& g, const std::vector<char>&) -> std::vector<Var> { return {g}; },
        "add_scalar");
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var relu(const Var& a) {
    const double* x = a->value.data();
    Tensor out = Tensor::zeros(a->value.dims());
    Tensor mask = Tensor::zeros(a->value.dims());
    double* o = out.data();
    double* m = mask.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (x[i] > 0.0) {
            o[i] = x[i];
            m[i] = 1.0;
        }
    }
    return unary_masked(a, std::move(out), std::move(mask), "relu");
}

Var leaky_relu(const Var& a, double slope) {
    const double* x = a->value.data();
    Tensor out = Tensor::zeros(a->value.dims());
    Tensor mask = Tensor::zeros(a->value.dims());
    double* o = out.data();
    double* m = mask.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const bool pos = x[i] > 0.0;
        o[i] = pos ? x[i] : slope * x[i];
        m[i] = pos ? 1.0 : slope;
    }
    return unary_masked(a, std::move(out), std::move(mask), "leaky_relu");
}

Var tanh_op(const Var& a) {
    const double* x = a->value.data();
    Tensor out = Tensor::zeros(a->value.dims());
    double* o = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) o[i] = std::tanh(x[i]);
    return make_node(
        std::move(out), {a},
        [a](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            Var t = tanh_op(a);
            return {mul(g, add_scalar(neg(mul(t, t)), 1.0))};
        },
        "tanh");
}

Var sigmoid_op(const Var& a) {
    const double* x = a->value.data();
    Tensor out = Tensor::zeros(a->value.dims());
    double* o = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) o[i] = 1.0 / (1.0 + std::exp(-x[i]));
    return make_node(
        std::move(out), {a},
        [a](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            Var s = sigmoid_op(a);
            return {mul(g, mul(s, add_scalar(neg(s), 1.0)))};
        },
        "sigmoid");
}

Var softplus_op(const Var& a) {
    const double* x = a->value.data();
    Tensor out = Tensor::zeros(a->value.dims());
    double* o = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        // stable: softplus(x) = max(x,0) + log1p(exp(-|x|))
        const double v = x[i];
        o[i] = (v > 0.0 ? v : 0.0) + std::log1p(std::exp(-std::fabs(v)));
    }
    return make_node(
        std::move(out), {a},
        [a](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {mul(g, sigmoid_op(a))};
        },
        "softplus");
}

Var log_op(const Var& a) {
    const double* x = a->value.data();
    Tensor out = Tensor::zeros(a->value.dims());
    double* o = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) o[i] = std::log(x[i]);
    return make_node(
        std::move(out), {a},
        [a](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {mul(g, reciprocal(a))};
        },
        "log");
}

Var sqrt_op(const Var& a) {
    const double* x = a->value.data();
    Tensor out = Tensor::zeros(a->value.dims());
    double* o = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) o[i] = std::sqrt(x[i]);
    return make_node(
        std::move(out), {a},
        [a](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {mul(g, scale(reciprocal(sqrt_op(a)), 0.5))};
        },
        "sqrt");
}

Var reciprocal(const Var& a) {
    const double* x = a->value.data();
    Tensor out = Tensor::zeros(a->value.dims());
    double* o = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) o[i] = 1.0 / x[i];
    return make_node(
        std::move(out), {a},
        [a](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            Var r = reciprocal(a);
            return {neg(mul(g, mul(r, r)))};
        },
        "reciprocal");
}

Var abs_op(const Var& a) {
    const double* x = a->value.data();
    Tensor out = Tensor::zeros(a->value.dims());
    Tensor mask = Tensor::zeros(a->value.dims());
    double* o = out.data();
    double* m = mask.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        o[i] = std::fabs(x[i]);
        m[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
    }
    return unary_masked(a, std::move(out), std::move(mask), "abs");
}

Var square(const Var& a) {
    Tensor out = Tensor::zeros(a->value.dims());
    active().mul(a->value.data(), a->value.data(), out.data(), out.size());
    return make_node(
        std::move(out), {a},
        [a](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {mul(g, scale(a, 2.0))};
        },
        "square");
}

Var clamp_op(const Var& a, double lo, double hi) {
    const double* x = a->value.data();
    Tensor out = Tensor::zeros(a->value.dims());
    Tensor mask = Tensor::zeros(a->value.dims());
    active().clamp(x, lo, hi, out.data(), out.size());
    double* m = mask.data();
    for (std::size_t i = 0; i < out.size(); ++i) m[i] = (x[i] >= lo && x[i] <= hi) ? 1.0 : 0.0;
    return unary_masked(a, std::move(out), std::move(mask), "clamp");
}

// --- shape -------------------------------------------------------------------

Var reshape(const Var& a, std::vector<int> dims) {
    Tensor out = a->value.reshaped(dims);
    std::vector<int> prev = a->value.dims();
    return make_node(
        std::move(out), {a},
        [prev](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {reshape(g, prev)};
        },
        "reshape");
}

Var concat_c(const Var& a, const Var& b) {
    const auto& da = a->value.dims();
    const auto& db = b->value.dims();
    if (da.size() != 4 || db.size() != 4 || da[0] != db[0] || da[2] != db[2] || da[3] != db[3])
        throw ShapeError("concat_c: incompatible shapes");
    const int n = da[0], ca = da[1], cb = db[1], h = da[2], w = da[3];
    Tensor out = Tensor::zeros({n, ca + cb, h, w});
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int i = 0; i < n; ++i) {
        double* dst = out.data() + static_cast<std::size_t>(i) * (ca + cb) * plane;
        const double* sa = a->value.data() + static_cast<std::size_t>(i) * ca * plane;
        const double* sb = b->value.data() + static_cast<std::size_t>(i) * cb * plane;
        std::copy(sa, sa + ca * plane, dst);
        std::copy(sb, sb + cb * plane, dst + ca * plane);
    }
    return make_node(
        std::move(out), {a, b},
        [ca, cb](const Var& g, const std::vector<char>& need) -> std::vector<Var> {
            return {need[0] ? slice_c(g, 0, ca) : Var(),
                    need[1] ? slice_c(g, ca, ca + cb) : Var()};
        },
        "concat_c");
}

Var slice_c(const Var& a, int c0, int c1) {
    const auto& d = a->value.dims();
    if (d.size() != 4 || c0 < 0 || c1 > d[1] || c0 >= c1) throw ShapeError("slice_c: bad range");
    const int n = d[0], c = d[1], h = d[2], w = d[3], cs = c1 - c0;
    Tensor out = Tensor::zeros({n, cs, h, w});
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int i = 0; i < n; ++i) {
        const double* src = a->value.data() + (static_cast<std::size_t>(i) * c + c0) * plane;
        double* dst = out.data() + static_cast<std::size_t>(i) * cs * plane;
        std::copy(src, src + cs * plane, dst);
    }
    const int c_total = c;
    return make_node(
        std::move(out), {a},
        [c0, c_total](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {pad_c(g, c0, c_total)};
        },
        "slice_c");
}

Var pad_c(const Var& a, int c0, int c_total) {
    const auto& d = a->value.dims();
    if (d.size() != 4 || c0 < 0 || c0 + d[1] > c_total) throw ShapeError("pad_c: bad range");
    const int n = d[0], cs = d[1], h = d[2], w = d[3];
    Tensor out = Tensor::zeros({n, c_total, h, w});
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int i = 0; i < n; ++i) {
        const double* src = a->value.data() + static_cast<std::size_t>(i) * cs * plane;
        double* dst = out.data() + (static_cast<std::size_t>(i) * c_total + c0) * plane;
        std::copy(src, src + cs * plane, dst);
    }
    const int cs_cap = cs;
    return make_node(
        std::move(out), {a},
        [c0, cs_cap](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {slice_c(g, c0, c0 + cs_cap)};
        },
        "pad_c");
}

Var upsample2(const Var& a) {
    const auto& d = a->value.dims();
    if (d.size() != 4) throw ShapeError("upsample2: rank-4 required");
    const int n = d[0], c = d[1], h = d[2], w = d[3];
    Tensor out = Tensor::zeros({n, c, 2 * h, 2 * w});
    const double* src = a->value.data();
    double* dst = out.data();
    for (int i = 0; i < n * c; ++i) {
        const double* sp = src + static_cast<std::size_t>(i) * h * w;
        double* dp = dst + static_cast<std::size_t>(i) * 4 * h * w;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double v = sp[y * w + x];
                double* q = dp + (2 * y) * (2 * w) + 2 * x;
                q[0] = v;
                q[1] = v;
                q[2 * w] = v;
                q[2 * w + 1] = v;
            }
    }
    return make_node(
        std::move(out), {a},
        [](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {downsample2_sum(g)};
        },
        "upsample2");
}

Var downsample2_sum(const Var& a) {
    const auto& d = a->value.dims();
    if (d.size() != 4 || d[2] % 2 || d[3] % 2) throw ShapeError("downsample2_sum: bad dims");
    const int n = d[0], c = d[1], h = d[2] / 2, w = d[3] / 2;
    Tensor out = Tensor::zeros({n, c, h, w});
    const double* src = a->value.data();
    double* dst = out.data();
    for (int i = 0; i < n * c; ++i) {
        const double* sp = src + static_cast<std::size_t>(i) * 4 * h * w;
        double* dp = dst + static_cast<std::size_t>(i) * h * w;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double* q = sp + (2 * y) * (2 * w) + 2 * x;
                dp[y * w + x] = q[0] + q[1] + q[2 * w] + q[2 * w + 1];
            }
    }
    return make_node(
        std::move(out), {a},
        [](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {upsample2(g)};
        },
        "downsample2_sum");
}

// --- reductions / broadcasts ----------------------------------------------------

Var sum_all(const Var& a) {
    Tensor out = Tensor::scalar(active().sum(a->value.data(), a->value.size()));
    std::vector<int> dims = a->value.dims();
    return make_node(
        std::move(out), {a},
        [dims](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {broadcast_full(g, dims)};
        },
        "sum_all");
}

Var mean_all(const Var& a) {
    return scale(sum_all(a), 1.0 / static_cast<double>(a->value.size()));
}

Var sum_per_sample(const Var& a) {
    const auto& d = a->value.dims();
    if (d.empty()) throw ShapeError("sum_per_sample: rank >= 1 required");
    const int n = d[0];
    const std::size_t stride = a->value.size() / n;
    Tensor out = Tensor::zeros({n});
    for (int i = 0; i < n; ++i)
        out.data()[i] = active().sum(a->value.data() + i * stride, stride);
    std::vector<int> dims = d;
    return make_node(
        std::move(out), {a},
        [dims](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {broadcast_batch(g, dims)};
        },
        "sum_per_sample");
}

Var broadcast_full(const Var& s, std::vector<int> dims) {
    if (s->value.size() != 1) throw ShapeError("broadcast_full: scalar required");
    Tensor out = Tensor::full(dims, s->value.item());
    return make_node(
        std::move(out), {s},
        [](const Var& g, const std::vector<char>&) -> std::vector<Var> { return {sum_all(g)}; },
        "broadcast_full");
}

Var broadcast_batch(const Var& v, std::vector<int> dims) {
    const int n = dims.empty() ? 0 : dims[0];
    if (v->value.rank() != 1 || v->value.dim(0) != n)
        throw ShapeError("broadcast_batch: [N] source required");
    Tensor out = Tensor::zeros(dims);
    const std::size_t stride = out.size() / n;
    for (int i = 0; i < n; ++i) {
        double* dst = out.data() + i * stride;
        const double val = v->value.data()[i];
        for (std::size_t j = 0; j < stride; ++j) dst[j] = val;
    }
    return make_node(
        std::move(out), {v},
        [](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {sum_per_sample(g)};
        },
        "broadcast_batch");
}

Var broadcast_c(const Var& v, std::vector<int> dims) {
    if (dims.size() != 4 || v->value.rank() != 1 || v->value.dim(0) != dims[1])
        throw ShapeError("broadcast_c: [C] source and rank-4 target required");
    const int n = dims[0], c = dims[1], h = dims[2], w = dims[3];
    Tensor out = Tensor::zeros(dims);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) {
            double* dst = out.data() + (static_cast<std::size_t>(i) * c + j) * plane;
            const double val = v->value.data()[j];
            for (std::size_t q = 0; q < plane; ++q) dst[q] = val;
        }
    return make_node(
        std::move(out), {v},
        [](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {channel_sum(g)};
        },
        "broadcast_c");
}

Var channel_sum(const Var& a) {
    const auto& d = a->value.dims();
    if (d.size() != 4) throw ShapeError("channel_sum: rank-4 required");
    const int n = d[0], c = d[1];
    const std::size_t plane = static_cast<std::size_t>(d[2]) * d[3];
    Tensor out = Tensor::zeros({c});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j)
            out.data()[j] += active().sum(
                a->value.data() + (static_cast<std::size_t>(i) * c + j) * plane, plane);
    std::vector<int> dims = d;
    return make_node(
        std::move(out), {a},
        [dims](const Var& g, const std::vector<char>&) -> std::vector<Var> {
            return {broadcast_c(g, dims)};
        },
        "channel_sum");
}

Var mean_abs(const Var& a) { return mean_all(abs_op(a)); }
Var mean_sq(const Var& a) { return mean_all(square(a)); }

// --- linear algebra ------------------------------------------------------------

namespace {

enum class MM { NN, NT, TN };

void mm_value(MM mode, const Tensor& a, const Tensor& b, Tensor& c,
              std::size_t m, std::size_t n, std::size_t k) {
    const auto& kern = active();
    const double* ap = a.data();
    const double* bp = b.data();
    double* cp = c.data();
    const double flops = static_cast<double>(m) * n * k;
    auto& pool = ThreadPool::instance();
    const bool par = flops > 250000.0 && pool.size() > 1;
    switch (mode) {
        case MM::NN:
            if (par && n >= 32) {
                pool.parallel_for(n, 32, [&](std::size_t j0, std::size_t j1) {
                    kern.gemm_nn(ap, k, bp + j0, n, cp + j0, n, m, j1 - j0, k, false);
                });
            } else {
                kern.gemm_nn(ap, k, bp, n, cp, n, m, n, k, false);
            }
            break;
        case MM::NT:
            if (par && m >= 2) {
                pool.parallel_for(m, 1, [&](std::size_t i0, std::size_t i1) {
                    kern.gemm_nt(ap + i0 * k, k, bp, k, cp + i0 * n, n, i1 - i0, n, k, false);
                });
            } else {
                kern.gemm_nt(ap, k, bp, k, cp, n, m, n, k, false);
            }
            break;
        case MM::TN:
            if (par && n >= 32) {
                pool.parallel_for(n, 32, [&](std::size_t j0, std::size_t j1) {
                    kern.gemm_tn(ap, m, bp + j0, n, cp + j0, n, m, j1 - j0, k, false);
                });
            } else {
                kern.gemm_tn(ap, m, bp, n, cp, n, m, n, k, false);
            }
            break;
    }
}

}  // namespace

Var matmul_nn(const Var& a, const Var& b) {
    const auto& da = a->value.dims();
    const auto& db = b->value.dims();
    if (da.size() != 2 || db.size() != 2 || da[1] != db[0]) throw ShapeError("matmul_nn: bad shapes");
    const std::size_t m = da[0], k = da[1], n = db[1];
    Tensor out = Tensor::zeros({da[0], db[1]});
    mm_value(MM::NN, a->value, b->value, out, m, n, k);
    return make_node(
        std::move(out), {a, b},
        [a, b](const Var& g, const std::vector<char>& need) -> std::vector<Var> {
            return {need[0] ? matmul_nt(g, b) : Var(), need[1] ? matmul_tn(a, g) : Var()};
        },
        "matmul_nn");
}

Var matmul_nt(const Var& a, const Var& b) {
    const auto& da = a->value.dims();
    const auto& db = b->value.dims();
    if (da.size() != 2 || db.size() != 2 || da[1] != db[1]) throw ShapeError("matmul_nt: bad shapes");
    const std::size_t m = da[0], k = da[1], n = db[0];
    Tensor out = Tensor::zeros({da[0], db[0]});
    mm_value(MM::NT, a->value, b->value, out, m, n, k);
    return make_node(
        std::move(out), {a, b},
        [a, b](const Var& g, const std::vector<char>& need) -> std::vector<Var> {
            return {need[0] ? matmul_nn(g, b) : Var(), need[1] ? matmul_tn(g, a) : Var()};
        },
        "matmul_nt");
}

Var matmul_tn(const Var& a, const Var& b) {
    const auto& da = a->value.dims();
    const auto& db = b->value.dims();
    if (da.size() != 2 || db.size() != 2 || da[0] != db[0]) throw ShapeError("matmul_tn: bad shapes");
    const std::size_t k = da[0], m = da[1], n = db[1];
    Tensor out = Tensor::zeros({da[1], db[1]});
    mm_value(MM::TN, a->value, b->value, out, m, n, k);
    return make_node(
        std::move(out), {a, b},
        [a, b](const Var& g, const std::vector<char>& need) -> std::vector<Var> {
            return {need[0] ? matmul_nt(b, g) : Var(), need[1] ? matmul_nn(a, g) : Var()};
        },
        "matmul_tn");
}

Var linear(const Var& x, const Var& w, const Var& b) {
    const int n = x->value.dim(0);
    const int out_dim = w->value.dim(0);
    Var y = matmul_nt(x, w);
    Var bb = reshape(broadcast_c(b, {n, out_dim, 1, 1}), {n, out_dim});
    return add(y, bb);
}

Var bias_add(const Var& x, const Var& b) { return add(x, broadcast_c(b, x->value.dims())); }

Var conv2d(const Var& x, const Var& w, const Var& b, ConvGeom g) {
    return bias_add(conv_fwd(x, w, g), b);
}

}  // namespace vg::nn
