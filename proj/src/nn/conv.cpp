#include <vector>

#include "venomguard/common/threadpool.hpp"
#include "venomguard/kernels/kernels.hpp"
#include "venomguard/nn/ops.hpp"

// Convolution forward / input-grad / weight-grad as a closed triad: each
// member's backward rule is expressed with the other two, which is what makes
// gradient-penalty and unrolled-training double backward work. Values are
// computed through im2col + GEMM on transient buffers.

namespace vg::nn {

namespace {

struct ConvDims {
    int n, ci, h, w;   // input
    int co, k, s, p;   // filter / geometry
    int oh, ow;

    static ConvDims make(const std::vector<int>& x_dims, const std::vector<int>& w_dims,
                         ConvGeom g) {
        if (x_dims.size() != 4 || w_dims.size() != 4) throw ShapeError("conv: rank-4 required");
        if (x_dims[1] != w_dims[1]) throw ShapeError("conv: channel mismatch");
        if (w_dims[2] != g.kernel || w_dims[3] != g.kernel) throw ShapeError("conv: kernel mismatch");
        ConvDims d;
        d.n = x_dims[0];
        d.ci = x_dims[1];
        d.h = x_dims[2];
        d.w = x_dims[3];
        d.co = w_dims[0];
        d.k = g.kernel;
        d.s = g.stride;
        d.p = g.pad;
        d.oh = (d.h + 2 * d.p - d.k) / d.s + 1;
        d.ow = (d.w + 2 * d.p - d.k) / d.s + 1;
        if (d.oh < 1 || d.ow < 1) throw ShapeError("conv: output collapses");
        return d;
    }

    std::size_t cols_rows() const { return static_cast<std::size_t>(ci) * k * k; }
    std::size_t cols_cols() const { return static_cast<std::size_t>(oh) * ow; }
    std::size_t in_plane() const { return static_cast<std::size_t>(h) * w; }
    std::size_t out_plane() const { return static_cast<std::size_t>(oh) * ow; }
};

// cols[(ci*k+kh)*k+kw][oy*ow+ox] = x[ci][oy*s+kh-p][ox*s+kw-p] (0 outside)
void im2col(const ConvDims& d, const double* x, double* cols) {
    const std::size_t ncols = d.cols_cols();
    for (int ci = 0; ci < d.ci; ++ci) {
        const double* xp = x + ci * d.in_plane();
        for (int kh = 0; kh < d.k; ++kh)
            for (int kw = 0; kw < d.k; ++kw) {
                double* row = cols + (static_cast<std::size_t>(ci) * d.k * d.k + kh * d.k + kw) * ncols;
                for (int oy = 0; oy < d.oh; ++oy) {
                    const int iy = oy * d.s + kh - d.p;
                    double* dst = row + static_cast<std::size_t>(oy) * d.ow;
                    if (iy < 0 || iy >= d.h) {
                        for (int ox = 0; ox < d.ow; ++ox) dst[ox] = 0.0;
                        continue;
                    }
                    const double* src = xp + static_cast<std::size_t>(iy) * d.w;
                    for (int ox = 0; ox < d.ow; ++ox) {
                        const int ix = ox * d.s + kw - d.p;
                        dst[ox] = (ix >= 0 && ix < d.w) ? src[ix] : 0.0;
                    }
                }
            }
    }
}

void col2im(const ConvDims& d, const double* cols, double* x) {
    const std::size_t ncols = d.cols_cols();
    for (std::size_t i = 0; i < static_cast<std::size_t>(d.ci) * d.in_plane(); ++i) x[i] = 0.0;
    for (int ci = 0; ci < d.ci; ++ci) {
        double* xp = x + ci * d.in_plane();
        for (int kh = 0; kh < d.k; ++kh)
            for (int kw = 0; kw < d.k; ++kw) {
                const double* row =
                    cols + (static_cast<std::size_t>(ci) * d.k * d.k + kh * d.k + kw) * ncols;
                for (int oy = 0; oy < d.oh; ++oy) {
                    const int iy = oy * d.s + kh - d.p;
                    if (iy < 0 || iy >= d.h) continue;
                    double* dst = xp + static_cast<std::size_t>(iy) * d.w;
                    const double* src = row + static_cast<std::size_t>(oy) * d.ow;
                    for (int ox = 0; ox < d.ow; ++ox) {
                        const int ix = ox * d.s + kw - d.p;
                        if (ix >= 0 && ix < d.w) dst[ix] += src[ox];
                    }
                }
            }
    }
}

Tensor conv_fwd_value(const ConvDims& d, const Tensor& x, const Tensor& w) {
    Tensor y = Tensor::zeros({d.n, d.co, d.oh, d.ow});
    const std::size_t kr = d.cols_rows(), kc = d.cols_cols();
    const std::size_t in_sz = static_cast<std::size_t>(d.ci) * d.in_plane();
    const std::size_t out_sz = static_cast<std::size_t>(d.co) * d.out_plane();
    ThreadPool::instance().parallel_for(d.n, 2, [&](std::size_t b, std::size_t e) {
        std::vector<double> cols(kr * kc);
        for (std::size_t i = b; i < e; ++i) {
            im2col(d, x.data() + i * in_sz, cols.data());
            kernels::active().gemm_nn(w.data(), kr, cols.data(), kc, y.data() + i * out_sz, kc,
                                      d.co, kc, kr, false);
        }
    });
    return y;
}

Tensor conv_data_value(const ConvDims& d, const Tensor& gy, const Tensor& w) {
    Tensor gx = Tensor::zeros({d.n, d.ci, d.h, d.w});
    const std::size_t kr = d.cols_rows(), kc = d.cols_cols();
    const std::size_t in_sz = static_cast<std::size_t>(d.ci) * d.in_plane();
    const std::size_t out_sz = static_cast<std::size_t>(d.co) * d.out_plane();
    ThreadPool::instance().parallel_for(d.n, 2, [&](std::size_t b, std::size_t e) {
        std::vector<double> cols(kr * kc);
        for (std::size_t i = b; i < e; ++i) {
            kernels::active().gemm_tn(w.data(), kr, gy.data() + i * out_sz, kc, cols.data(), kc,
                                      kr, kc, d.co, false);
            col2im(d, cols.data(), gx.data() + i * in_sz);
        }
    });
    return gx;
}

Tensor conv_wt_value(const ConvDims& d, const Tensor& x, const Tensor& gy) {
    Tensor gw = Tensor::zeros({d.co, d.ci, d.k, d.k});
    const std::size_t kr = d.cols_rows(), kc = d.cols_cols();
    const std::size_t in_sz = static_cast<std::size_t>(d.ci) * d.in_plane();
    const std::size_t out_sz = static_cast<std::size_t>(d.co) * d.out_plane();
    // Samples are accumulated in order; only the GEMM is partitioned (over
    // output rows), so the result does not depend on the thread count.
    std::vector<double> cols(kr * kc);
    auto& pool = ThreadPool::instance();
    const bool par = pool.size() > 1 && static_cast<double>(d.co) * kr * kc > 250000.0;
    for (int i = 0; i < d.n; ++i) {
        im2col(d, x.data() + i * in_sz, cols.data());
        const double* gp = gy.data() + i * out_sz;
        if (par) {
            pool.parallel_for(d.co, 1, [&](std::size_t r0, std::size_t r1) {
                kernels::active().gemm_nt(gp + r0 * kc, kc, cols.data(), kc,
                                          gw.data() + r0 * kr, kr, r1 - r0, kr, kc, true);
            });
        } else {
            kernels::active().gemm_nt(gp, kc, cols.data(), kc, gw.data(), kr, d.co, kr, kc, true);
        }
    }
    return gw;
}

}  // namespace

Var conv_fwd(const Var& x, const Var& w, ConvGeom g) {
    ConvDims d = ConvDims::make(x->value.dims(), w->value.dims(), g);
    Tensor y = conv_fwd_value(d, x->value, w->value);
    std::vector<int> x_dims = x->value.dims();
    std::vector<int> w_dims = w->value.dims();
    return make_node(
        std::move(y), {x, w},
        [x, w, g, x_dims, w_dims](const Var& gv, const std::vector<char>& need) -> std::vector<Var> {
            return {need[0] ? conv_data(gv, w, g, x_dims) : Var(),
                    need[1] ? conv_wt(x, gv, g, w_dims) : Var()};
        },
        "conv_fwd");
}

Var conv_data(const Var& gy, const Var& w, ConvGeom g, std::vector<int> x_dims) {
    ConvDims d = ConvDims::make(x_dims, w->value.dims(), g);
    if (gy->value.dims() != std::vector<int>{d.n, d.co, d.oh, d.ow})
        throw ShapeError("conv_data: grad shape mismatch");
    Tensor gx = conv_data_value(d, gy->value, w->value);
    std::vector<int> w_dims = w->value.dims();
    return make_node(
        std::move(gx), {gy, w},
        [gy, w, g, x_dims, w_dims](const Var& u, const std::vector<char>& need) -> std::vector<Var> {
            return {need[0] ? conv_fwd(u, w, g) : Var(),
                    need[1] ? conv_wt(u, gy, g, w_dims) : Var()};
        },
        "conv_data");
}

Var conv_wt(const Var& x, const Var& gy, ConvGeom g, std::vector<int> w_dims) {
    ConvDims d = ConvDims::make(x->value.dims(), w_dims, g);
    if (gy->value.dims() != std::vector<int>{d.n, d.co, d.oh, d.ow})
        throw ShapeError("conv_wt: grad shape mismatch");
    Tensor gw = conv_wt_value(d, x->value, gy->value);
    std::vector<int> x_dims = x->value.dims();
    return make_node(
        std::move(gw), {x, gy},
        [x, gy, g, x_dims](const Var& v, const std::vector<char>& need) -> std::vector<Var> {
            return {need[0] ? conv_data(gy, v, g, x_dims) : Var(),
                    need[1] ? conv_fwd(x, v, g) : Var()};
        },
        "conv_wt");
}

}  // namespace vg::nn
