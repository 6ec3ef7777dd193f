#pragma once

#include <vector>

#include "venomguard/nn/autodiff.hpp"

// Primitive ops. Every backward rule is built from these same primitives, so
// the whole set is closed under differentiation; see conv_* for the
// convolution triad whose members act as each other's adjoints.

namespace vg::nn {

struct ConvGeom {
    int kernel = 3;
    int stride = 1;
    int pad = 1;
};

// --- elementwise -------------------------------------------------------------
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var neg(const Var& a);
Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var tanh_op(const Var& a);
Var sigmoid_op(const Var& a);
Var softplus_op(const Var& a);
Var log_op(const Var& a);
Var sqrt_op(const Var& a);
Var reciprocal(const Var& a);
Var abs_op(const Var& a);
Var square(const Var& a);
Var clamp_op(const Var& a, double lo, double hi);

// --- shape -------------------------------------------------------------------
Var reshape(const Var& a, std::vector<int> dims);
Var concat_c(const Var& a, const Var& b);        // along dim 1 of [N,C,H,W]
Var slice_c(const Var& a, int c0, int c1);
Var pad_c(const Var& a, int c0, int c_total);    // embed channels at offset c0
Var upsample2(const Var& a);                     // nearest x2
Var downsample2_sum(const Var& a);               // 2x2 block sum (adjoint)

// --- reductions / broadcasts ---------------------------------------------------
Var sum_all(const Var& a);                             // -> [1]
Var mean_all(const Var& a);                            // -> [1]
Var sum_per_sample(const Var& a);                      // [N,...] -> [N]
Var broadcast_full(const Var& s, std::vector<int> dims);   // [1] -> dims
Var broadcast_batch(const Var& v, std::vector<int> dims);  // [N] -> [N,...]
Var broadcast_c(const Var& v, std::vector<int> dims);      // [C] -> [N,C,H,W]
Var channel_sum(const Var& a);                         // [N,C,H,W] -> [C]
Var mean_abs(const Var& a);                            // composite
Var mean_sq(const Var& a);                             // composite

// --- linear algebra ------------------------------------------------------------
Var matmul_nn(const Var& a, const Var& b);  // [m,k]x[k,n]
Var matmul_nt(const Var& a, const Var& b);  // [m,k]x[n,k]^T
Var matmul_tn(const Var& a, const Var& b);  // [k,m]^T x [k,n]
Var linear(const Var& x, const Var& w, const Var& b);  // x[N,in], w[out,in], b[out]

// --- convolution triad -----------------------------------------------------------
Var conv_fwd(const Var& x, const Var& w, ConvGeom g);
Var conv_data(const Var& gy, const Var& w, ConvGeom g, std::vector<int> x_dims);
Var conv_wt(const Var& x, const Var& gy, ConvGeom g, std::vector<int> w_dims);
Var conv2d(const Var& x, const Var& w, const Var& b, ConvGeom g);  // + bias
Var bias_add(const Var& x, const Var& b);

}  // namespace vg::nn
