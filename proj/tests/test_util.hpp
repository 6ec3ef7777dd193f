#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "venomguard/common/rng.hpp"
#include "venomguard/nn/autodiff.hpp"

// Shared test helpers: random tensors and the central finite-difference
// oracle used by every gradient-correctness check. The oracle only re-runs
// the loss closure and never touches the analytic backward path.

namespace vgtest {

inline vg::nn::Tensor random_tensor(std::vector<int> dims, vg::Rng& rng, double lo = 0.0,
                                    double hi = 1.0) {
    vg::nn::Tensor t = vg::nn::Tensor::zeros(std::move(dims));
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(lo, hi);
    return t;
}

// d f / d leaf by central differences; f() must rebuild the loss from the
// current leaf values.
inline std::vector<double> fd_grad(const vg::nn::Var& leaf, const std::function<double()>& f,
                                   double h = 1e-6) {
    std::vector<double> g(leaf->value.size());
    double* v = leaf->value.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double orig = v[i];
        v[i] = orig + h;
        const double fp = f();
        v[i] = orig - h;
        const double fm = f();
        v[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// max_i |a_i - b_i| / (max_i |b_i| + eps)
inline double grad_rel_err(const vg::nn::Var& analytic, const std::vector<double>& fd) {
    double num = 0.0, den = 0.0;
    const double* a = analytic->value.data();
    for (std::size_t i = 0; i < fd.size(); ++i) {
        num = std::max(num, std::fabs(a[i] - fd[i]));
        den = std::max(den, std::fabs(fd[i]));
    }
    return num / (den + 1e-12);
}

}  // namespace vgtest
