#pragma once

#include <cstdint>
#include <vector>

#include "venomguard/nn/autodiff.hpp"

namespace vg::nn {

// Adam with (0.5, 0.999) moment decay, the convention of the GAN training
// loops this project reproduces. Updates leaf values in place.
class Adam {
public:
    Adam() = default;
    Adam(double lr, double beta1 = 0.5, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Var>& params, const std::vector<Var>& grads);

    // Allocates zero moments matching params; required before deserialize
    // when no step has run yet.
    void init_moments(const std::vector<Var>& params);

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    std::int64_t t() const { return t_; }

    // Raw state for exact training resume.
    std::vector<double> serialize_state() const;
    void deserialize_state(const std::vector<double>& raw);

private:
    double lr_ = 1e-4;
    double beta1_ = 0.5;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    std::int64_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace vg::nn
