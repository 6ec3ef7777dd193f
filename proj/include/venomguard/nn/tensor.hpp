#pragma once

#include <cstddef>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "venomguard/common/errors.hpp"

namespace vg::nn {

// Dense row-major double tensor. Storage is shared between views (reshape);
// by convention tensors flowing through the graph are not mutated after
// creation, except optimizer updates on parameter leaves.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> dims) {
        Tensor t;
        t.dims_ = std::move(dims);
        t.size_ = count(t.dims_);
        t.buf_ = std::make_shared<std::vector<double>>(t.size_, 0.0);
        return t;
    }

    static Tensor full(std::vector<int> dims, double v) {
        Tensor t = zeros(std::move(dims));
        for (auto& e : *t.buf_) e = v;
        return t;
    }

    static Tensor scalar(double v) { return full({1}, v); }

    static Tensor from(std::vector<int> dims, std::vector<double> values) {
        Tensor t;
        t.dims_ = std::move(dims);
        t.size_ = count(t.dims_);
        if (t.size_ != values.size()) throw ShapeError("tensor init size mismatch");
        t.buf_ = std::make_shared<std::vector<double>>(std::move(values));
        return t;
    }

    bool defined() const { return static_cast<bool>(buf_); }
    std::size_t size() const { return size_; }
    const std::vector<int>& dims() const { return dims_; }
    int dim(std::size_t i) const { return dims_[i]; }
    std::size_t rank() const { return dims_.size(); }

    double* data() { return buf_->data(); }
    const double* data() const { return buf_->data(); }

    double item() const {
        if (size_ != 1) throw ShapeError("item() on non-scalar tensor");
        return (*buf_)[0];
    }

    Tensor clone() const {
        Tensor t;
        t.dims_ = dims_;
        t.size_ = size_;
        t.buf_ = std::make_shared<std::vector<double>>(*buf_);
        return t;
    }

    // Shares storage.
    Tensor reshaped(std::vector<int> new_dims) const {
        if (count(new_dims) != size_) throw ShapeError("reshape element count mismatch");
        Tensor t;
        t.dims_ = std::move(new_dims);
        t.size_ = size_;
        t.buf_ = buf_;
        return t;
    }

    bool same_shape(const Tensor& o) const { return dims_ == o.dims_; }

    static std::string shape_str(const std::vector<int>& d) {
        std::string s = "[";
        for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
        return s + "]";
    }

private:
    static std::size_t count(const std::vector<int>& d) {
        std::size_t n = 1;
        for (int v : d) {
            if (v <= 0) throw ShapeError("non-positive dimension");
            n *= static_cast<std::size_t>(v);
        }
        return n;
    }

    std::shared_ptr<std::vector<double>> buf_;
    std::vector<int> dims_;
    std::size_t size_ = 0;
};

}  // namespace vg::nn
