#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "venomguard/nn/tensor.hpp"

// Define-by-run reverse-mode autodiff. Backward rules are expressed through
// the same recorded primitives, so gradients are themselves differentiable
// (grad with create_graph=true), which the gradient-penalty and unrolled
// training paths rely on.

namespace vg::nn {

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
    Tensor value;
    bool requires_grad = false;
    std::uint64_t seq = 0;  // creation order; a valid topological order
    std::vector<Var> inputs;
    // Produces per-input gradients given the output gradient. Entries whose
    // need flag is false may be returned as null.
    std::function<std::vector<Var>(const Var& g, const std::vector<char>& need)> grad_fn;
    const char* op = "";
};

// --- recording mode ---------------------------------------------------------

bool grad_enabled();

struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;

private:
    bool prev_;
};

struct GradModeGuard {
    explicit GradModeGuard(bool enabled);
    ~GradModeGuard();
    GradModeGuard(const GradModeGuard&) = delete;

private:
    bool prev_;
};

// --- node construction -------------------------------------------------------

Var constant(Tensor value);
Var leaf(Tensor value);  // requires_grad = true
Var detach(const Var& v);

// Internal helper for op implementations: records inputs/grad_fn only when
// grad mode is on and some input requires grad.
Var make_node(Tensor value, std::vector<Var> inputs,
              std::function<std::vector<Var>(const Var&, const std::vector<char>&)> grad_fn,
              const char* op);

// --- differentiation ---------------------------------------------------------

// d(root)/d(wrt). root must be a single-element tensor unless seed is given.
// With create_graph the returned gradients carry history and can be
// differentiated again. Unreachable wrt entries yield explicit zeros.
std::vector<Var> grad(const Var& root, const std::vector<Var>& wrt, bool create_graph,
                      Tensor seed = Tensor());

}  // namespace vg::nn
