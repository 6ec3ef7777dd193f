#include "venomguard/nn/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_map>
#include <unordered_set>

#include "venomguard/nn/ops.hpp"

namespace vg::nn {

namespace {
thread_local bool g_grad_enabled = true;
std::atomic<std::uint64_t> g_seq{1};
}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

GradModeGuard::GradModeGuard(bool enabled) : prev_(g_grad_enabled) { g_grad_enabled = enabled; }
GradModeGuard::~GradModeGuard() { g_grad_enabled = prev_; }

Var constant(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->seq = g_seq.fetch_add(1, std::memory_order_relaxed);
    n->op = "const";
    return n;
}

Var leaf(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = true;
    n->seq = g_seq.fetch_add(1, std::memory_order_relaxed);
    n->op = "leaf";
    return n;
}

Var detach(const Var& v) { return constant(v->value); }

Var make_node(Tensor value, std::vector<Var> inputs,
              std::function<std::vector<Var>(const Var&, const std::vector<char>&)> grad_fn,
              const char* op) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->seq = g_seq.fetch_add(1, std::memory_order_relaxed);
    n->op = op;
    if (g_grad_enabled) {
        bool any = false;
        for (const auto& in : inputs)
            if (in->requires_grad) {
                any = true;
                break;
            }
        if (any) {
            n->requires_grad = true;
            n->inputs = std::move(inputs);
            n->grad_fn = std::move(grad_fn);
        }
    }
    return n;
}

std::vector<Var> grad(const Var& root, const std::vector<Var>& wrt, bool create_graph,
                      Tensor seed) {
    std::unordered_set<const Node*> targets;
    for (const auto& w : wrt) targets.insert(w.get());

    // Mark nodes that can reach a wrt node (iterative post-order DFS,
    // 0 = unseen, 1 = in progress, 2 = done).
    std::unordered_map<const Node*, char> state;
    std::unordered_map<const Node*, bool> reaches;
    {
        std::vector<std::pair<const Node*, std::size_t>> stack;
        stack.emplace_back(root.get(), 0);
        state[root.get()] = 1;
        while (!stack.empty()) {
            auto& [node, idx] = stack.back();
            if (idx < node->inputs.size()) {
                const Node* child = node->inputs[idx].get();
                ++idx;
                if (state[child] == 0) {
                    state[child] = 1;
                    stack.emplace_back(child, 0);
                }
                continue;
            }
            bool r = targets.count(node) > 0;
            for (const auto& in : node->inputs)
                if (reaches[in.get()]) {
                    r = true;
                    break;
                }
            reaches[node] = r;
            state[node] = 2;
            stack.pop_back();
        }
    }

    std::vector<Var> result(wrt.size());
    auto finish = [&] {
        for (std::size_t i = 0; i < wrt.size(); ++i)
            if (!result[i]) result[i] = constant(Tensor::zeros(wrt[i]->value.dims()));
        return result;
    };
    if (!reaches[root.get()]) return finish();

    GradModeGuard mode(create_graph);

    std::unordered_map<const Node*, Var> gmap;
    if (seed.defined()) {
        if (!seed.same_shape(root->value)) throw ShapeError("grad seed shape mismatch");
        gmap[root.get()] = constant(std::move(seed));
    } else {
        if (root->value.size() != 1) throw ShapeError("grad() root must be scalar without seed");
        gmap[root.get()] = constant(Tensor::scalar(1.0));
    }

    // Active subgraph in reverse creation order (creation order is a valid
    // topological order in a define-by-run graph).
    std::vector<const Node*> order;
    std::unordered_map<const Node*, Var> holder;  // keeps shared ownership
    {
        std::vector<Var> stack{root};
        std::unordered_set<const Node*> seen;
        while (!stack.empty()) {
            Var v = stack.back();
            stack.pop_back();
            if (seen.count(v.get())) continue;
            seen.insert(v.get());
            order.push_back(v.get());
            holder.emplace(v.get(), v);
            for (const auto& in : v->inputs)
                if (reaches[in.get()] && !seen.count(in.get())) stack.push_back(in);
        }
        std::sort(order.begin(), order.end(),
                  [](const Node* a, const Node* b) { return a->seq > b->seq; });
    }

    for (const Node* node : order) {
        auto it = gmap.find(node);
        if (it == gmap.end() || !node->grad_fn) continue;
        Var g = it->second;
        std::vector<char> need(node->inputs.size(), 0);
        bool any_need = false;
        for (std::size_t i = 0; i < node->inputs.size(); ++i) {
            const Node* in = node->inputs[i].get();
            need[i] = in->requires_grad && reaches[in];
            any_need = any_need || need[i];
        }
        if (!any_need) {
            if (!targets.count(node)) gmap.erase(node);
            continue;
        }
        std::vector<Var> gs = node->grad_fn(g, need);
        for (std::size_t i = 0; i < node->inputs.size(); ++i) {
            if (!need[i] || !gs[i]) continue;
            const Node* in = node->inputs[i].get();
            auto jt = gmap.find(in);
            if (jt == gmap.end())
                gmap[in] = gs[i];
            else
                jt->second = add(jt->second, gs[i]);
        }
        if (!targets.count(node)) gmap.erase(node);
    }

    for (std::size_t i = 0; i < wrt.size(); ++i) {
        auto it = gmap.find(wrt[i].get());
        if (it != gmap.end()) result[i] = it->second;
    }
    return finish();
}

}  // namespace vg::nn
