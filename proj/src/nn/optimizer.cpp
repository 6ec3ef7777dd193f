#include "venomguard/nn/optimizer.hpp"

#include <cmath>

namespace vg::nn {

void Adam::init_moments(const std::vector<Var>& params) {
    if (!m_.empty()) return;
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
        m_.push_back(Tensor::zeros(p->value.dims()));
        v_.push_back(Tensor::zeros(p->value.dims()));
    }
}

void Adam::step(const std::vector<Var>& params, const std::vector<Var>& grads) {
    if (params.size() != grads.size()) throw ShapeError("Adam::step: param/grad count mismatch");
    init_moments(params);
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        double* p = params[i]->value.data();
        const double* g = grads[i]->value.data();
        double* m = m_[i].data();
        double* v = v_[i].data();
        const std::size_t n = params[i]->value.size();
        for (std::size_t j = 0; j < n; ++j) {
            m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
            v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
            const double mh = m[j] / c1;
            const double vh = v[j] / c2;
            p[j] -= lr_ * mh / (std::sqrt(vh) + eps_);
        }
    }
}

std::vector<double> Adam::serialize_state() const {
    std::vector<double> out;
    out.push_back(static_cast<double>(t_));
    for (const auto& t : m_) out.insert(out.end(), t.data(), t.data() + t.size());
    for (const auto& t : v_) out.insert(out.end(), t.data(), t.data() + t.size());
    return out;
}

void Adam::deserialize_state(const std::vector<double>& raw) {
    if (raw.empty()) throw ConfigError("Adam state: empty payload");
    t_ = static_cast<std::int64_t>(raw[0]);
    std::size_t need = 1;
    for (const auto& t : m_) need += 2 * t.size();
    if (m_.empty() || raw.size() != need)
        throw ConfigError("Adam state: size mismatch (load after first step or init moments)");
    std::size_t off = 1;
    for (auto& t : m_) {
        std::copy(raw.begin() + off, raw.begin() + off + t.size(), t.data());
        off += t.size();
    }
    for (auto& t : v_) {
        std::copy(raw.begin() + off, raw.begin() + off + t.size(), t.data());
        off += t.size();
    }
}

}  // namespace vg::nn
