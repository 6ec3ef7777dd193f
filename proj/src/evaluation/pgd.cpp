#include "venomguard/evaluation/pgd.hpp"

#include <cmath>

#include "venomguard/nn/ops.hpp"
#include "venomguard/training/domains.hpp"

namespace vg::evaluation {

dataio::ImageTensor pgd_attack(const models::ModelHandle& editor, const dataio::ImageTensor& x,
                               const dataio::DomainLabel& own_label,
                               const std::string& domain_tag, double eps, int steps) {
    if (steps < 1) throw ConfigError("pgd_attack: steps must be >= 1");
    const training::DomainSet& set = training::domain_set(domain_tag);

    nn::Tensor x0 = dataio::to_tensor(x);
    const auto& d = x0.dims();
    nn::Tensor xb = x0.reshaped({1, d[0], d[1], d[2]});

    std::vector<nn::Tensor> targets;
    std::vector<nn::Tensor> clean_out;
    for (const auto& tr : set.transforms) {
        targets.push_back(models::labels_tensor({tr.apply(own_label)}));
        nn::NoGradGuard ng;
        clean_out.push_back(
            models::editor_forward(editor, nn::constant(xb), targets.back())->value);
    }

    nn::Tensor cur = xb.clone();
    const double alpha = 2.5 * eps / static_cast<double>(steps);
    for (int it = 0; it < steps; ++it) {
        nn::Var xv = nn::leaf(cur.clone());
        nn::Var loss;
        for (std::size_t j = 0; j < targets.size(); ++j) {
            nn::Var term = nn::mean_abs(nn::sub(models::editor_forward(editor, xv, targets[j]),
                                                nn::constant(clean_out[j])));
            loss = loss ? nn::add(loss, term) : term;
        }
        nn::Var g = nn::grad(loss, {xv}, false)[0];
        double* c = cur.data();
        const double* gv = g->value.data();
        const double* orig = xb.data();
        for (std::size_t i = 0; i < cur.size(); ++i) {
            double v = c[i] + alpha * (gv[i] > 0.0 ? 1.0 : (gv[i] < 0.0 ? -1.0 : 0.0));
            v = std::min(std::max(v, orig[i] - eps), orig[i] + eps);
            c[i] = std::min(std::max(v, 0.0), 1.0);
        }
    }
    dataio::ImageTensor out = dataio::from_tensor(cur);
    const float feps = static_cast<float>(eps);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const float xf = x.data[i];
        float& pf = out.data[i];
        if (std::fabs(static_cast<double>(pf) - xf) > eps) {
            pf = pf > xf ? xf + feps : xf - feps;
            while (std::fabs(static_cast<double>(pf) - xf) > eps) pf = std::nextafterf(pf, xf);
        }
    }
    return out;
}

}  // namespace vg::evaluation
