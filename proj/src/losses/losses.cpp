#include "venomguard/losses/losses.hpp"

#include <cmath>

namespace vg::losses {

using models::critic_forward;
using models::editor_forward;
using models::ModelHandle;
using nn::Var;

namespace {

// x_hat = u*x + (1-u)*x', u ~ U(0,1) per sample, as a recorded expression so
// input-gradients flow through the penalty.
Var interpolate(const Var& x, const Var& xp, Rng& rng) {
    const auto& dims = x->value.dims();
    nn::Tensor u = nn::Tensor::zeros(dims);
    const int n = dims[0];
    const std::size_t stride = u.size() / static_cast<std::size_t>(n);
    for (int i = 0; i < n; ++i) {
        const double v = rng.uniform();
        double* dst = u.data() + static_cast<std::size_t>(i) * stride;
        for (std::size_t j = 0; j < stride; ++j) dst[j] = v;
    }
    nn::Tensor uc = u.clone();
    double* d = uc.data();
    for (std::size_t i = 0; i < uc.size(); ++i) d[i] = 1.0 - d[i];
    return nn::add(nn::mul(x, nn::constant(std::move(u))),
                   nn::mul(xp, nn::constant(std::move(uc))));
}

Var replicate_mask(const Var& mask, int channels) {
    if (mask->value.dim(1) == channels) return mask;
    Var m = mask;
    for (int c = 1; c < channels; ++c) m = nn::concat_c(m, mask);
    return m;
}

}  // namespace

nn::Var adversarial_loss(const ModelHandle& d_b, const Var& x, const Var& xp, AdvMode mode,
                         const LossWeights& weights, Rng& rng) {
    if (!x->value.same_shape(xp->value)) throw ShapeError("adversarial_loss: shape mismatch");
    if (mode == AdvMode::Generator) {
        return nn::neg(nn::mean_all(critic_forward(d_b, xp).realness));
    }
    Var score_real = nn::mean_all(critic_forward(d_b, x).realness);
    Var score_fake = nn::mean_all(critic_forward(d_b, xp).realness);

    Var xhat = interpolate(x, xp, rng);
    Var s = nn::sum_all(critic_forward(d_b, xhat).realness);
    Var gxhat = nn::grad(s, {xhat}, /*create_graph=*/true)[0];
    Var norms = nn::sqrt_op(nn::add_scalar(nn::sum_per_sample(nn::square(gxhat)), 1e-12));
    Var penalty = nn::mean_all(nn::square(nn::add_scalar(norms, -1.0)));

    // minimize -(E[D(x)] - E[D(x')] - l1 * penalty)
    return nn::add(nn::sub(score_fake, score_real), nn::scale(penalty, weights.lambda1));
}

std::vector<double> normalize_distances(const std::vector<double>& dists) {
    if (dists.empty()) throw ConfigError("domain_weights: at least one domain required");
    double sum = 0.0;
    for (double d : dists) sum += d;
    std::vector<double> mu(dists.size());
    if (sum < 1e-12) {
        const double u = 1.0 / static_cast<double>(dists.size());
        for (auto& m : mu) m = u;
    } else {
        for (std::size_t i = 0; i < dists.size(); ++i) mu[i] = dists[i] / sum;
    }
    return mu;
}

std::vector<double> domain_weights(const ModelHandle& sm, const Var& x,
                                   const std::vector<nn::Tensor>& domains,
                                   std::vector<nn::Tensor>* clean_out) {
    nn::NoGradGuard ng;
    std::vector<double> dists;
    dists.reserve(domains.size());
    for (const auto& c : domains) {
        Var y = editor_forward(sm, nn::detach(x), c);
        dists.push_back(nn::mean_abs(nn::sub(nn::detach(x), y))->value.item());
        if (clean_out) clean_out->push_back(y->value);
    }
    return normalize_distances(dists);
}

nn::Var basic_loss(const ModelHandle& sm, const Var& x, const Var& xp,
                   const std::vector<nn::Tensor>& domains, const std::vector<double>& mu,
                   const std::vector<nn::Tensor>* clean_out,
                   const std::vector<nn::Var>* infected_out) {
    if (mu.size() != domains.size()) throw ConfigError("basic_loss: mu/domain size mismatch");
    Var total;
    for (std::size_t j = 0; j < domains.size(); ++j) {
        nn::Tensor yj;
        if (clean_out) {
            yj = (*clean_out)[j];
        } else {
            nn::NoGradGuard ng;
            yj = editor_forward(sm, nn::detach(x), domains[j])->value;
        }
        Var ypj = infected_out ? (*infected_out)[j] : editor_forward(sm, xp, domains[j]);
        Var term = nn::scale(nn::mean_abs(nn::sub(nn::constant(yj), ypj)), -mu[j]);
        total = total ? nn::add(total, term) : term;
    }
    return total;
}

nn::Var cycle_disruption_loss(const ModelHandle& sm, const Var& xp, const nn::Tensor& own_labels,
                              const std::vector<nn::Tensor>& domains,
                              const std::vector<double>& mu,
                              const std::vector<nn::Var>* infected_out) {
    if (mu.size() != domains.size())
        throw ConfigError("cycle_disruption_loss: mu/domain size mismatch");
    Var total;
    for (std::size_t j = 0; j < domains.size(); ++j) {
        Var ypj = infected_out ? (*infected_out)[j] : editor_forward(sm, xp, domains[j]);
        Var cycled = editor_forward(sm, ypj, own_labels);
        Var term = nn::scale(nn::mean_abs(nn::sub(xp, cycled)), -mu[j]);
        total = total ? nn::add(total, term) : term;
    }
    return total;
}

nn::Var domain_confusion_loss(const ModelHandle& d_a, const ModelHandle& sm, const Var& xp,
                              const std::vector<nn::Tensor>& domains,
                              const std::vector<nn::Var>* infected_out) {
    if (domains.empty()) throw ConfigError("domain_confusion_loss: empty domain set");
    Var total;
    for (std::size_t j = 0; j < domains.size(); ++j) {
        Var ypj = infected_out ? (*infected_out)[j] : editor_forward(sm, xp, domains[j]);
        models::CriticOutput co = critic_forward(d_a, ypj);

        // inverse domain: bitwise complement of the target labels
        nn::Tensor inv = domains[j].clone();
        for (std::size_t i = 0; i < inv.size(); ++i) inv.data()[i] = 1.0 - inv.data()[i];

        Var p = nn::clamp_op(nn::sigmoid_op(co.domain_logits), 1e-7, 1.0 - 1e-7);
        Var t = nn::constant(inv);
        Var one_minus_t = nn::constant([&] {
            nn::Tensor o = inv.clone();
            for (std::size_t i = 0; i < o.size(); ++i) o.data()[i] = 1.0 - o.data()[i];
            return o;
        }());
        Var bce = nn::neg(nn::add(nn::mul(t, nn::log_op(p)),
                                  nn::mul(one_minus_t,
                                          nn::log_op(nn::add_scalar(nn::neg(p), 1.0)))));
        const int k = co.domain_logits->value.dim(1);
        Var cls = nn::scale(nn::mean_all(bce), static_cast<double>(k));
        Var term = nn::add(cls, nn::mean_all(co.realness));
        total = total ? nn::add(total, term) : term;
    }
    return nn::scale(total, 1.0 / static_cast<double>(domains.size()));
}

nn::Var influence_loss_editing(const ModelHandle& sm, const ModelHandle& d_a, const Var& x,
                               const Var& xp, const nn::Tensor& own_labels,
                               const std::vector<nn::Tensor>& domains,
                               const LossWeights& weights) {
    std::vector<nn::Tensor> clean_out;
    std::vector<double> mu = domain_weights(sm, x, domains, &clean_out);

    std::vector<Var> infected_out;
    infected_out.reserve(domains.size());
    for (const auto& c : domains) infected_out.push_back(editor_forward(sm, xp, c));

    Var lbs = basic_loss(sm, x, xp, domains, mu, &clean_out, &infected_out);
    Var lcyc = cycle_disruption_loss(sm, xp, own_labels, domains, mu, &infected_out);
    Var ldom = domain_confusion_loss(d_a, sm, xp, domains, &infected_out);
    return nn::add(nn::add(nn::scale(lbs, weights.lambda2), nn::scale(lcyc, weights.lambda3)),
                   nn::scale(ldom, weights.lambda4));
}

nn::Var influence_loss_reenactment(const Var& sm_recon, const Var& infected_recon, const Var& x,
                                   const Var* mask) {
    if (!sm_recon->value.same_shape(x->value) || !infected_recon->value.same_shape(x->value))
        throw ShapeError("influence_loss_reenactment: shape mismatch");
    Var w;
    if (mask) {
        const auto& mv = (*mask)->value;
        if (mv.dim(0) != x->value.dim(0) || mv.dim(2) != x->value.dim(2) ||
            mv.dim(3) != x->value.dim(3))
            throw ShapeError("influence_loss_reenactment: mask shape mismatch");
        w = replicate_mask(nn::detach(*mask), x->value.dim(1));
    }
    Var ref_err = nn::abs_op(nn::sub(nn::detach(sm_recon), nn::detach(x)));
    Var inf_err = nn::abs_op(nn::sub(infected_recon, x));
    if (w) {
        ref_err = nn::mul(ref_err, w);
        inf_err = nn::mul(inf_err, w);
    }
    return nn::sub(nn::mean_all(ref_err), nn::mean_all(inf_err));
}

nn::Var influence_loss_reenactment(const ModelHandle& sm_x, const ModelHandle& m_infected,
                                   const Var& x, const Var& z, const Var* mask) {
    Var ref;
    {
        nn::NoGradGuard ng;
        ref = models::translator_forward(sm_x, nn::detach(z));
    }
    Var inf = models::translator_forward(m_infected, z);
    return influence_loss_reenactment(ref, inf, x, mask);
}

nn::Var total_pg_loss(const Var& influence, const std::optional<Var>& influence_prev,
                      const Var& adv_gen, const LossWeights& weights) {
    Var total = influence;
    if (influence_prev) total = nn::add(total, *influence_prev);
    return nn::add(total, nn::scale(adv_gen, weights.lambda));
}

nn::Var domain_bce(const Var& logits, const nn::Tensor& targets) {
    if (logits->value.dims() != targets.dims()) throw ShapeError("domain_bce: shape mismatch");
    Var p = nn::clamp_op(nn::sigmoid_op(logits), 1e-7, 1.0 - 1e-7);
    nn::Tensor inv = targets.clone();
    for (std::size_t i = 0; i < inv.size(); ++i) inv.data()[i] = 1.0 - inv.data()[i];
    Var bce = nn::neg(nn::add(nn::mul(nn::constant(targets), nn::log_op(p)),
                              nn::mul(nn::constant(inv),
                                      nn::log_op(nn::add_scalar(nn::neg(p), 1.0)))));
    const int k = logits->value.dim(1);
    return nn::scale(nn::mean_all(bce), static_cast<double>(k));
}

}  // namespace vg::losses
