#pragma once

#include <optional>
#include <vector>

#include "venomguard/common/rng.hpp"
#include "venomguard/models/models.hpp"

namespace vg::losses {

struct LossWeights {
    double lambda = 0.01;   // adversarial term inside the PG objective
    double lambda1 = 10.0;  // gradient penalty
    double lambda2 = 10.0;  // basic (pixel) term
    double lambda3 = 2.5;   // cycle-disruption term
    double lambda4 = 1.0;   // domain-confusion term
};

enum class AdvMode { Critic, Generator };

// Wasserstein critic objective with gradient penalty on per-sample random
// interpolates (critic mode), or the negated infected score (generator mode).
// Both are written for minimization. rng draws the interpolation factors.
nn::Var adversarial_loss(const models::ModelHandle& d_b, const nn::Var& x, const nn::Var& xp,
                         AdvMode mode, const LossWeights& weights, Rng& rng);

// Per-domain weighting: mu_j proportional to mean |x - SM(x, c_j)|, summing
// to one; uniform fallback when every distance vanishes. No gradients flow
// through mu. clean_out receives SM(x, c_j) values for reuse.
std::vector<double> domain_weights(const models::ModelHandle& sm, const nn::Var& x,
                                   const std::vector<nn::Tensor>& domains,
                                   std::vector<nn::Tensor>* clean_out = nullptr);

// Normalization helper shared by the weighting: uniform fallback below 1e-12.
std::vector<double> normalize_distances(const std::vector<double>& dists);

// -sum_j mu_j * E|SM(x,c_j) - SM(x',c_j)|; the clean branch is constant.
nn::Var basic_loss(const models::ModelHandle& sm, const nn::Var& x, const nn::Var& xp,
                   const std::vector<nn::Tensor>& domains, const std::vector<double>& mu,
                   const std::vector<nn::Tensor>* clean_out = nullptr,
                   const std::vector<nn::Var>* infected_out = nullptr);

// -sum_j mu_j * E|x' - SM(SM(x',c_j), c)|
nn::Var cycle_disruption_loss(const models::ModelHandle& sm, const nn::Var& xp,
                              const nn::Tensor& own_labels,
                              const std::vector<nn::Tensor>& domains,
                              const std::vector<double>& mu,
                              const std::vector<nn::Var>* infected_out = nullptr);

// E_{c_j}[ -log p(c_rj | SM(x',c_j)) ] + E_{c_j}[ realness(SM(x',c_j)) ],
// c_rj the bitwise complement; probabilities clamped to [1e-7, 1-1e-7].
nn::Var domain_confusion_loss(const models::ModelHandle& d_a, const models::ModelHandle& sm,
                              const nn::Var& xp, const std::vector<nn::Tensor>& domains,
                              const std::vector<nn::Var>* infected_out = nullptr);

// lambda2*Lbs + lambda3*Lcyc + lambda4*Ldom computed with shared forwards.
nn::Var influence_loss_editing(const models::ModelHandle& sm, const models::ModelHandle& d_a,
                               const nn::Var& x, const nn::Var& xp, const nn::Tensor& own_labels,
                               const std::vector<nn::Tensor>& domains,
                               const LossWeights& weights);

// E[ |(SM_x(z)-x) . w|_1 - |(M'(z)-x) . w|_1 ]; the reference term carries no
// gradient. mask is [N,1,H,W] (face 1.0 / rest 0.01) or null for all-ones.
nn::Var influence_loss_reenactment(const nn::Var& sm_recon, const nn::Var& infected_recon,
                                   const nn::Var& x, const nn::Var* mask);

// Convenience overload running both forwards from handles.
nn::Var influence_loss_reenactment(const models::ModelHandle& sm_x,
                                   const models::ModelHandle& m_infected, const nn::Var& x,
                                   const nn::Var& z, const nn::Var* mask);

// L_PG = influence + influence_prev(optional) + lambda * adv_generator
nn::Var total_pg_loss(const nn::Var& influence, const std::optional<nn::Var>& influence_prev,
                      const nn::Var& adv_gen, const LossWeights& weights);

// Multi-label binary cross-entropy against targets in {0,1}; sum over
// attributes, mean over batch. Shared by stage-A classification updates.
nn::Var domain_bce(const nn::Var& logits, const nn::Tensor& targets);

}  // namespace vg::losses
