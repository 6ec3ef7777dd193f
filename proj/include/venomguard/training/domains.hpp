#pragma once

#include <string>
#include <vector>

#include "venomguard/common/rng.hpp"
#include "venomguard/dataio/synth.hpp"
#include "venomguard/nn/tensor.hpp"

namespace vg::training {

// Target-domain derivation: a transform rewrites a sample's own label into a
// target label. Hair is swapped (never set independently) so the
// exactly-one-hair-color invariant is preserved.
struct DomainTransform {
    std::string name;
    bool hair_swap = false;
    std::uint8_t toggle_mask = 0;  // bits 2..4 (glasses / smile / pale)

    dataio::DomainLabel apply(const dataio::DomainLabel& c) const;
};

// Named domain choices. "SD" is the surrogate's set; "DD" is a deliberately
// different mix used for the black-box rows.
struct DomainSet {
    std::string tag;
    std::vector<DomainTransform> transforms;
};

const DomainSet& domain_set(const std::string& tag);

// J target-label batches [N,K]. The first two slots are always the
// hair-colour change and the glasses toggle; remaining slots are drawn from
// the set (with random extra toggles when J exceeds the set size).
std::vector<nn::Tensor> sample_batch_domains(const DomainSet& set,
                                             const std::vector<dataio::DomainLabel>& labels,
                                             int count, Rng& rng);

// Deterministic evaluation: every transform of the set, in order.
std::vector<nn::Tensor> eval_domains(const DomainSet& set,
                                     const std::vector<dataio::DomainLabel>& labels);

nn::Tensor apply_transform(const DomainTransform& t,
                           const std::vector<dataio::DomainLabel>& labels);

}  // namespace vg::training
