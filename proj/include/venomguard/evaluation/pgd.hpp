#pragma once

#include "venomguard/dataio/synth.hpp"
#include "venomguard/models/models.hpp"

namespace vg::evaluation {

// Minimal per-image white-box reference: iterated sign-gradient ascent on the
// summed forgery distance against a fixed editor, projected onto the eps
// sup-norm ball. Kept only as a comparison point for the learned generator.
dataio::ImageTensor pgd_attack(const models::ModelHandle& editor, const dataio::ImageTensor& x,
                               const dataio::DomainLabel& own_label,
                               const std::string& domain_tag, double eps, int steps);

}  // namespace vg::evaluation
