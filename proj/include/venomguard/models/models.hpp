#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "venomguard/dataio/image.hpp"
#include "venomguard/dataio/synth.hpp"
#include "venomguard/nn/ops.hpp"

namespace vg::models {

enum class ArchName { CNet, Res6, Res9, UNet128, UNet256 };
enum class Conditioning { AttributeBroadcast, LandmarkConcat, None };
enum class Role { SM, PG, DA, DB, TM, M, MInfected };

std::string to_string(ArchName a);
std::string to_string(Conditioning c);
std::string to_string(Role r);
ArchName arch_from_string(const std::string& s);
Conditioning conditioning_from_string(const std::string& s);
Role role_from_string(const std::string& s);

struct ArchitectureTag {
    ArchName name = ArchName::Res6;
    Conditioning conditioning = Conditioning::None;
};

struct BuildOptions {
    int resolution = 32;
    int attr_count = dataio::kAttrCount;  // K: conditioning channels / domain head
    int in_channels = 3;                  // 1 for landmark input
    int out_channels = 3;
    int base_width = 8;                   // generator trunk width
    int critic_width = 6;
};

struct ModelHandle {
    ArchitectureTag arch;
    Role role = Role::SM;
    BuildOptions opts;
    std::uint64_t seed = 0;
    std::int64_t train_step = 0;
    std::vector<nn::Var> params;

    std::size_t param_count() const;
    int residual_blocks() const;  // 6 for Res6, 9 for Res9, else 0
    std::vector<double> flat_parameters() const;
    void load_flat_parameters(const std::vector<double>& flat);
};

bool is_generator_role(Role r);
bool is_critic_role(Role r);

// Deterministic seeded init; critics get the 7-conv + 1-dense shape, all
// other roles a generator trunk selected by the tag.
ModelHandle build(ArchitectureTag tag, Role role, std::uint64_t seed, BuildOptions opts = {});

// --- batched forwards (double tensors, differentiable) ---

// labels: [N,K] in {0,1}; broadcast as constant channels (StarGAN style).
nn::Var editor_forward(const ModelHandle& m, const nn::Var& x, const nn::Tensor& labels);
nn::Var translator_forward(const ModelHandle& m, const nn::Var& z);
// Same body with explicit parameters; unrolled training passes expression
// parameters here.
nn::Var translator_forward_with(const ModelHandle& m, std::span<const nn::Var> params,
                                const nn::Var& z);
nn::Var pg_forward(const ModelHandle& m, const nn::Var& x);  // output in [-1,1]

struct CriticOutput {
    nn::Var realness;       // [N,1]
    nn::Var domain_logits;  // [N,K] (D_A only, otherwise null)
};
CriticOutput critic_forward(const ModelHandle& d, const nn::Var& img);

// x' = clip(x + eps*PG(x), 0, 1) with an exact sup-norm guarantee
// max|x'-x| <= eps enforced on the produced values.
nn::Var perturb_batch(const ModelHandle& pg, const nn::Var& x, double eps);

// --- single-image wrappers over the pipeline types ---

dataio::ImageTensor forward_editor(const ModelHandle& m, const dataio::ImageTensor& x,
                                   const dataio::DomainLabel& c);
dataio::ImageTensor forward_translator(const ModelHandle& m, const dataio::ImageTensor& z);
// float-exact budget: the stored float image satisfies max|x'-x| <= eps.
dataio::ImageTensor perturb(const ModelHandle& pg, const dataio::ImageTensor& x, double eps);

void copy_parameters(const ModelHandle& src, ModelHandle& dst);

// Constant per-sample label planes.
nn::Var label_channels(const nn::Tensor& labels, int h, int w);
nn::Tensor labels_tensor(const std::vector<dataio::DomainLabel>& labels);

// --- checkpoints: JSON manifest + raw float32 little-endian blob ---

void save_checkpoint(const ModelHandle& m, const std::string& path);  // writes path + path:".bin"
ModelHandle load_checkpoint(const std::string& path);

}  // namespace vg::models
