#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "venomguard/dataio/dataset.hpp"
#include "venomguard/losses/losses.hpp"
#include "venomguard/models/models.hpp"
#include "venomguard/nn/optimizer.hpp"
#include "venomguard/training/domains.hpp"

namespace vg::training {

enum class TaskKind { AttributeEditing, Reenactment };

std::string to_string(TaskKind t);
TaskKind task_from_string(const std::string& s);

struct TrainConfig {
    TaskKind task = TaskKind::AttributeEditing;
    std::int64_t maxiter = 3000;
    int batch_size = 8;
    double lr_pg = 0.0;  // 0: task default (1e-4 editing, 2e-4 reenactment)
    double lr_sm = 0.0;
    double eps_train = 0.05;
    int domains_per_sample = 5;
    int n_critic = 1;
    int unroll_steps = 1;     // reenactment only
    double unroll_lr = 0.05;  // inner sgd step of the unrolled update
    int shadow_steps = 1;     // persistent TM updates per iteration
    bool enhancement = true;
    bool alternating = true;  // off: stage A fully pre-trained, then PG alone
    std::uint64_t seed = 1;
    losses::LossWeights weights;
    std::string domain_tag = "SD";
    models::ArchName sm_arch = models::ArchName::Res6;
    models::ArchName pg_arch = models::ArchName::UNet128;
    int resolution = 32;
    int base_width = 8;
    int critic_width = 6;
    int probe_size = 16;

    double pg_lr() const { return lr_pg > 0 ? lr_pg : (task == TaskKind::Reenactment ? 2e-4 : 1e-4); }
    double sm_lr() const { return lr_sm > 0 ? lr_sm : (task == TaskKind::Reenactment ? 2e-4 : 1e-4); }
    void validate() const;
};

struct HistoryRow {
    std::int64_t step = 0;
    double dist = 0.0;     // D(y, y') on the fixed probe
    double maxdist = 0.0;  // running maximum after this step
    double loss_sm = 0.0;
    double loss_pg = 0.0;
    double loss_db = 0.0;
};

struct RunResult {
    models::ModelHandle pg_best;
    double maxdist = 0.0;
    std::vector<HistoryRow> history;
};

// Two-stage alternating trainer (Algorithm-1 shape). Stage A trains the
// surrogate on clean data only; stage B trains the perturbation generator;
// neither stage touches the other's parameters.
class Trainer {
public:
    Trainer(TrainConfig cfg, std::vector<dataio::FaceSample> defense_train);

    // One full iteration: optional snapshot, stage A, stage B, probe +
    // best-tracking. Throws TrainingAbort on non-finite losses.
    void step();

    std::int64_t current_step() const { return step_; }
    double maxdist() const { return maxdist_; }
    const std::vector<HistoryRow>& history() const { return history_; }
    const models::ModelHandle& sm() const { return sm_; }
    const models::ModelHandle& pg() const { return pg_; }
    const models::ModelHandle& d_a() const { return d_a_; }
    const models::ModelHandle& d_b() const { return d_b_; }
    const models::ModelHandle& tm() const { return tm_; }
    const models::ModelHandle& pg_best() const { return pg_best_; }

    // Probe D(y,y'): editing mean L2 over probe images and eval domains,
    // reenactment mean L1 between clean-surrogate and shadow-TM outputs.
    double probe_distance();

    RunResult result() const;

    // Exact resume: parameters, optimizer moments, RNG, history.
    void save_state(const std::string& path) const;
    void load_state(const std::string& path);

    // visible for tests
    void stage_a_step_editing(const std::vector<std::int64_t>& batch_idx);
    void stage_b_step_editing(const std::vector<std::int64_t>& batch_idx);
    void stage_a_step_reenactment(const std::vector<std::int64_t>& batch_idx);
    void stage_b_step_reenactment(const std::vector<std::int64_t>& batch_idx);
    std::vector<std::int64_t> next_batch_indices();
    void snapshot_previous();  // enhancement source (SM/D_A of last iteration)

private:
    struct BatchTensors {
        nn::Var x;
        nn::Var z;     // landmark maps (reenactment)
        nn::Var mask;  // face masks (reenactment enhancement)
        std::vector<dataio::DomainLabel> labels;
    };
    BatchTensors gather(const std::vector<std::int64_t>& idx) const;
    void check_finite(double v, const char* what) const;

    TrainConfig cfg_;
    std::vector<dataio::FaceSample> data_;
    Rng rng_;
    std::int64_t step_ = 0;
    double maxdist_;
    std::vector<HistoryRow> history_;

    models::ModelHandle sm_, pg_, d_a_, d_b_, tm_;
    models::ModelHandle sm_prev_, d_a_prev_;
    models::ModelHandle pg_best_;
    nn::Adam opt_sm_, opt_pg_, opt_da_, opt_db_, opt_tm_;

    std::vector<std::int64_t> probe_idx_;
    double last_loss_sm_ = 0.0, last_loss_pg_ = 0.0, last_loss_db_ = 0.0;
};

RunResult run_two_stage(const TrainConfig& cfg, const std::vector<dataio::FaceSample>& defense_train,
                        const std::function<void(const Trainer&)>& on_iteration = {});

// --- independent target / infected models -----------------------------------

struct TargetConfig {
    TaskKind task = TaskKind::AttributeEditing;
    models::ArchName arch = models::ArchName::Res6;
    std::string domain_tag = "SD";
    std::int64_t iters = 1500;
    int batch_size = 8;
    double lr = 1e-4;
    std::uint64_t seed = 99;
    int resolution = 32;
    int base_width = 8;
    int critic_width = 6;
};

// Trains a fresh manipulation model on the given samples (clean or poisoned);
// never touches any defense-side model. Editing targets get their own critic
// internally; reenactment targets are supervised landmark-to-frame models.
models::ModelHandle train_target_model(const TargetConfig& cfg,
                                       const std::vector<dataio::FaceSample>& data,
                                       bool infected);

// x'' = perturb(pg2, perturb(pg1, x, eps1), eps2), frame by frame.
std::vector<dataio::ImageTensor> stack_perturbations(const models::ModelHandle& pg_editing,
                                                     const models::ModelHandle& pg_reenactment,
                                                     const std::vector<dataio::ImageTensor>& frames,
                                                     double eps1, double eps2);

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows);
std::vector<HistoryRow> read_history_csv(const std::string& path);

// FNV-1a over the raw parameter bytes; used by isolation checks.
std::uint64_t param_hash(const models::ModelHandle& m);

}  // namespace vg::training
