#include "venomguard/training/training.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "venomguard/nn/ops.hpp"

namespace vg::training {

using dataio::FaceSample;
using losses::AdvMode;
using models::ModelHandle;
using nn::Var;

std::string to_string(TaskKind t) {
    return t == TaskKind::AttributeEditing ? "attribute_editing" : "reenactment";
}

TaskKind task_from_string(const std::string& s) {
    if (s == "attribute_editing") return TaskKind::AttributeEditing;
    if (s == "reenactment") return TaskKind::Reenactment;
    throw ConfigError("unknown task: " + s);
}

void TrainConfig::validate() const {
    if (maxiter < 1) throw ConfigError("TrainConfig: maxiter must be >= 1");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (!(eps_train > 0.0 && eps_train <= 0.1))
        throw ConfigError("TrainConfig: eps_train must be in (0, 0.1]");
    const int max_domains = (1 << dataio::kAttrCount) - 1;
    if (domains_per_sample < 1 || domains_per_sample > max_domains)
        throw ConfigError("TrainConfig: domains_per_sample out of range");
    if (n_critic < 1) throw ConfigError("TrainConfig: n_critic must be >= 1");
    if (unroll_steps < 0) throw ConfigError("TrainConfig: unroll_steps must be >= 0");
    if (probe_size < 1) throw ConfigError("TrainConfig: probe_size must be >= 1");
    domain_set(domain_tag);  // throws on unknown tag
}

namespace {

models::BuildOptions generator_opts(const TrainConfig& cfg, bool translator) {
    models::BuildOptions o;
    o.resolution = cfg.resolution;
    o.attr_count = dataio::kAttrCount;
    o.in_channels = translator ? 1 : 3;
    o.out_channels = 3;
    o.base_width = cfg.base_width;
    o.critic_width = cfg.critic_width;
    return o;
}

models::BuildOptions critic_opts(const TrainConfig& cfg) {
    models::BuildOptions o;
    o.resolution = cfg.resolution;
    o.attr_count = dataio::kAttrCount;
    o.in_channels = 3;
    o.base_width = cfg.base_width;
    o.critic_width = cfg.critic_width;
    return o;
}

ModelHandle clone_model(const ModelHandle& src) {
    ModelHandle dst = models::build(src.arch, src.role, src.seed, src.opts);
    models::copy_parameters(src, dst);
    return dst;
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, std::vector<FaceSample> defense_train)
    : cfg_(std::move(cfg)),
      data_(std::move(defense_train)),
      rng_(Rng::mix(cfg_.seed, 0x747261696eULL)),
      maxdist_(-std::numeric_limits<double>::infinity()) {
    cfg_.validate();
    if (data_.empty()) throw ConfigError("Trainer: empty dataset");

    const bool reen = cfg_.task == TaskKind::Reenactment;
    const models::Conditioning cond =
        reen ? models::Conditioning::LandmarkConcat : models::Conditioning::AttributeBroadcast;

    sm_ = models::build({cfg_.sm_arch, cond}, models::Role::SM, Rng::mix(cfg_.seed, 1),
                        generator_opts(cfg_, reen));
    pg_ = models::build({cfg_.pg_arch, models::Conditioning::None}, models::Role::PG,
                        Rng::mix(cfg_.seed, 2), generator_opts(cfg_, false));
    d_b_ = models::build({cfg_.sm_arch, models::Conditioning::None}, models::Role::DB,
                         Rng::mix(cfg_.seed, 4), critic_opts(cfg_));
    if (!reen) {
        d_a_ = models::build({cfg_.sm_arch, models::Conditioning::None}, models::Role::DA,
                             Rng::mix(cfg_.seed, 3), critic_opts(cfg_));
        sm_prev_ = clone_model(sm_);
        d_a_prev_ = clone_model(d_a_);
    } else {
        tm_ = models::build({cfg_.sm_arch, cond}, models::Role::TM, Rng::mix(cfg_.seed, 5),
                            generator_opts(cfg_, true));
        opt_tm_ = nn::Adam(cfg_.sm_lr());
    }
    pg_best_ = clone_model(pg_);

    opt_sm_ = nn::Adam(cfg_.sm_lr());
    opt_pg_ = nn::Adam(cfg_.pg_lr());
    opt_da_ = nn::Adam(cfg_.sm_lr());
    opt_db_ = nn::Adam(cfg_.pg_lr());

    const std::int64_t p = std::min<std::int64_t>(cfg_.probe_size, data_.size());
    for (std::int64_t i = 0; i < p; ++i) probe_idx_.push_back(i);
}

std::vector<std::int64_t> Trainer::next_batch_indices() {
    std::vector<std::int64_t> idx(cfg_.batch_size);
    for (auto& i : idx) i = rng_.uniform_int(0, static_cast<std::int64_t>(data_.size()) - 1);
    return idx;
}

Trainer::BatchTensors Trainer::gather(const std::vector<std::int64_t>& idx) const {
    std::vector<dataio::ImageTensor> imgs, lms, masks;
    BatchTensors b;
    for (std::int64_t i : idx) {
        const FaceSample& s = data_.at(static_cast<std::size_t>(i));
        imgs.push_back(s.image);
        b.labels.push_back(s.label);
        if (cfg_.task == TaskKind::Reenactment) {
            lms.push_back(s.landmark_map);
            masks.push_back(s.mask);
        }
    }
    b.x = nn::constant(dataio::to_batch(imgs));
    if (cfg_.task == TaskKind::Reenactment) {
        b.z = nn::constant(dataio::to_batch(lms));
        b.mask = nn::constant(dataio::to_batch(masks));
    }
    return b;
}

void Trainer::check_finite(double v, const char* what) const {
    if (!std::isfinite(v))
        throw TrainingAbort(std::string(what) + " diverged (non-finite) at step " +
                            std::to_string(step_ + 1));
}

void Trainer::snapshot_previous() {
    if (cfg_.task != TaskKind::AttributeEditing) return;
    models::copy_parameters(sm_, sm_prev_);
    models::copy_parameters(d_a_, d_a_prev_);
}

void Trainer::stage_a_step_editing(const std::vector<std::int64_t>& batch_idx) {
    BatchTensors b = gather(batch_idx);
    const DomainSet& set = domain_set(cfg_.domain_tag);
    nn::Tensor own = models::labels_tensor(b.labels);

    // random target domain for this StarGAN step
    const auto& tr = set.transforms[static_cast<std::size_t>(
        rng_.uniform_int(0, static_cast<std::int64_t>(set.transforms.size()) - 1))];
    nn::Tensor tgt = apply_transform(tr, b.labels);

    // D_A: Wasserstein critic with gradient penalty + attribute classification
    {
        Var fake;
        {
            nn::NoGradGuard ng;
            fake = models::editor_forward(sm_, b.x, tgt);
        }
        Var adv = losses::adversarial_loss(d_a_, b.x, nn::detach(fake), AdvMode::Critic,
                                           cfg_.weights, rng_);
        Var cls = losses::domain_bce(models::critic_forward(d_a_, b.x).domain_logits, own);
        Var loss = nn::add(adv, cls);
        check_finite(loss->value.item(), "D_A loss");
        auto g = nn::grad(loss, d_a_.params, false);
        opt_da_.step(d_a_.params, g);
    }

    // SM: adversarial + classification toward target + cycle reconstruction
    {
        Var y = models::editor_forward(sm_, b.x, tgt);
        models::CriticOutput co = models::critic_forward(d_a_, y);
        Var rec = models::editor_forward(sm_, y, own);
        Var loss = nn::add(
            nn::add(nn::neg(nn::mean_all(co.realness)), losses::domain_bce(co.domain_logits, tgt)),
            nn::scale(nn::mean_abs(nn::sub(rec, b.x)), 10.0));
        last_loss_sm_ = loss->value.item();
        check_finite(last_loss_sm_, "SM loss");
        auto g = nn::grad(loss, sm_.params, false);
        opt_sm_.step(sm_.params, g);
        sm_.train_step++;
    }
}

void Trainer::stage_a_step_reenactment(const std::vector<std::int64_t>& batch_idx) {
    BatchTensors b = gather(batch_idx);
    Var loss = nn::mean_abs(nn::sub(models::translator_forward(sm_, b.z), b.x));
    last_loss_sm_ = loss->value.item();
    check_finite(last_loss_sm_, "SM loss");
    auto g = nn::grad(loss, sm_.params, false);
    opt_sm_.step(sm_.params, g);
    sm_.train_step++;
}

void Trainer::stage_b_step_editing(const std::vector<std::int64_t>& batch_idx) {
    BatchTensors b = gather(batch_idx);
    const DomainSet& set = domain_set(cfg_.domain_tag);
    nn::Tensor own = models::labels_tensor(b.labels);
    std::vector<nn::Tensor> domains =
        sample_batch_domains(set, b.labels, cfg_.domains_per_sample, rng_);

    Var xp = models::perturb_batch(pg_, b.x, cfg_.eps_train);

    // D_B on detached poisoned data
    for (int t = 0; t < cfg_.n_critic; ++t) {
        Var loss =
            losses::adversarial_loss(d_b_, b.x, nn::detach(xp), AdvMode::Critic, cfg_.weights, rng_);
        last_loss_db_ = loss->value.item();
        check_finite(last_loss_db_, "D_B loss");
        auto g = nn::grad(loss, d_b_.params, false);
        opt_db_.step(d_b_.params, g);
    }

    Var influence = losses::influence_loss_editing(sm_, d_a_, b.x, xp, own, domains, cfg_.weights);
    std::optional<Var> influence_prev;
    if (cfg_.enhancement)
        influence_prev =
            losses::influence_loss_editing(sm_prev_, d_a_prev_, b.x, xp, own, domains, cfg_.weights);
    Var adv_gen = losses::adversarial_loss(d_b_, b.x, xp, AdvMode::Generator, cfg_.weights, rng_);
    Var loss = losses::total_pg_loss(influence, influence_prev, adv_gen, cfg_.weights);
    last_loss_pg_ = loss->value.item();
    check_finite(last_loss_pg_, "PG loss");
    auto g = nn::grad(loss, pg_.params, false);
    opt_pg_.step(pg_.params, g);
    pg_.train_step++;
}

void Trainer::stage_b_step_reenactment(const std::vector<std::int64_t>& batch_idx) {
    BatchTensors b = gather(batch_idx);
    Var xp = models::perturb_batch(pg_, b.x, cfg_.eps_train);

    for (int t = 0; t < cfg_.n_critic; ++t) {
        Var loss =
            losses::adversarial_loss(d_b_, b.x, nn::detach(xp), AdvMode::Critic, cfg_.weights, rng_);
        last_loss_db_ = loss->value.item();
        check_finite(last_loss_db_, "D_B loss");
        auto g = nn::grad(loss, d_b_.params, false);
        opt_db_.step(d_b_.params, g);
    }

    // Unroll TM training steps on the (attached) poisoned frames so the
    // resulting parameters remain a function of PG.
    std::vector<Var> theta(tm_.params.begin(), tm_.params.end());
    for (int u = 0; u < cfg_.unroll_steps; ++u) {
        Var inner = nn::mean_abs(nn::sub(models::translator_forward_with(tm_, theta, b.z), xp));
        auto gs = nn::grad(inner, theta, /*create_graph=*/true);
        for (std::size_t i = 0; i < theta.size(); ++i)
            theta[i] = nn::sub(theta[i], nn::scale(gs[i], cfg_.unroll_lr));
    }
    Var infected_recon = models::translator_forward_with(tm_, theta, b.z);
    Var ref_recon;
    {
        nn::NoGradGuard ng;
        ref_recon = models::translator_forward(sm_, b.z);
    }
    const Var* mask = cfg_.enhancement ? &b.mask : nullptr;
    Var influence = losses::influence_loss_reenactment(ref_recon, infected_recon, b.x, mask);
    Var adv_gen = losses::adversarial_loss(d_b_, b.x, xp, AdvMode::Generator, cfg_.weights, rng_);
    Var loss = losses::total_pg_loss(influence, std::nullopt, adv_gen, cfg_.weights);
    last_loss_pg_ = loss->value.item();
    check_finite(last_loss_pg_, "PG loss");
    auto g = nn::grad(loss, pg_.params, false);
    opt_pg_.step(pg_.params, g);
    pg_.train_step++;

    // persistent shadow TM keeps training on detached poisoned frames,
    // emulating the forger's run; next iteration unrolls from here
    for (int s = 0; s < cfg_.shadow_steps; ++s) {
        Var l = nn::mean_abs(nn::sub(models::translator_forward(tm_, b.z), nn::detach(xp)));
        check_finite(l->value.item(), "TM loss");
        auto gt = nn::grad(l, tm_.params, false);
        opt_tm_.step(tm_.params, gt);
        tm_.train_step++;
    }
}

double Trainer::probe_distance() {
    nn::NoGradGuard ng;
    std::vector<dataio::ImageTensor> imgs, lms;
    std::vector<dataio::DomainLabel> labels;
    for (std::int64_t i : probe_idx_) {
        imgs.push_back(data_[static_cast<std::size_t>(i)].image);
        labels.push_back(data_[static_cast<std::size_t>(i)].label);
        if (cfg_.task == TaskKind::Reenactment)
            lms.push_back(data_[static_cast<std::size_t>(i)].landmark_map);
    }
    Var x = nn::constant(dataio::to_batch(imgs));
    if (cfg_.task == TaskKind::AttributeEditing) {
        Var xp = models::perturb_batch(pg_, x, cfg_.eps_train);
        const DomainSet& set = domain_set(cfg_.domain_tag);
        double acc = 0.0;
        for (const auto& tr : set.transforms) {
            nn::Tensor c = apply_transform(tr, labels);
            Var y = models::editor_forward(sm_, x, c);
            Var yp = models::editor_forward(sm_, xp, c);
            acc += nn::mean_sq(nn::sub(y, yp))->value.item();
        }
        return acc / static_cast<double>(set.transforms.size());
    }
    Var z = nn::constant(dataio::to_batch(lms));
    Var y = models::translator_forward(sm_, z);
    Var yp = models::translator_forward(tm_, z);
    return nn::mean_abs(nn::sub(y, yp))->value.item();
}

void Trainer::step() {
    const bool editing = cfg_.task == TaskKind::AttributeEditing;
    if (editing) snapshot_previous();

    std::vector<std::int64_t> batch = next_batch_indices();
    if (cfg_.alternating) {
        if (editing)
            stage_a_step_editing(batch);
        else
            stage_a_step_reenactment(batch);
    }
    if (editing)
        stage_b_step_editing(batch);
    else
        stage_b_step_reenactment(batch);

    ++step_;
    const double dist = probe_distance();
    check_finite(dist, "probe distance");
    if (dist > maxdist_) {
        maxdist_ = dist;
        models::copy_parameters(pg_, pg_best_);
        pg_best_.train_step = step_;
    }
    history_.push_back({step_, dist, maxdist_, last_loss_sm_, last_loss_pg_, last_loss_db_});
}

RunResult Trainer::result() const {
    RunResult r{pg_best_, maxdist_, history_};
    return r;
}

RunResult run_two_stage(const TrainConfig& cfg, const std::vector<FaceSample>& defense_train,
                        const std::function<void(const Trainer&)>& on_iteration) {
    Trainer t(cfg, defense_train);
    if (!cfg.alternating) {
        // ablation: fully pre-train stage A, then train PG against it
        for (std::int64_t i = 0; i < cfg.maxiter; ++i) {
            auto batch = t.next_batch_indices();
            if (cfg.task == TaskKind::AttributeEditing)
                t.stage_a_step_editing(batch);
            else
                t.stage_a_step_reenactment(batch);
        }
    }
    for (std::int64_t i = 0; i < cfg.maxiter; ++i) {
        t.step();
        if (on_iteration) on_iteration(t);
    }
    return t.result();
}

// --- state persistence --------------------------------------------------------

namespace {

constexpr char kStateMagic[4] = {'V', 'G', 'S', '1'};

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
    const std::uint64_t n = v.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * 8));
}

std::vector<double> read_doubles(std::ifstream& in) {
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || n > (1ULL << 32)) throw IoError("train state: corrupt payload");
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * 8));
    if (!in) throw IoError("train state: truncated payload");
    return v;
}

}  // namespace

void Trainer::save_state(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_state: cannot open " + path);
    out.write(kStateMagic, 4);
    const std::uint64_t step = static_cast<std::uint64_t>(step_);
    out.write(reinterpret_cast<const char*>(&step), sizeof step);
    out.write(reinterpret_cast<const char*>(&maxdist_), sizeof maxdist_);
    Rng::State rs = rng_.state();
    out.write(reinterpret_cast<const char*>(&rs), sizeof rs);

    const bool editing = cfg_.task == TaskKind::AttributeEditing;
    std::vector<const ModelHandle*> ms{&sm_, &pg_, &d_b_, &pg_best_};
    if (editing) {
        ms.push_back(&d_a_);
        ms.push_back(&sm_prev_);
        ms.push_back(&d_a_prev_);
    } else {
        ms.push_back(&tm_);
    }
    for (const auto* m : ms) write_doubles(out, m->flat_parameters());
    std::vector<const nn::Adam*> opts{&opt_sm_, &opt_pg_, &opt_db_};
    if (editing) opts.push_back(&opt_da_);
    if (!editing) opts.push_back(&opt_tm_);
    for (const auto* o : opts) write_doubles(out, o->serialize_state());

    const std::uint64_t hrows = history_.size();
    out.write(reinterpret_cast<const char*>(&hrows), sizeof hrows);
    for (const auto& h : history_) out.write(reinterpret_cast<const char*>(&h), sizeof h);
    if (!out) throw IoError("save_state: short write to " + path);
}

void Trainer::load_state(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_state: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kStateMagic, 4) != 0)
        throw IoError("load_state: bad magic in " + path);
    std::uint64_t step = 0;
    in.read(reinterpret_cast<char*>(&step), sizeof step);
    in.read(reinterpret_cast<char*>(&maxdist_), sizeof maxdist_);
    step_ = static_cast<std::int64_t>(step);
    Rng::State rs{};
    in.read(reinterpret_cast<char*>(&rs), sizeof rs);
    rng_.set_state(rs);

    const bool editing = cfg_.task == TaskKind::AttributeEditing;
    std::vector<ModelHandle*> ms{&sm_, &pg_, &d_b_, &pg_best_};
    if (editing) {
        ms.push_back(&d_a_);
        ms.push_back(&sm_prev_);
        ms.push_back(&d_a_prev_);
    } else {
        ms.push_back(&tm_);
    }
    for (auto* m : ms) m->load_flat_parameters(read_doubles(in));
    std::vector<nn::Adam*> opts{&opt_sm_, &opt_pg_, &opt_db_};
    if (editing) opts.push_back(&opt_da_);
    if (!editing) opts.push_back(&opt_tm_);
    std::vector<std::vector<nn::Var>*> prm{&sm_.params, &pg_.params, &d_b_.params};
    if (editing) prm.push_back(&d_a_.params);
    if (!editing) prm.push_back(&tm_.params);
    for (std::size_t i = 0; i < opts.size(); ++i) {
        opts[i]->init_moments(*prm[i]);
        opts[i]->deserialize_state(read_doubles(in));
    }

    std::uint64_t hrows = 0;
    in.read(reinterpret_cast<char*>(&hrows), sizeof hrows);
    if (!in || hrows > (1ULL << 30)) throw IoError("load_state: corrupt history");
    history_.resize(hrows);
    for (auto& h : history_) in.read(reinterpret_cast<char*>(&h), sizeof h);
    if (!in) throw IoError("load_state: truncated history");
}

// --- target models -------------------------------------------------------------

models::ModelHandle train_target_model(const TargetConfig& cfg,
                                       const std::vector<FaceSample>& data, bool infected) {
    if (data.empty()) throw ConfigError("train_target_model: empty dataset");
    Rng rng(Rng::mix(cfg.seed, 0x746172676574ULL));

    models::BuildOptions gopts;
    gopts.resolution = cfg.resolution;
    gopts.base_width = cfg.base_width;
    gopts.critic_width = cfg.critic_width;

    const models::Role role = infected ? models::Role::MInfected : models::Role::M;

    if (cfg.task == TaskKind::Reenactment) {
        gopts.in_channels = 1;
        models::ModelHandle m = models::build({cfg.arch, models::Conditioning::LandmarkConcat},
                                              role, Rng::mix(cfg.seed, 11), gopts);
        nn::Adam opt(cfg.lr);
        for (std::int64_t it = 0; it < cfg.iters; ++it) {
            std::vector<dataio::ImageTensor> xs, zs;
            for (int b = 0; b < cfg.batch_size; ++b) {
                const auto& s =
                    data[static_cast<std::size_t>(rng.uniform_int(0, data.size() - 1))];
                xs.push_back(s.image);
                zs.push_back(s.landmark_map);
            }
            Var x = nn::constant(dataio::to_batch(xs));
            Var z = nn::constant(dataio::to_batch(zs));
            Var loss = nn::mean_abs(nn::sub(models::translator_forward(m, z), x));
            if (!std::isfinite(loss->value.item()))
                throw TrainingAbort("target model diverged at iter " + std::to_string(it));
            auto g = nn::grad(loss, m.params, false);
            opt.step(m.params, g);
            m.train_step++;
        }
        return m;
    }

    // attribute editing: StarGAN-style training with a private critic
    models::ModelHandle m = models::build({cfg.arch, models::Conditioning::AttributeBroadcast},
                                          role, Rng::mix(cfg.seed, 11), gopts);
    models::ModelHandle da = models::build({cfg.arch, models::Conditioning::None},
                                           models::Role::DA, Rng::mix(cfg.seed, 12), gopts);
    nn::Adam opt_m(cfg.lr), opt_d(cfg.lr);
    losses::LossWeights w;
    const DomainSet& set = domain_set(cfg.domain_tag);

    for (std::int64_t it = 0; it < cfg.iters; ++it) {
        std::vector<dataio::ImageTensor> xs;
        std::vector<dataio::DomainLabel> labels;
        for (int b = 0; b < cfg.batch_size; ++b) {
            const auto& s = data[static_cast<std::size_t>(rng.uniform_int(0, data.size() - 1))];
            xs.push_back(s.image);
            labels.push_back(s.label);
        }
        Var x = nn::constant(dataio::to_batch(xs));
        nn::Tensor own = models::labels_tensor(labels);
        const auto& tr = set.transforms[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(set.transforms.size()) - 1))];
        nn::Tensor tgt = apply_transform(tr, labels);

        {
            Var fake;
            {
                nn::NoGradGuard ng;
                fake = models::editor_forward(m, x, tgt);
            }
            Var adv = losses::adversarial_loss(da, x, nn::detach(fake), AdvMode::Critic, w, rng);
            Var cls = losses::domain_bce(models::critic_forward(da, x).domain_logits, own);
            Var loss = nn::add(adv, cls);
            if (!std::isfinite(loss->value.item()))
                throw TrainingAbort("target critic diverged at iter " + std::to_string(it));
            auto g = nn::grad(loss, da.params, false);
            opt_d.step(da.params, g);
        }
        {
            Var y = models::editor_forward(m, x, tgt);
            models::CriticOutput co = models::critic_forward(da, y);
            Var rec = models::editor_forward(m, y, own);
            Var loss = nn::add(nn::add(nn::neg(nn::mean_all(co.realness)),
                                       losses::domain_bce(co.domain_logits, tgt)),
                               nn::scale(nn::mean_abs(nn::sub(rec, x)), 10.0));
            if (!std::isfinite(loss->value.item()))
                throw TrainingAbort("target model diverged at iter " + std::to_string(it));
            auto g = nn::grad(loss, m.params, false);
            opt_m.step(m.params, g);
            m.train_step++;
        }
    }
    return m;
}

std::vector<dataio::ImageTensor> stack_perturbations(const models::ModelHandle& pg_editing,
                                                     const models::ModelHandle& pg_reenactment,
                                                     const std::vector<dataio::ImageTensor>& frames,
                                                     double eps1, double eps2) {
    std::vector<dataio::ImageTensor> out;
    out.reserve(frames.size());
    for (const auto& f : frames)
        out.push_back(models::perturb(pg_reenactment, models::perturb(pg_editing, f, eps1), eps2));
    return out;
}

// --- history csv -----------------------------------------------------------------

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("write_history_csv: cannot open " + path);
    std::fprintf(f, "step,dist,maxdist,loss_sm,loss_pg,loss_db\n");
    for (const auto& r : rows)
        std::fprintf(f, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n", static_cast<long long>(r.step),
                     r.dist, r.maxdist, r.loss_sm, r.loss_pg, r.loss_db);
    std::fclose(f);
}

std::vector<HistoryRow> read_history_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_history_csv: cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<HistoryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        HistoryRow r;
        long long step = 0;
        if (std::sscanf(line.c_str(), "%lld,%lg,%lg,%lg,%lg,%lg", &step, &r.dist, &r.maxdist,
                        &r.loss_sm, &r.loss_pg, &r.loss_db) != 6)
            throw IoError("read_history_csv: malformed row: " + line);
        r.step = step;
        rows.push_back(r);
    }
    return rows;
}

std::uint64_t param_hash(const models::ModelHandle& m) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& p : m.params) {
        const unsigned char* bytes = reinterpret_cast<const unsigned char*>(p->value.data());
        for (std::size_t i = 0; i < p->value.size() * sizeof(double); ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    }
    return h;
}

}  // namespace vg::training
