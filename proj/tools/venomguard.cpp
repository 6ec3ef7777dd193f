// venomguard: config-driven pipeline driver.
//   generate  synthetic face data + manifest
//   defend    two-stage training of the perturbation generator
//   poison    apply a trained generator to a dataset
//   forge     run a manipulation model on clean/poisoned data
//   eval      defense reports, transfer matrix, sweeps, LBP grids
//   stack     compose editing + reenactment perturbations
//
// Exit codes: 0 ok, 2 configuration/input error, 3 training abort,
// 4 contract violation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "venomguard/dataio/dataset.hpp"
#include "venomguard/dataio/image_io.hpp"
#include "venomguard/evaluation/plot.hpp"
#include "venomguard/evaluation/report.hpp"
#include "venomguard/training/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vg;

namespace {

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return j;
}

// flags beat config-file values; config-file values beat defaults
template <typename T>
void cfg_fill(const CLI::App& app, const std::string& flag, const json& j, const char* key,
              T& value) {
    if (app.count(flag) > 0) return;
    if (j.contains(key)) value = j.at(key).get<T>();
}

std::vector<dataio::FaceSample> load_split(const dataio::DatasetManifest& m,
                                           const std::vector<std::int64_t>& idx) {
    std::vector<dataio::FaceSample> out;
    out.reserve(idx.size());
    for (std::int64_t i : idx) out.push_back(dataio::load_sample(m, m.entries.at(i)));
    return out;
}

std::vector<dataio::FaceSample> load_all(const dataio::DatasetManifest& m) {
    std::vector<dataio::FaceSample> out;
    out.reserve(m.entries.size());
    for (const auto& e : m.entries) out.push_back(dataio::load_sample(m, e));
    return out;
}

std::string eps_tag(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", eps);
    std::string s(buf);
    for (auto& c : s)
        if (c == '.') c = 'p';
    return s;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

int cmd_generate(const std::string& task, std::int64_t count, std::uint64_t seed, int resolution,
                 const std::vector<double>& fractions, bool png, const std::string& out) {
    if (count < 1) throw ConfigError("generate: --count must be >= 1");
    if (fractions.size() != 3) throw ConfigError("generate: --fractions needs three values");
    dataio::SynthFaceSpec spec;
    spec.seed = seed;
    spec.resolution = resolution;
    dataio::write_dataset(out, task, spec, count,
                          {fractions[0], fractions[1], fractions[2]}, png);
    std::printf("generate: wrote %lld samples to %s\n", static_cast<long long>(count),
                out.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// defend
// ---------------------------------------------------------------------------

json train_config_json(const training::TrainConfig& cfg, const std::string& dataset) {
    return json{{"task", training::to_string(cfg.task)},
                {"dataset", dataset},
                {"maxiter", cfg.maxiter},
                {"batch_size", cfg.batch_size},
                {"lr_pg", cfg.pg_lr()},
                {"lr_sm", cfg.sm_lr()},
                {"eps_train", cfg.eps_train},
                {"domains_per_sample", cfg.domains_per_sample},
                {"n_critic", cfg.n_critic},
                {"unroll_steps", cfg.unroll_steps},
                {"unroll_lr", cfg.unroll_lr},
                {"shadow_steps", cfg.shadow_steps},
                {"enhancement", cfg.enhancement},
                {"alternating", cfg.alternating},
                {"seed", cfg.seed},
                {"domain_tag", cfg.domain_tag},
                {"sm_arch", models::to_string(cfg.sm_arch)},
                {"pg_arch", models::to_string(cfg.pg_arch)},
                {"resolution", cfg.resolution},
                {"base_width", cfg.base_width},
                {"critic_width", cfg.critic_width},
                {"probe_size", cfg.probe_size},
                {"weights",
                 {{"lambda", cfg.weights.lambda},
                  {"lambda1", cfg.weights.lambda1},
                  {"lambda2", cfg.weights.lambda2},
                  {"lambda3", cfg.weights.lambda3},
                  {"lambda4", cfg.weights.lambda4}}}};
}

int cmd_defend(const training::TrainConfig& cfg, const std::string& dataset,
               const std::string& out, bool resume, std::int64_t save_every) {
    dataio::DatasetManifest m = dataio::load_manifest(dataset);
    std::vector<dataio::FaceSample> train = load_split(m, m.splits.defense_train);

    fs::create_directories(out);
    {
        std::ofstream cf(fs::path(out) / "run_config.json");
        cf << train_config_json(cfg, dataset).dump(2) << "\n";
    }

    training::Trainer trainer(cfg, std::move(train));
    const fs::path state_path = fs::path(out) / "resume.state";
    if (resume && fs::exists(state_path)) {
        trainer.load_state(state_path.string());
        std::printf("defend: resumed at step %lld\n",
                    static_cast<long long>(trainer.current_step()));
    }

    while (trainer.current_step() < cfg.maxiter) {
        trainer.step();
        const auto& h = trainer.history().back();
        if (h.step % 100 == 0 || h.step == cfg.maxiter)
            std::printf("defend: step %lld dist %.6f maxdist %.6f loss_pg %.4f\n",
                        static_cast<long long>(h.step), h.dist, h.maxdist, h.loss_pg);
        if (save_every > 0 && h.step % save_every == 0) {
            trainer.save_state(state_path.string());
            models::save_checkpoint(
                trainer.pg(), (fs::path(out) / ("PG_" + std::to_string(h.step) + ".ckpt")).string());
            models::save_checkpoint(
                trainer.sm(), (fs::path(out) / ("SM_" + std::to_string(h.step) + ".ckpt")).string());
            training::write_history_csv((fs::path(out) / "history.csv").string(),
                                        trainer.history());
        }
    }
    trainer.save_state(state_path.string());

    training::RunResult res = trainer.result();
    models::save_checkpoint(res.pg_best, (fs::path(out) / "pg_best.ckpt").string());
    models::save_checkpoint(trainer.sm(), (fs::path(out) / "sm_final.ckpt").string());
    if (cfg.task == training::TaskKind::Reenactment)
        models::save_checkpoint(trainer.tm(), (fs::path(out) / "tm_final.ckpt").string());
    training::write_history_csv((fs::path(out) / "history.csv").string(), res.history);

    std::vector<evaluation::Series> curves(3);
    curves[0].label = "dist";
    curves[1].label = "loss_pg";
    curves[2].label = "loss_sm";
    for (const auto& h : res.history) {
        const double s = static_cast<double>(h.step);
        curves[0].xs.push_back(s);
        curves[0].ys.push_back(h.dist);
        curves[1].xs.push_back(s);
        curves[1].ys.push_back(h.loss_pg);
        curves[2].xs.push_back(s);
        curves[2].ys.push_back(h.loss_sm);
    }
    evaluation::line_plot_png((fs::path(out) / "loss_curves.png").string(), curves);

    std::printf("defend: done, maxdist %.6f, PG_best at %s\n", res.maxdist,
                (fs::path(out) / "pg_best.ckpt").c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// poison
// ---------------------------------------------------------------------------

int cmd_poison(const std::string& generator, const std::string& input, double eps,
               const std::string& out, bool png) {
    models::ModelHandle pg = models::load_checkpoint(generator);
    if (pg.role != models::Role::PG)
        throw ConfigError("poison: checkpoint role must be PG, got " + models::to_string(pg.role));

    dataio::DatasetManifest m = dataio::load_manifest(input);
    fs::create_directories(fs::path(out) / "data");

    std::FILE* sidecar = std::fopen((fs::path(out) / "sidecar.csv").string().c_str(), "wb");
    if (!sidecar) throw IoError("poison: cannot write sidecar.csv");
    std::fprintf(sidecar, "index,file,linf,psnr\n");

    json jentries = json::array();
    for (const auto& e : m.entries) {
        dataio::FaceSample s = dataio::load_sample(m, e);
        dataio::ImageTensor xp = models::perturb(pg, s.image, eps);

        double linf = 0.0;
        for (std::size_t i = 0; i < xp.data.size(); ++i)
            linf = std::max(linf, std::fabs(static_cast<double>(xp.data[i]) - s.image.data[i]));
        if (linf > eps)
            throw ContractViolation("poison: budget exceeded on index " + std::to_string(e.index));
        const double q = evaluation::psnr(s.image, xp);

        dataio::save_raw(xp, (fs::path(out) / e.image).string());
        dataio::save_raw(s.landmark_map, (fs::path(out) / e.landmarks).string());
        dataio::save_raw(s.mask, (fs::path(out) / e.mask).string());
        if (png && e.index < 16) {
            fs::path p = fs::path(out) / e.image;
            p.replace_extension(".png");
            dataio::save_png(xp, p.string());
        }
        std::fprintf(sidecar, "%lld,%s,%.17g,%.17g\n", static_cast<long long>(e.index),
                     e.image.c_str(), linf, q);

        json kp = json::array();
        for (const auto& p : e.keypoints) kp.push_back({p[0], p[1]});
        jentries.push_back({{"index", e.index},
                            {"bits", e.bits},
                            {"keypoints", kp},
                            {"image", e.image},
                            {"landmarks", e.landmarks},
                            {"mask", e.mask}});
    }
    std::fclose(sidecar);

    json j{{"task", m.task},
           {"spec",
            {{"seed", m.spec.seed},
             {"resolution", m.spec.resolution},
             {"landmark_points", m.spec.landmark_points},
             {"stamp_radius", m.spec.stamp_radius}}},
           {"count", m.count},
           {"fractions", m.fractions},
           {"splits",
            {{"defense_train", m.splits.defense_train},
             {"target_train", m.splits.target_train},
             {"eval", m.splits.eval}}},
           {"poisoned", {{"generator", generator}, {"epsilon", eps}}},
           {"entries", jentries}};
    std::ofstream mo(fs::path(out) / "manifest.json");
    mo << j.dump(2) << "\n";

    std::printf("poison: wrote %zu poisoned images to %s (eps=%g)\n", m.entries.size(),
                out.c_str(), eps);
    return 0;
}

// ---------------------------------------------------------------------------
// forge
// ---------------------------------------------------------------------------

int cmd_forge(const std::string& model_path, const std::string& input, const std::string& domain,
              const std::string& out, bool png) {
    models::ModelHandle m = models::load_checkpoint(model_path);
    dataio::DatasetManifest man = dataio::load_manifest(input);
    fs::create_directories(out);

    const bool editing = m.arch.conditioning == models::Conditioning::AttributeBroadcast;
    if (editing && domain.empty())
        throw ConfigError("forge: --domain required for attribute editing models");

    std::optional<training::DomainTransform> tr;
    if (editing && domain != "identity") {
        for (const auto& t : training::domain_set("SD").transforms)
            if (t.name == domain) tr = t;
        for (const auto& t : training::domain_set("DD").transforms)
            if (!tr && t.name == domain) tr = t;
        if (!tr) throw ConfigError("forge: unknown domain transform " + domain);
    }

    for (const auto& e : man.entries) {
        dataio::FaceSample s = dataio::load_sample(man, e);
        dataio::ImageTensor y;
        if (editing) {
            const dataio::DomainLabel c = tr ? tr->apply(s.label) : s.label;
            y = models::forward_editor(m, s.image, c);
        } else {
            y = models::forward_translator(m, s.landmark_map);
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(e.index));
        dataio::save_raw(y, (fs::path(out) / (std::string("forge_") + buf + ".vgf")).string());
        if (png && e.index < 16)
            dataio::save_png(y, (fs::path(out) / (std::string("forge_") + buf + ".png")).string());
    }
    std::printf("forge: wrote %zu forgeries to %s\n", man.entries.size(), out.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct TargetRequest {
    std::string arch;
    std::string tag;
    std::string ckpt;  // empty: train from the dataset's target split
};

TargetRequest parse_target(const std::string& s) {
    TargetRequest t;
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ConfigError("eval: target format is ARCH:TAG or ARCH:TAG:ckpt");
    t.arch = s.substr(0, colon);
    const auto rest = s.substr(colon + 1);
    const auto colon2 = rest.find(':');
    if (colon2 == std::string::npos) {
        t.tag = rest;
    } else {
        t.tag = rest.substr(0, colon2);
        t.ckpt = rest.substr(colon2 + 1);
    }
    return t;
}

int cmd_eval_editing(const std::string& dataset, const std::string& pg_path,
                     const std::vector<std::string>& target_specs,
                     const std::vector<double>& eps_grid, double threshold,
                     const std::string& surrogate_arch, const std::string& surrogate_tag,
                     std::int64_t target_iters, std::uint64_t seed, bool noise_baseline,
                     const std::string& out) {
    if (eps_grid.empty()) throw ConfigError("eval: empty epsilon grid");
    dataio::DatasetManifest man = dataio::load_manifest(dataset);
    std::vector<dataio::FaceSample> eval_set = load_split(man, man.splits.eval);
    std::vector<dataio::FaceSample> target_train = load_split(man, man.splits.target_train);
    models::ModelHandle pg = models::load_checkpoint(pg_path);
    fs::create_directories(out);

    // materialize target models (load or train + cache)
    std::vector<models::ModelHandle> targets;
    std::vector<std::string> tags;
    for (std::size_t i = 0; i < target_specs.size(); ++i) {
        TargetRequest req = parse_target(target_specs[i]);
        fs::path cache = req.ckpt.empty()
                             ? fs::path(out) / ("target_" + req.arch + "_" + req.tag + ".ckpt")
                             : fs::path(req.ckpt);
        if (fs::exists(cache)) {
            targets.push_back(models::load_checkpoint(cache.string()));
        } else {
            if (!req.ckpt.empty())
                throw ConfigError("eval: missing target checkpoint " + req.ckpt);
            training::TargetConfig tc;
            tc.task = training::TaskKind::AttributeEditing;
            tc.arch = models::arch_from_string(req.arch);
            tc.domain_tag = req.tag;
            tc.iters = target_iters;
            tc.seed = Rng::mix(seed, 1000 + i);
            tc.resolution = man.spec.resolution;
            std::printf("eval: training target %s:%s (%lld iters)\n", req.arch.c_str(),
                        req.tag.c_str(), static_cast<long long>(target_iters));
            targets.push_back(training::train_target_model(tc, target_train, false));
            models::save_checkpoint(targets.back(), cache.string());
        }
        tags.push_back(req.tag);
    }

    std::vector<evaluation::Series> dsr_series(targets.size()), l2_series(targets.size());
    Rng noise_rng(Rng::mix(seed, 0xbadd));

    for (double eps : eps_grid) {
        std::vector<evaluation::TargetSpec> specs;
        for (std::size_t i = 0; i < targets.size(); ++i)
            specs.push_back({&targets[i], tags[i]});
        auto reports = evaluation::transfer_matrix(pg, surrogate_arch, surrogate_tag, specs,
                                                   eval_set, eps, threshold);
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            const std::string stem = "report_" + r.setting.target_arch + "_" + r.setting.domain_tag +
                                     "_eps" + eps_tag(eps);
            evaluation::write_report_csv(r, (fs::path(out) / (stem + ".csv")).string());
            evaluation::write_report_json(r, (fs::path(out) / (stem + ".json")).string());
            dsr_series[i].label = r.setting.target_arch + ":" + r.setting.domain_tag;
            dsr_series[i].xs.push_back(eps);
            dsr_series[i].ys.push_back(r.dsr);
            l2_series[i].xs.push_back(eps);
            l2_series[i].ys.push_back(r.mean_l2);
            std::printf("eval: eps=%g target=%s:%s%s dsr=%.3f mean_l2=%.4f\n", eps,
                        r.setting.target_arch.c_str(), r.setting.domain_tag.c_str(),
                        r.setting.gray_box ? " (gray-box)" : "", r.dsr, r.mean_l2);
        }

        if (noise_baseline) {
            std::vector<dataio::ImageTensor> noisy;
            for (const auto& s : eval_set)
                noisy.push_back(evaluation::noise_perturb(s.image, eps, noise_rng));
            for (std::size_t i = 0; i < targets.size(); ++i) {
                evaluation::SettingInfo info;
                info.surrogate_arch = "noise";
                info.target_arch = models::to_string(targets[i].arch.name);
                info.domain_tag = tags[i];
                info.epsilon = eps;
                auto r = evaluation::evaluate_editing(targets[i], eval_set, noisy, info, threshold);
                const std::string stem = "noise_" + info.target_arch + "_" + info.domain_tag +
                                         "_eps" + eps_tag(eps);
                evaluation::write_report_csv(r, (fs::path(out) / (stem + ".csv")).string());
                evaluation::write_report_json(r, (fs::path(out) / (stem + ".json")).string());
            }
        }
    }
    evaluation::line_plot_png((fs::path(out) / "dsr_vs_eps.png").string(), dsr_series);
    evaluation::line_plot_png((fs::path(out) / "l2_vs_eps.png").string(), l2_series);

    // LBP side-by-side on the gray-box (or first) target at the largest eps
    {
        const double eps = eps_grid.back();
        std::size_t gi = 0;
        for (std::size_t i = 0; i < targets.size(); ++i)
            if (models::to_string(targets[i].arch.name) == surrogate_arch && tags[i] == surrogate_tag)
                gi = i;
        const training::DomainSet& set = training::domain_set(tags[gi]);
        std::vector<std::vector<dataio::ImageTensor>> rows;
        for (std::size_t i = 0; i < std::min<std::size_t>(6, eval_set.size()); ++i) {
            const auto& s = eval_set[i];
            dataio::ImageTensor xp = models::perturb(pg, s.image, eps);
            const dataio::DomainLabel c = set.transforms[0].apply(s.label);
            dataio::ImageTensor y = models::forward_editor(targets[gi], s.image, c);
            dataio::ImageTensor yp = models::forward_editor(targets[gi], xp, c);
            rows.push_back({s.image, xp, y, yp, evaluation::lbp_map(y), evaluation::lbp_map(yp)});
        }
        dataio::save_png(evaluation::image_grid(rows), (fs::path(out) / "lbp_grid.png").string());
    }
    return 0;
}

int cmd_eval_reenactment(const std::string& dataset, const std::string& poisoned_dir,
                         const std::string& clean_ckpt, const std::string& infected_ckpt,
                         const std::string& arch, double threshold, std::int64_t target_iters,
                         std::uint64_t seed, const std::string& surrogate_arch,
                         const std::string& out) {
    dataio::DatasetManifest man = dataio::load_manifest(dataset);
    std::vector<dataio::FaceSample> eval_set = load_split(man, man.splits.eval);
    std::vector<dataio::FaceSample> clean_train = load_split(man, man.splits.target_train);
    fs::create_directories(out);

    auto materialize = [&](const std::string& ckpt, const char* cache_name, bool infected,
                           const std::vector<dataio::FaceSample>& data) -> models::ModelHandle {
        fs::path cache = ckpt.empty() ? fs::path(out) / cache_name : fs::path(ckpt);
        if (fs::exists(cache)) return models::load_checkpoint(cache.string());
        if (!ckpt.empty()) throw ConfigError("eval: missing checkpoint " + ckpt);
        training::TargetConfig tc;
        tc.task = training::TaskKind::Reenactment;
        tc.arch = models::arch_from_string(arch);
        tc.iters = target_iters;
        tc.lr = 2e-4;
        tc.seed = Rng::mix(seed, infected ? 77 : 76);
        tc.resolution = man.spec.resolution;
        std::printf("eval: training %s reenactment model (%lld iters)\n",
                    infected ? "infected" : "clean", static_cast<long long>(target_iters));
        models::ModelHandle m = training::train_target_model(tc, data, infected);
        models::save_checkpoint(m, cache.string());
        return m;
    };

    models::ModelHandle m_clean = materialize(clean_ckpt, "target_clean.ckpt", false, clean_train);

    std::vector<dataio::FaceSample> poisoned_train;
    if (!poisoned_dir.empty()) {
        dataio::DatasetManifest pman = dataio::load_manifest(poisoned_dir);
        poisoned_train = load_split(pman, pman.splits.target_train);
    } else if (infected_ckpt.empty()) {
        throw ConfigError("eval: reenactment needs --poisoned or --infected-model");
    }
    models::ModelHandle m_inf =
        materialize(infected_ckpt, "target_infected.ckpt", true, poisoned_train);

    evaluation::SettingInfo info;
    info.surrogate_arch = surrogate_arch;
    info.target_arch = arch;
    info.domain_tag = "SD";
    info.gray_box = surrogate_arch == arch;
    auto r = evaluation::evaluate_reenactment(m_clean, m_inf, eval_set, info, threshold);
    evaluation::write_report_csv(r, (fs::path(out) / "report_reenactment.csv").string());
    evaluation::write_report_json(r, (fs::path(out) / "report_reenactment.json").string());
    std::printf("eval: reenactment dsr=%.3f mean_l1=%.4f mean_l2=%.5f\n", r.dsr, r.mean_l1,
                r.mean_l2);

    std::vector<std::vector<dataio::ImageTensor>> rows;
    for (std::size_t i = 0; i < std::min<std::size_t>(6, eval_set.size()); ++i) {
        const auto& s = eval_set[i];
        dataio::ImageTensor y = models::forward_translator(m_clean, s.landmark_map);
        dataio::ImageTensor yp = models::forward_translator(m_inf, s.landmark_map);
        rows.push_back({s.image, y, yp, evaluation::lbp_map(y), evaluation::lbp_map(yp)});
    }
    dataio::save_png(evaluation::image_grid(rows), (fs::path(out) / "lbp_grid.png").string());
    return 0;
}

// ---------------------------------------------------------------------------
// stack
// ---------------------------------------------------------------------------

int cmd_stack(const std::string& pg_edit_path, const std::string& pg_reen_path,
              const std::string& input, double eps1, double eps2, const std::string& out,
              bool png) {
    models::ModelHandle pg_e = models::load_checkpoint(pg_edit_path);
    models::ModelHandle pg_r = models::load_checkpoint(pg_reen_path);
    if (pg_e.role != models::Role::PG || pg_r.role != models::Role::PG)
        throw ConfigError("stack: both checkpoints must have role PG");

    dataio::DatasetManifest man = dataio::load_manifest(input);
    fs::create_directories(fs::path(out) / "data");
    std::FILE* sidecar = std::fopen((fs::path(out) / "sidecar.csv").string().c_str(), "wb");
    if (!sidecar) throw IoError("stack: cannot write sidecar.csv");
    std::fprintf(sidecar, "index,file,linf,budget\n");

    json jentries = json::array();
    for (const auto& e : man.entries) {
        dataio::FaceSample s = dataio::load_sample(man, e);
        dataio::ImageTensor x1 = models::perturb(pg_e, s.image, eps1);
        dataio::ImageTensor x2 = models::perturb(pg_r, x1, eps2);
        double linf = 0.0;
        for (std::size_t i = 0; i < x2.data.size(); ++i)
            linf = std::max(linf, std::fabs(static_cast<double>(x2.data[i]) - s.image.data[i]));
        if (linf > eps1 + eps2)
            throw ContractViolation("stack: combined budget exceeded on index " +
                                    std::to_string(e.index));
        dataio::save_raw(x2, (fs::path(out) / e.image).string());
        dataio::save_raw(s.landmark_map, (fs::path(out) / e.landmarks).string());
        dataio::save_raw(s.mask, (fs::path(out) / e.mask).string());
        if (png && e.index < 16) {
            fs::path p = fs::path(out) / e.image;
            p.replace_extension(".png");
            dataio::save_png(x2, p.string());
        }
        std::fprintf(sidecar, "%lld,%s,%.17g,%.17g\n", static_cast<long long>(e.index),
                     e.image.c_str(), linf, eps1 + eps2);
        json kp = json::array();
        for (const auto& p : e.keypoints) kp.push_back({p[0], p[1]});
        jentries.push_back({{"index", e.index},
                            {"bits", e.bits},
                            {"keypoints", kp},
                            {"image", e.image},
                            {"landmarks", e.landmarks},
                            {"mask", e.mask}});
    }
    std::fclose(sidecar);
    json j{{"task", man.task},
           {"spec",
            {{"seed", man.spec.seed},
             {"resolution", man.spec.resolution},
             {"landmark_points", man.spec.landmark_points},
             {"stamp_radius", man.spec.stamp_radius}}},
           {"count", man.count},
           {"fractions", man.fractions},
           {"splits",
            {{"defense_train", man.splits.defense_train},
             {"target_train", man.splits.target_train},
             {"eval", man.splits.eval}}},
           {"stacked", {{"eps1", eps1}, {"eps2", eps2}}},
           {"entries", jentries}};
    std::ofstream mo(fs::path(out) / "manifest.json");
    mo << j.dump(2) << "\n";
    std::printf("stack: wrote %zu stacked frames to %s\n", man.entries.size(), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"initiative-defense pipeline for facial-manipulation poisoning"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config; flags override file values");

    // generate
    auto* gen = app.add_subcommand("generate", "create a synthetic dataset");
    std::string g_task = "attribute_editing", g_out = "runs/dataset";
    std::int64_t g_count = 512;
    std::uint64_t g_seed = 7;
    int g_res = 32;
    std::vector<double> g_fracs{0.5, 0.4, 0.1};
    bool g_png = false;
    gen->add_option("--task", g_task);
    gen->add_option("--count", g_count);
    gen->add_option("--seed", g_seed);
    gen->add_option("--resolution", g_res);
    gen->add_option("--fractions", g_fracs)->expected(3);
    gen->add_flag("--png", g_png, "also write PNG previews");
    gen->add_option("--out", g_out)->required();

    // defend
    auto* def = app.add_subcommand("defend", "two-stage training of the perturbation generator");
    training::TrainConfig dcfg;
    std::string d_task = "attribute_editing", d_dataset, d_out = "runs/defense";
    std::string d_sm_arch = "Res6", d_pg_arch = "UNet128", d_domains = "SD";
    bool d_resume = false, d_no_enh = false, d_no_alt = false;
    std::int64_t d_save_every = 500;
    def->add_option("--task", d_task);
    def->add_option("--dataset", d_dataset)->required();
    def->add_option("--out", d_out)->required();
    def->add_option("--maxiter", dcfg.maxiter);
    def->add_option("--batch", dcfg.batch_size);
    def->add_option("--epsilon", dcfg.eps_train);
    def->add_option("--seed", dcfg.seed);
    def->add_option("--lr-pg", dcfg.lr_pg);
    def->add_option("--lr-sm", dcfg.lr_sm);
    def->add_option("--domains", d_domains, "domain set tag (SD/DD)");
    def->add_option("--domains-per-sample", dcfg.domains_per_sample);
    def->add_option("--n-critic", dcfg.n_critic);
    def->add_option("--unroll-steps", dcfg.unroll_steps);
    def->add_option("--unroll-lr", dcfg.unroll_lr);
    def->add_option("--shadow-steps", dcfg.shadow_steps);
    def->add_option("--arch", d_sm_arch, "surrogate architecture tag");
    def->add_option("--pg-arch", d_pg_arch);
    def->add_option("--base-width", dcfg.base_width);
    def->add_option("--critic-width", dcfg.critic_width);
    def->add_option("--probe-size", dcfg.probe_size);
    def->add_option("--save-every", d_save_every);
    def->add_flag("--resume", d_resume, "continue from resume.state");
    def->add_flag("--no-enhancement", d_no_enh);
    def->add_flag("--no-alternating", d_no_alt, "ablation: pre-train stage A fully");

    // poison
    auto* poi = app.add_subcommand("poison", "apply a trained generator to a dataset");
    std::string p_gen, p_in, p_out;
    double p_eps = 0.05;
    bool p_png = false;
    poi->add_option("--generator", p_gen)->required();
    poi->add_option("--input", p_in)->required();
    poi->add_option("--epsilon", p_eps);
    poi->add_flag("--png", p_png);
    poi->add_option("--out", p_out)->required();

    // forge
    auto* for_ = app.add_subcommand("forge", "run a manipulation model over a dataset");
    std::string f_model, f_in, f_domain, f_out;
    bool f_png = false;
    for_->add_option("--model", f_model)->required();
    for_->add_option("--input", f_in)->required();
    for_->add_option("--domain", f_domain, "transform name, or 'identity'");
    for_->add_flag("--png", f_png);
    for_->add_option("--out", f_out)->required();

    // eval
    auto* ev = app.add_subcommand("eval", "defense reports and transfer matrix");
    std::string e_task = "attribute_editing", e_dataset, e_pg, e_out = "runs/eval";
    std::string e_surrogate_arch = "Res6", e_surrogate_tag = "SD";
    std::vector<std::string> e_targets;
    std::vector<double> e_grid{0.05};
    double e_threshold = 0.05;
    std::int64_t e_target_iters = 1500;
    std::uint64_t e_seed = 97;
    bool e_noise = false;
    std::string e_poisoned, e_clean_ckpt, e_infected_ckpt, e_arch = "UNet256";
    ev->add_option("--task", e_task);
    ev->add_option("--dataset", e_dataset)->required();
    ev->add_option("--pg", e_pg, "generator checkpoint (editing)");
    ev->add_option("--target", e_targets, "editing target ARCH:TAG[:ckpt] (repeatable)");
    ev->add_option("--epsilon-grid", e_grid, "intensity sweep");
    ev->add_option("--threshold", e_threshold, "DSR distance threshold");
    ev->add_option("--target-iters", e_target_iters);
    ev->add_option("--seed", e_seed);
    ev->add_option("--surrogate-arch", e_surrogate_arch);
    ev->add_option("--surrogate-domains", e_surrogate_tag);
    ev->add_flag("--noise-baseline", e_noise, "also report uniform-noise rows");
    ev->add_option("--poisoned", e_poisoned, "poisoned dataset dir (reenactment)");
    ev->add_option("--clean-model", e_clean_ckpt);
    ev->add_option("--infected-model", e_infected_ckpt);
    ev->add_option("--arch", e_arch, "reenactment target architecture");
    ev->add_option("--out", e_out)->required();

    // stack
    auto* st = app.add_subcommand("stack", "compose editing + reenactment perturbations");
    std::string s_pg_e, s_pg_r, s_in, s_out;
    double s_eps1 = 0.05, s_eps2 = 0.02;
    bool s_png = false;
    st->add_option("--pg-editing", s_pg_e)->required();
    st->add_option("--pg-reenactment", s_pg_r)->required();
    st->add_option("--input", s_in)->required();
    st->add_option("--eps1", s_eps1);
    st->add_option("--eps2", s_eps2);
    st->add_flag("--png", s_png);
    st->add_option("--out", s_out)->required();

    try {
        app.parse(argc, argv);

        const json jcfg = load_config_file(config_path);

        if (gen->parsed()) {
            cfg_fill(*gen, "--task", jcfg, "task", g_task);
            cfg_fill(*gen, "--count", jcfg, "count", g_count);
            cfg_fill(*gen, "--seed", jcfg, "seed", g_seed);
            cfg_fill(*gen, "--resolution", jcfg, "resolution", g_res);
            return cmd_generate(g_task, g_count, g_seed, g_res, g_fracs, g_png, g_out);
        }
        if (def->parsed()) {
            cfg_fill(*def, "--task", jcfg, "task", d_task);
            cfg_fill(*def, "--maxiter", jcfg, "maxiter", dcfg.maxiter);
            cfg_fill(*def, "--batch", jcfg, "batch_size", dcfg.batch_size);
            cfg_fill(*def, "--epsilon", jcfg, "eps_train", dcfg.eps_train);
            cfg_fill(*def, "--seed", jcfg, "seed", dcfg.seed);
            cfg_fill(*def, "--domains", jcfg, "domain_tag", d_domains);
            cfg_fill(*def, "--arch", jcfg, "sm_arch", d_sm_arch);
            cfg_fill(*def, "--pg-arch", jcfg, "pg_arch", d_pg_arch);
            cfg_fill(*def, "--unroll-steps", jcfg, "unroll_steps", dcfg.unroll_steps);
            cfg_fill(*def, "--unroll-lr", jcfg, "unroll_lr", dcfg.unroll_lr);
            dcfg.task = training::task_from_string(d_task);
            dcfg.domain_tag = d_domains;
            dcfg.sm_arch = models::arch_from_string(d_sm_arch);
            dcfg.pg_arch = models::arch_from_string(d_pg_arch);
            if (d_no_enh) dcfg.enhancement = false;
            if (d_no_alt) dcfg.alternating = false;
            dataio::DatasetManifest m = dataio::load_manifest(d_dataset);
            dcfg.resolution = m.spec.resolution;
            return cmd_defend(dcfg, d_dataset, d_out, d_resume, d_save_every);
        }
        if (poi->parsed()) return cmd_poison(p_gen, p_in, p_eps, p_out, p_png);
        if (for_->parsed()) return cmd_forge(f_model, f_in, f_domain, f_out, f_png);
        if (ev->parsed()) {
            training::task_from_string(e_task);  // validates
            if (e_task == "attribute_editing") {
                if (e_pg.empty()) throw ConfigError("eval: --pg required for editing");
                if (e_targets.empty()) throw ConfigError("eval: at least one --target required");
                return cmd_eval_editing(e_dataset, e_pg, e_targets, e_grid, e_threshold,
                                        e_surrogate_arch, e_surrogate_tag, e_target_iters, e_seed,
                                        e_noise, e_out);
            }
            return cmd_eval_reenactment(e_dataset, e_poisoned, e_clean_ckpt, e_infected_ckpt,
                                        e_arch, e_threshold, e_target_iters, e_seed,
                                        e_surrogate_arch, e_out);
        }
        if (st->parsed()) return cmd_stack(s_pg_e, s_pg_r, s_in, s_eps1, s_eps2, s_out, s_png);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const TrainingAbort& e) {
        std::fprintf(stderr, "training abort: %s\n", e.what());
        return 3;
    } catch (const ContractViolation& e) {
        std::fprintf(stderr, "contract violation: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
