#include "venomguard/evaluation/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "venomguard/training/domains.hpp"

using nlohmann::json;

namespace vg::evaluation {

using dataio::FaceSample;
using dataio::ImageTensor;

namespace {

void finalize(DefenseReport& r) {
    double l1 = 0.0, l2 = 0.0;
    std::size_t hits = 0;
    for (const auto& row : r.per_image) {
        l1 += row.l1;
        l2 += row.l2;
        if (row.success) ++hits;
    }
    const double n = static_cast<double>(r.per_image.size());
    r.mean_l1 = l1 / n;
    r.mean_l2 = l2 / n;
    r.dsr = static_cast<double>(hits) / n;
}

}  // namespace

DefenseReport evaluate_editing(const models::ModelHandle& target,
                               const std::vector<FaceSample>& eval_set,
                               const std::vector<ImageTensor>& poisoned, SettingInfo setting,
                               double dsr_threshold) {
    if (eval_set.empty()) throw ConfigError("evaluate_editing: empty eval set");
    if (eval_set.size() != poisoned.size())
        throw ConfigError("evaluate_editing: clean/poisoned count mismatch");
    const training::DomainSet& set = training::domain_set(setting.domain_tag);

    DefenseReport r;
    r.setting = std::move(setting);
    for (std::size_t i = 0; i < eval_set.size(); ++i) {
        const FaceSample& s = eval_set[i];
        PerImageRow row;
        row.id = static_cast<std::int64_t>(i);
        row.psnr = psnr(s.image, poisoned[i]);
        double l1 = 0.0, l2 = 0.0, perc = 0.0;
        for (const auto& tr : set.transforms) {
            const dataio::DomainLabel c = tr.apply(s.label);
            ImageTensor y = models::forward_editor(target, s.image, c);
            ImageTensor yp = models::forward_editor(target, poisoned[i], c);
            l1 += distance(y, yp, DistanceKind::L1);
            l2 += distance(y, yp, DistanceKind::L2);
            perc += perceptual_distance(y, yp);
        }
        const double j = static_cast<double>(set.transforms.size());
        row.l1 = l1 / j;
        row.l2 = l2 / j;
        row.perceptual = perc / j;
        row.success = row.l2 > dsr_threshold;
        r.per_image.push_back(row);
    }
    finalize(r);
    return r;
}

DefenseReport evaluate_reenactment(const models::ModelHandle& m_clean,
                                   const models::ModelHandle& m_infected,
                                   const std::vector<FaceSample>& eval_set, SettingInfo setting,
                                   double dsr_threshold) {
    if (eval_set.empty()) throw ConfigError("evaluate_reenactment: empty eval set");
    DefenseReport r;
    r.setting = std::move(setting);
    for (std::size_t i = 0; i < eval_set.size(); ++i) {
        const FaceSample& s = eval_set[i];
        ImageTensor y = models::forward_translator(m_clean, s.landmark_map);
        ImageTensor yp = models::forward_translator(m_infected, s.landmark_map);
        PerImageRow row;
        row.id = static_cast<std::int64_t>(i);
        row.l1 = distance(y, yp, DistanceKind::L1);
        row.l2 = distance(y, yp, DistanceKind::L2);
        row.psnr = psnr(y, yp);
        row.perceptual = perceptual_distance(y, yp);
        row.success = row.l1 > dsr_threshold;
        r.per_image.push_back(row);
    }
    finalize(r);
    return r;
}

std::vector<DefenseReport> transfer_matrix(const models::ModelHandle& pg,
                                           const std::string& surrogate_arch,
                                           const std::string& surrogate_domain_tag,
                                           const std::vector<TargetSpec>& targets,
                                           const std::vector<FaceSample>& eval_set, double eps,
                                           double dsr_threshold) {
    if (targets.empty()) throw ConfigError("transfer_matrix: no targets");
    std::vector<ImageTensor> poisoned;
    poisoned.reserve(eval_set.size());
    for (const auto& s : eval_set) poisoned.push_back(models::perturb(pg, s.image, eps));

    std::vector<DefenseReport> out;
    for (const auto& t : targets) {
        if (!t.model) throw ConfigError("transfer_matrix: missing target model");
        SettingInfo info;
        info.surrogate_arch = surrogate_arch;
        info.target_arch = to_string(t.model->arch.name);
        info.domain_tag = t.domain_tag;
        info.epsilon = eps;
        info.gray_box =
            info.target_arch == surrogate_arch && t.domain_tag == surrogate_domain_tag;
        out.push_back(evaluate_editing(*t.model, eval_set, poisoned, info, dsr_threshold));
    }
    return out;
}

void write_report_csv(const DefenseReport& r, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("write_report_csv: cannot open " + path);
    std::fprintf(f, "id,l1,l2,psnr,perceptual,success\n");
    for (const auto& row : r.per_image)
        std::fprintf(f, "%lld,%.17g,%.17g,%.17g,%.17g,%d\n", static_cast<long long>(row.id),
                     row.l1, row.l2, row.psnr, row.perceptual, row.success ? 1 : 0);
    std::fclose(f);
}

void write_report_json(const DefenseReport& r, const std::string& path) {
    std::size_t hits = 0;
    for (const auto& row : r.per_image)
        if (row.success) ++hits;
    json j{{"setting",
            {{"surrogate_arch", r.setting.surrogate_arch},
             {"target_arch", r.setting.target_arch},
             {"domain_tag", r.setting.domain_tag},
             {"epsilon", r.setting.epsilon},
             {"gray_box", r.setting.gray_box}}},
           {"count", r.per_image.size()},
           {"successes", hits},
           {"dsr", r.dsr},
           {"mean_l1", r.mean_l1},
           {"mean_l2", r.mean_l2}};
    std::ofstream out(path);
    if (!out) throw IoError("write_report_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

DefenseReport read_report_summary_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_report_summary_json: cannot open " + path);
    json j;
    in >> j;
    DefenseReport r;
    r.setting.surrogate_arch = j.at("setting").at("surrogate_arch").get<std::string>();
    r.setting.target_arch = j.at("setting").at("target_arch").get<std::string>();
    r.setting.domain_tag = j.at("setting").at("domain_tag").get<std::string>();
    r.setting.epsilon = j.at("setting").at("epsilon").get<double>();
    r.setting.gray_box = j.at("setting").at("gray_box").get<bool>();
    r.dsr = j.at("dsr").get<double>();
    r.mean_l1 = j.at("mean_l1").get<double>();
    r.mean_l2 = j.at("mean_l2").get<double>();
    return r;
}

}  // namespace vg::evaluation
