#pragma once

#include <string>
#include <vector>

#include "venomguard/dataio/dataset.hpp"
#include "venomguard/evaluation/metrics.hpp"
#include "venomguard/models/models.hpp"

namespace vg::evaluation {

struct SettingInfo {
    std::string surrogate_arch;
    std::string target_arch;
    std::string domain_tag;  // target's domain choice: SD / DD
    double epsilon = 0.0;
    bool gray_box = false;
};

struct PerImageRow {
    std::int64_t id = 0;
    double l1 = 0.0;          // mean over eval domains of L1(y, y')
    double l2 = 0.0;
    double psnr = 0.0;        // editing: psnr(x, x'); reenactment: psnr(y, y')
    double perceptual = 0.0;  // mean over eval domains
    bool success = false;     // task DSR rule on the per-image mean distance
};

struct DefenseReport {
    SettingInfo setting;
    std::vector<PerImageRow> per_image;
    double mean_l1 = 0.0;
    double mean_l2 = 0.0;
    double dsr = 0.0;
};

// Editing: forge each eval image in every domain of the target's set, on
// clean and poisoned inputs, and compare the forgeries.
DefenseReport evaluate_editing(const models::ModelHandle& target,
                               const std::vector<dataio::FaceSample>& eval_set,
                               const std::vector<dataio::ImageTensor>& poisoned,
                               SettingInfo setting, double dsr_threshold = 0.05);

// Reenactment: same held-out landmarks through the clean-trained and
// infected-trained models.
DefenseReport evaluate_reenactment(const models::ModelHandle& m_clean,
                                   const models::ModelHandle& m_infected,
                                   const std::vector<dataio::FaceSample>& eval_set,
                                   SettingInfo setting, double dsr_threshold = 0.05);

struct TargetSpec {
    const models::ModelHandle* model = nullptr;
    std::string domain_tag;
};

// One report row per target model; poisons the eval images with pg at eps and
// flags the gray-box row (matching architecture and domain choice).
std::vector<DefenseReport> transfer_matrix(const models::ModelHandle& pg,
                                           const std::string& surrogate_arch,
                                           const std::string& surrogate_domain_tag,
                                           const std::vector<TargetSpec>& targets,
                                           const std::vector<dataio::FaceSample>& eval_set,
                                           double eps, double dsr_threshold = 0.05);

void write_report_csv(const DefenseReport& r, const std::string& path);
void write_report_json(const DefenseReport& r, const std::string& path);
DefenseReport read_report_summary_json(const std::string& path);

}  // namespace vg::evaluation
