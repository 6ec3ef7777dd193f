#include "venomguard/training/domains.hpp"

#include "venomguard/models/models.hpp"

namespace vg::training {

using dataio::DomainLabel;

dataio::DomainLabel DomainTransform::apply(const DomainLabel& c) const {
    DomainLabel out = c;
    if (hair_swap) std::swap(out.bits[dataio::kBlondHair], out.bits[dataio::kBlackHair]);
    for (int b = dataio::kGlasses; b <= dataio::kPaleSkin; ++b)
        if (toggle_mask & (1u << b)) out.bits[b] = static_cast<std::uint8_t>(1 - out.bits[b]);
    return out;
}

namespace {

constexpr std::uint8_t bit(int attr) { return static_cast<std::uint8_t>(1u << attr); }

DomainSet make_sd() {
    return DomainSet{"SD",
                     {{"hair-flip", true, 0},
                      {"glasses", false, bit(dataio::kGlasses)},
                      {"smile", false, bit(dataio::kSmile)},
                      {"pale", false, bit(dataio::kPaleSkin)},
                      {"hair+glasses", true, bit(dataio::kGlasses)}}};
}

DomainSet make_dd() {
    return DomainSet{"DD",
                     {{"glasses", false, bit(dataio::kGlasses)},
                      {"smile+pale", false,
                       static_cast<std::uint8_t>(bit(dataio::kSmile) | bit(dataio::kPaleSkin))},
                      {"hair+smile", true, bit(dataio::kSmile)},
                      {"pale", false, bit(dataio::kPaleSkin)},
                      {"glasses+pale", false,
                       static_cast<std::uint8_t>(bit(dataio::kGlasses) | bit(dataio::kPaleSkin))}}};
}

}  // namespace

const DomainSet& domain_set(const std::string& tag) {
    static const DomainSet sd = make_sd();
    static const DomainSet dd = make_dd();
    if (tag == "SD") return sd;
    if (tag == "DD") return dd;
    throw ConfigError("domain_set: unknown tag " + tag);
}

nn::Tensor apply_transform(const DomainTransform& t, const std::vector<DomainLabel>& labels) {
    std::vector<DomainLabel> out;
    out.reserve(labels.size());
    for (const auto& c : labels) out.push_back(t.apply(c));
    return models::labels_tensor(out);
}

std::vector<nn::Tensor> sample_batch_domains(const DomainSet& set,
                                             const std::vector<DomainLabel>& labels, int count,
                                             Rng& rng) {
    if (count < 1) throw ConfigError("sample_batch_domains: count must be >= 1");
    std::vector<DomainTransform> chosen;
    chosen.push_back({"hair-flip", true, 0});
    if (count > 1) chosen.push_back({"glasses", false, bit(dataio::kGlasses)});
    while (static_cast<int>(chosen.size()) < count) {
        const auto& base =
            set.transforms[static_cast<std::size_t>(rng.uniform_int(0, set.transforms.size() - 1))];
        DomainTransform t = base;
        if (rng.bernoulli(0.25)) {  // occasional extra toggle widens coverage
            const int attr = static_cast<int>(rng.uniform_int(dataio::kGlasses, dataio::kPaleSkin));
            t.toggle_mask = static_cast<std::uint8_t>(t.toggle_mask ^ bit(attr));
            t.name += "*";
        }
        chosen.push_back(std::move(t));
    }
    std::vector<nn::Tensor> out;
    out.reserve(chosen.size());
    for (const auto& t : chosen) out.push_back(apply_transform(t, labels));
    return out;
}

std::vector<nn::Tensor> eval_domains(const DomainSet& set,
                                     const std::vector<DomainLabel>& labels) {
    std::vector<nn::Tensor> out;
    out.reserve(set.transforms.size());
    for (const auto& t : set.transforms) out.push_back(apply_transform(t, labels));
    return out;
}

}  // namespace vg::training
