#include "venomguard/dataio/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "venomguard/dataio/image_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vg::dataio {

DatasetSplits split_dataset(std::int64_t count, const std::array<double, 3>& fractions) {
    double sum = 0.0;
    for (double f : fractions) {
        if (f < 0.0) throw ConfigError("split_dataset: negative fraction");
        sum += f;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError("split_dataset: fractions must sum to 1");
    if (count < 1) throw ConfigError("split_dataset: empty dataset");

    std::array<std::int64_t, 3> sizes{};
    std::array<double, 3> rema{};
    std::int64_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double exact = fractions[i] * static_cast<double>(count);
        sizes[i] = static_cast<std::int64_t>(std::floor(exact + 1e-9));
        rema[i] = exact - static_cast<double>(sizes[i]);
        assigned += sizes[i];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rema[a] > rema[b]; });
    for (int i = 0; assigned < count; ++i, ++assigned) sizes[order[i % 3]] += 1;

    for (int i = 0; i < 3; ++i)
        if (fractions[i] > 0.0 && sizes[i] == 0)
            throw ConfigError("split_dataset: empty partition for nonzero fraction");

    DatasetSplits s;
    std::int64_t at = 0;
    auto take = [&](std::vector<std::int64_t>& dst, std::int64_t n) {
        dst.resize(n);
        std::iota(dst.begin(), dst.end(), at);
        at += n;
    };
    take(s.defense_train, sizes[0]);
    take(s.target_train, sizes[1]);
    take(s.eval, sizes[2]);
    return s;
}

namespace {

json splits_to_json(const DatasetSplits& s) {
    return json{{"defense_train", s.defense_train},
                {"target_train", s.target_train},
                {"eval", s.eval}};
}

DatasetSplits splits_from_json(const json& j) {
    DatasetSplits s;
    s.defense_train = j.at("defense_train").get<std::vector<std::int64_t>>();
    s.target_train = j.at("target_train").get<std::vector<std::int64_t>>();
    s.eval = j.at("eval").get<std::vector<std::int64_t>>();
    return s;
}

}  // namespace

DatasetManifest write_dataset(const std::string& dir, const std::string& task,
                              const SynthFaceSpec& spec, std::int64_t count,
                              const std::array<double, 3>& fractions, bool png_previews) {
    spec.validate();
    if (task != "attribute_editing" && task != "reenactment")
        throw ConfigError("write_dataset: unknown task " + task);

    DatasetManifest m;
    m.task = task;
    m.spec = spec;
    m.count = count;
    m.fractions = fractions;
    m.splits = split_dataset(count, fractions);
    m.root = dir;

    fs::create_directories(fs::path(dir) / "data");

    std::vector<FaceSample> samples = task == "attribute_editing"
                                          ? generate_dataset(spec, count)
                                          : generate_speaker_sequence(spec, count);

    json jentries = json::array();
    for (std::int64_t i = 0; i < count; ++i) {
        const FaceSample& s = samples[static_cast<std::size_t>(i)];
        ManifestEntry e;
        e.index = i;
        e.bits = s.label.bits;
        e.keypoints = s.keypoints;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(i));
        e.image = std::string("data/img_") + buf + ".vgf";
        e.landmarks = std::string("data/lmk_") + buf + ".vgf";
        e.mask = std::string("data/msk_") + buf + ".vgf";
        save_raw(s.image, (fs::path(dir) / e.image).string());
        save_raw(s.landmark_map, (fs::path(dir) / e.landmarks).string());
        save_raw(s.mask, (fs::path(dir) / e.mask).string());
        if (png_previews && i < 16)
            save_png(s.image, (fs::path(dir) / ("data/img_" + std::string(buf) + ".png")).string());

        json kp = json::array();
        for (const auto& p : e.keypoints) kp.push_back({p[0], p[1]});
        jentries.push_back({{"index", e.index},
                            {"bits", e.bits},
                            {"keypoints", kp},
                            {"image", e.image},
                            {"landmarks", e.landmarks},
                            {"mask", e.mask}});
        m.entries.push_back(std::move(e));
    }

    json j{{"task", m.task},
           {"spec",
            {{"seed", spec.seed},
             {"resolution", spec.resolution},
             {"landmark_points", spec.landmark_points},
             {"stamp_radius", spec.stamp_radius}}},
           {"count", m.count},
           {"fractions", m.fractions},
           {"splits", splits_to_json(m.splits)},
           {"entries", jentries}};

    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw IoError("write_dataset: cannot write manifest in " + dir);
    out << j.dump(2) << "\n";
    return m;
}

DatasetManifest load_manifest(const std::string& path) {
    fs::path p(path);
    if (fs::is_directory(p)) p /= "manifest.json";
    std::ifstream in(p);
    if (!in) throw IoError("load_manifest: cannot open " + p.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(std::string("load_manifest: parse error: ") + e.what());
    }

    DatasetManifest m;
    m.task = j.at("task").get<std::string>();
    m.spec.seed = j.at("spec").at("seed").get<std::uint64_t>();
    m.spec.resolution = j.at("spec").at("resolution").get<int>();
    m.spec.landmark_points = j.at("spec").at("landmark_points").get<int>();
    m.spec.stamp_radius = j.at("spec").at("stamp_radius").get<int>();
    m.count = j.at("count").get<std::int64_t>();
    m.fractions = j.at("fractions").get<std::array<double, 3>>();
    m.splits = splits_from_json(j.at("splits"));
    for (const auto& je : j.at("entries")) {
        ManifestEntry e;
        e.index = je.at("index").get<std::int64_t>();
        e.bits = je.at("bits").get<std::vector<std::uint8_t>>();
        for (const auto& kp : je.at("keypoints"))
            e.keypoints.push_back({kp.at(0).get<float>(), kp.at(1).get<float>()});
        e.image = je.at("image").get<std::string>();
        e.landmarks = je.at("landmarks").get<std::string>();
        e.mask = je.at("mask").get<std::string>();
        m.entries.push_back(std::move(e));
    }
    m.root = p.parent_path().string();
    return m;
}

FaceSample load_sample(const DatasetManifest& m, const ManifestEntry& e) {
    FaceSample s;
    s.image = load_raw((fs::path(m.root) / e.image).string());
    s.landmark_map = load_raw((fs::path(m.root) / e.landmarks).string());
    s.mask = load_raw((fs::path(m.root) / e.mask).string());
    s.label = DomainLabel(e.bits);
    s.keypoints = e.keypoints;
    return s;
}

}  // namespace vg::dataio
