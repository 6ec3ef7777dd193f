#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "venomguard/dataio/synth.hpp"

namespace vg::dataio {

// Order-stable three-way split: defense training / target-model training /
// held-out evaluation.
struct DatasetSplits {
    std::vector<std::int64_t> defense_train;
    std::vector<std::int64_t> target_train;
    std::vector<std::int64_t> eval;
};

// Sizes by largest-remainder rounding over contiguous index ranges; the union
// is exactly [0, count).
DatasetSplits split_dataset(std::int64_t count, const std::array<double, 3>& fractions);

struct ManifestEntry {
    std::int64_t index = 0;
    std::vector<std::uint8_t> bits;
    std::vector<std::array<float, 2>> keypoints;
    std::string image;      // relative paths
    std::string landmarks;
    std::string mask;
};

struct DatasetManifest {
    std::string task;  // "attribute_editing" | "reenactment"
    SynthFaceSpec spec;
    std::int64_t count = 0;
    std::array<double, 3> fractions{0.5, 0.4, 0.1};
    DatasetSplits splits;
    std::vector<ManifestEntry> entries;
    std::string root;  // directory holding the manifest (set on load)
};

// Generates, persists every sample (raw container), and writes manifest.json.
// Returns the manifest. Deterministic: same inputs give byte-identical files.
DatasetManifest write_dataset(const std::string& dir, const std::string& task,
                              const SynthFaceSpec& spec, std::int64_t count,
                              const std::array<double, 3>& fractions, bool png_previews);

DatasetManifest load_manifest(const std::string& path);

FaceSample load_sample(const DatasetManifest& m, const ManifestEntry& e);

}  // namespace vg::dataio
