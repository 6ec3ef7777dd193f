#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "venomguard/dataio/image.hpp"

namespace vg::dataio {

// Binary attribute vector. Index order is fixed project-wide:
// 0 blond-hair, 1 black-hair, 2 glasses, 3 smile, 4 pale-skin.
struct DomainLabel {
    std::vector<std::uint8_t> bits;

    DomainLabel() = default;
    explicit DomainLabel(std::vector<std::uint8_t> b) : bits(std::move(b)) {}

    std::size_t k() const { return bits.size(); }

    DomainLabel inverse() const {
        DomainLabel r = *this;
        for (auto& b : r.bits) b = static_cast<std::uint8_t>(1 - b);
        return r;
    }

    bool operator==(const DomainLabel& o) const { return bits == o.bits; }
};

enum Attr : int { kBlondHair = 0, kBlackHair = 1, kGlasses = 2, kSmile = 3, kPaleSkin = 4 };
inline constexpr int kAttrCount = 5;
extern const char* const kAttrNames[kAttrCount];

// Flat-shaded palette; attribute-controlled colors are exact entries so tests
// can match pixels bit-for-bit (see docs/palette.md).
struct Palette {
    std::array<float, 3> blond_hair{0.93f, 0.82f, 0.45f};
    std::array<float, 3> black_hair{0.12f, 0.10f, 0.10f};
    std::array<float, 3> skin{0.86f, 0.67f, 0.52f};
    std::array<float, 3> pale_skin{0.95f, 0.88f, 0.82f};
    std::array<float, 3> eye{0.15f, 0.10f, 0.08f};
    std::array<float, 3> glasses{0.05f, 0.05f, 0.05f};
    std::array<float, 3> lips{0.55f, 0.16f, 0.16f};
};
const Palette& palette();

struct SynthFaceSpec {
    std::uint64_t seed = 0;
    int resolution = 32;
    int landmark_points = 8;
    int stamp_radius = 1;  // landmark stamps cover (2r+1)^2 pixels

    void validate() const {
        if (resolution < 8) throw ConfigError("SynthFaceSpec: resolution must be >= 8");
        if (landmark_points != 8) throw ConfigError("SynthFaceSpec: 8 landmark points supported");
    }
};

struct FaceSample {
    ImageTensor image;         // RGB
    DomainLabel label;         // K = 5
    ImageTensor landmark_map;  // 1 channel
    ImageTensor mask;          // 1 channel, face 1.0 / background 0.01
    std::vector<std::array<float, 2>> keypoints;  // (x, y) pixel coords
};

// Deterministic in (spec.seed, index): regenerating any index reproduces the
// sample bit-for-bit.
FaceSample generate_sample(const SynthFaceSpec& spec, std::int64_t index);
std::vector<FaceSample> generate_dataset(const SynthFaceSpec& spec, std::int64_t count);

// Same geometry as generate_sample(index) but with the attribute bits forced;
// this is how single-attribute toggles are produced for region tests.
FaceSample generate_sample_forced(const SynthFaceSpec& spec, std::int64_t index,
                                  const DomainLabel& bits);

// Single-identity sequence; only the mouth moves, on a smooth bounded walk.
std::vector<FaceSample> generate_speaker_sequence(const SynthFaceSpec& spec, std::int64_t frames);

// Upper bound on mean-per-element L1 distance between consecutive frames.
double speaker_step_l1_bound(const SynthFaceSpec& spec);

// 0/1 mask of pixels that may change when the given attribute bit of this
// sample is toggled (all other state equal).
ImageTensor attribute_region(const SynthFaceSpec& spec, std::int64_t index, int attr);

// Landmark rendering is a pure function of keypoints.
ImageTensor render_landmarks(const std::vector<std::array<float, 2>>& kps, int resolution,
                             int stamp_radius);

}  // namespace vg::dataio
