#include "venomguard/dataio/synth.hpp"

#include <algorithm>
#include <cmath>

#include "venomguard/common/rng.hpp"

namespace vg::dataio {

const char* const kAttrNames[kAttrCount] = {"blond-hair", "black-hair", "glasses", "smile",
                                            "pale-skin"};

const Palette& palette() {
    static const Palette p;
    return p;
}

namespace {

enum class Owner : std::uint8_t { Bg, Skin, Hair, Eye, Glasses, Mouth };

struct Geometry {
    double cx, cy, rx, ry;  // face ellipse, pixel units
    int eye_y, eye_dx;      // eye row / horizontal offset from center
    int mouth_y, mouth_hw;  // mouth base row / half width
    double mouth_amp;       // curvature amplitude, pixels
    float bg[3];
    double curv;            // mouth curvature in [-1, 1]
    double curv_mag;        // raw magnitude draw, kept so bits can be re-derived
    std::vector<std::uint8_t> bits;
};

double curv_from(bool smile, double mag) {
    return smile ? (0.60 + 0.35 * mag) : -(0.40 + 0.40 * mag);
}

double arc_y(const Geometry& g, double dx) {
    const double t = dx / g.mouth_hw;
    return g.mouth_y - g.curv * g.mouth_amp * (1.0 - t * t);
}

// Fixed draw order; every stream value is consumed regardless of which bits
// end up set, so forcing bits (region tests) never shifts the rest.
Geometry sample_geometry(const SynthFaceSpec& spec, std::uint64_t stream_seed) {
    Rng rng(stream_seed);
    const double r = spec.resolution;
    Geometry g;
    g.cx = r * (0.50 + 0.02 * rng.uniform(-1.0, 1.0));
    g.cy = r * (0.52 + 0.02 * rng.uniform(-1.0, 1.0));
    g.rx = r * (0.32 + 0.02 * rng.uniform(-1.0, 1.0));
    g.ry = r * (0.40 + 0.02 * rng.uniform(-1.0, 1.0));
    for (float& c : g.bg) c = static_cast<float>(0.70 + 0.05 * rng.uniform(-1.0, 1.0));
    const bool blond = rng.bernoulli(0.5);
    const bool glasses = rng.bernoulli(0.5);
    const bool smile = rng.bernoulli(0.5);
    const bool pale = rng.bernoulli(0.5);
    const double mag = rng.uniform();

    g.bits = {static_cast<std::uint8_t>(blond), static_cast<std::uint8_t>(!blond),
              static_cast<std::uint8_t>(glasses), static_cast<std::uint8_t>(smile),
              static_cast<std::uint8_t>(pale)};
    g.curv_mag = mag;
    g.curv = curv_from(smile, mag);

    g.eye_y = static_cast<int>(std::lround(g.cy - 0.25 * g.ry));
    g.eye_dx = std::max(2, static_cast<int>(std::lround(0.45 * g.rx)));
    g.mouth_y = static_cast<int>(std::lround(g.cy + 0.50 * g.ry));
    g.mouth_hw = std::max(2, static_cast<int>(std::lround(0.50 * g.rx)));
    g.mouth_amp = std::max(1.5, 0.18 * g.ry);
    return g;
}

bool in_ellipse(const Geometry& g, int x, int y) {
    const double dx = (x + 0.5 - g.cx) / g.rx;
    const double dy = (y + 0.5 - g.cy) / g.ry;
    return dx * dx + dy * dy <= 1.0;
}

bool in_hair(const Geometry& g, int x, int y) {
    return in_ellipse(g, x, y) && (y + 0.5) < g.cy - 0.45 * g.ry;
}

bool in_eye(const Geometry& g, int x, int y) {
    for (int sgn : {-1, 1}) {
        const int ex = static_cast<int>(std::lround(g.cx)) + sgn * g.eye_dx;
        if (y >= g.eye_y && y <= g.eye_y + 1 && x >= ex - 1 && x <= ex) return true;
    }
    return false;
}

// Lens box perimeters plus the bridge segment; geometric, independent of the
// glasses bit.
bool in_glasses_stencil(const Geometry& g, int x, int y) {
    const int cx = static_cast<int>(std::lround(g.cx));
    for (int sgn : {-1, 1}) {
        const int ex = cx + sgn * g.eye_dx;
        const int x0 = ex - 3, x1 = ex + 2;
        const int y0 = g.eye_y - 1, y1 = g.eye_y + 2;
        if (x >= x0 && x <= x1 && y >= y0 && y <= y1) {
            const bool border = (x == x0 || x == x1 || y == y0 || y == y1);
            if (border) return true;
        }
    }
    // bridge on the eye row
    if (y == g.eye_y && x > cx - g.eye_dx + 2 && x < cx + g.eye_dx - 3) return true;
    return false;
}

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

struct MouthBox {
    int y0, y1, x0, x1;
};

MouthBox mouth_box(const Geometry& g, int res) {
    const int pad = static_cast<int>(std::ceil(g.mouth_amp)) + 2;
    MouthBox b;
    b.y0 = clampi(g.mouth_y - pad, 0, res - 1);
    b.y1 = clampi(g.mouth_y + pad, 0, res - 1);
    b.x0 = clampi(static_cast<int>(std::lround(g.cx)) - g.mouth_hw - 1, 0, res - 1);
    b.x1 = clampi(static_cast<int>(std::lround(g.cx)) + g.mouth_hw + 1, 0, res - 1);
    return b;
}

void render(const SynthFaceSpec& spec, const Geometry& g, ImageTensor& img,
            std::vector<Owner>& owner) {
    const int res = spec.resolution;
    const Palette& pal = palette();
    img = ImageTensor(res, res, 3);
    owner.assign(static_cast<std::size_t>(res) * res, Owner::Bg);

    auto put = [&](int x, int y, const std::array<float, 3>& c, Owner o) {
        if (x < 0 || x >= res || y < 0 || y >= res) return;
        for (int ch = 0; ch < 3; ++ch) img.at(ch, y, x) = c[ch];
        owner[static_cast<std::size_t>(y) * res + x] = o;
    };

    const bool pale = g.bits[kPaleSkin] != 0;
    const auto& skin = pale ? pal.pale_skin : pal.skin;
    const auto& hair = g.bits[kBlondHair] ? pal.blond_hair : pal.black_hair;

    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) {
            for (int ch = 0; ch < 3; ++ch) img.at(ch, y, x) = g.bg[ch];
            if (in_hair(g, x, y))
                put(x, y, hair, Owner::Hair);
            else if (in_ellipse(g, x, y))
                put(x, y, skin, Owner::Skin);
        }

    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x)
            if (in_eye(g, x, y)) put(x, y, pal.eye, Owner::Eye);

    if (g.bits[kGlasses]) {
        for (int y = 0; y < res; ++y)
            for (int x = 0; x < res; ++x)
                if (in_glasses_stencil(g, x, y)) put(x, y, pal.glasses, Owner::Glasses);
    }

    // mouth arc, two pixels thick
    const int cx = static_cast<int>(std::lround(g.cx));
    for (int dx = -g.mouth_hw; dx <= g.mouth_hw; ++dx) {
        const int yy = static_cast<int>(std::lround(arc_y(g, dx)));
        put(cx + dx, yy, pal.lips, Owner::Mouth);
        put(cx + dx, yy + 1, pal.lips, Owner::Mouth);
    }
}

std::vector<std::array<float, 2>> keypoints_of(const Geometry& g) {
    std::vector<std::array<float, 2>> kp;
    const float cx = static_cast<float>(g.cx);
    kp.push_back({cx - g.eye_dx - 0.5f, g.eye_y + 0.5f});  // left eye
    kp.push_back({cx + g.eye_dx - 0.5f, g.eye_y + 0.5f});  // right eye
    kp.push_back({cx, static_cast<float>(g.cy + 0.10 * g.ry)});  // nose tip
    const int hw = g.mouth_hw;
    for (double dx : {-static_cast<double>(hw), -hw / 2.0, 0.0, hw / 2.0,
                      static_cast<double>(hw)})
        kp.push_back({static_cast<float>(g.cx + dx), static_cast<float>(arc_y(g, dx) + 0.5)});
    return kp;
}

ImageTensor mask_of(const SynthFaceSpec& spec, const Geometry& g) {
    const int res = spec.resolution;
    ImageTensor m(res, res, 1, 0.01f);
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x)
            if (in_ellipse(g, x, y)) m.at(0, y, x) = 1.0f;
    return m;
}

FaceSample assemble(const SynthFaceSpec& spec, const Geometry& g) {
    FaceSample s;
    std::vector<Owner> owner;
    render(spec, g, s.image, owner);
    s.label = DomainLabel(g.bits);
    s.keypoints = keypoints_of(g);
    s.landmark_map = render_landmarks(s.keypoints, spec.resolution, spec.stamp_radius);
    s.mask = mask_of(spec, g);
    return s;
}

constexpr std::uint64_t kSpeakerStream = 0x5eedfacef00dULL;
constexpr double kWalkVmax = 0.25;
constexpr double kWalkInertia = 0.7;

}  // namespace

ImageTensor render_landmarks(const std::vector<std::array<float, 2>>& kps, int resolution,
                             int stamp_radius) {
    ImageTensor lm(resolution, resolution, 1);
    for (const auto& kp : kps) {
        const int px = static_cast<int>(std::lround(kp[0]));
        const int py = static_cast<int>(std::lround(kp[1]));
        for (int dy = -stamp_radius; dy <= stamp_radius; ++dy)
            for (int dx = -stamp_radius; dx <= stamp_radius; ++dx) {
                const int x = px + dx, y = py + dy;
                if (x >= 0 && x < resolution && y >= 0 && y < resolution) lm.at(0, y, x) = 1.0f;
            }
    }
    return lm;
}

FaceSample generate_sample(const SynthFaceSpec& spec, std::int64_t index) {
    spec.validate();
    Geometry g = sample_geometry(spec, Rng::mix(spec.seed, static_cast<std::uint64_t>(index)));
    return assemble(spec, g);
}

FaceSample generate_sample_forced(const SynthFaceSpec& spec, std::int64_t index,
                                  const DomainLabel& bits) {
    spec.validate();
    if (bits.k() != kAttrCount) throw ConfigError("generate_sample_forced: bad label length");
    Geometry g = sample_geometry(spec, Rng::mix(spec.seed, static_cast<std::uint64_t>(index)));
    g.bits = bits.bits;
    g.curv = curv_from(g.bits[kSmile] != 0, g.curv_mag);
    return assemble(spec, g);
}

std::vector<FaceSample> generate_dataset(const SynthFaceSpec& spec, std::int64_t count) {
    spec.validate();
    if (count < 1) throw ConfigError("generate_dataset: count must be >= 1");
    std::vector<FaceSample> out;
    out.reserve(count);
    for (std::int64_t i = 0; i < count; ++i) out.push_back(generate_sample(spec, i));
    return out;
}

std::vector<FaceSample> generate_speaker_sequence(const SynthFaceSpec& spec,
                                                  std::int64_t frames) {
    spec.validate();
    if (frames < 2) throw ConfigError("generate_speaker_sequence: frames must be >= 2");
    Geometry identity =
        sample_geometry(spec, Rng::mix(spec.seed ^ kSpeakerStream, 0));
    Rng walk(Rng::mix(spec.seed ^ kSpeakerStream, 1));
    std::vector<FaceSample> out;
    out.reserve(frames);
    double m = identity.curv;
    double v = 0.0;
    for (std::int64_t t = 0; t < frames; ++t) {
        const double u = walk.uniform(-1.0, 1.0);
        v = std::clamp(kWalkInertia * v + (1.0 - kWalkInertia) * u * kWalkVmax, -kWalkVmax,
                       kWalkVmax);
        m = std::clamp(m + v, -1.0, 1.0);
        Geometry g = identity;
        g.curv = m;
        g.bits[kSmile] = m > 0.0 ? 1 : 0;
        out.push_back(assemble(spec, g));
    }
    return out;
}

double speaker_step_l1_bound(const SynthFaceSpec& spec) {
    // One step moves the mouth arc by at most amp*vmax (+1 for rounding); old
    // and new arc pixels are the only ones that can change.
    Geometry id = sample_geometry(spec, Rng::mix(spec.seed ^ kSpeakerStream, 0));
    const double rows_touched = 2.0 /*thickness*/ + std::ceil(id.mouth_amp * kWalkVmax) + 1.0;
    const double cols = 2.0 * id.mouth_hw + 1.0;
    const double changed = 2.0 * cols * rows_touched;  // old + new arc footprint
    const Palette& p = palette();
    double dmax = 0.0;
    for (int c = 0; c < 3; ++c) {
        dmax = std::max(dmax, static_cast<double>(std::fabs(p.lips[c] - p.skin[c])));
        dmax = std::max(dmax, static_cast<double>(std::fabs(p.lips[c] - p.pale_skin[c])));
    }
    const double total = static_cast<double>(spec.resolution) * spec.resolution * 3.0;
    return changed * dmax / total;
}

ImageTensor attribute_region(const SynthFaceSpec& spec, std::int64_t index, int attr) {
    spec.validate();
    if (attr < 0 || attr >= kAttrCount) throw ConfigError("attribute_region: bad attribute");
    Geometry g = sample_geometry(spec, Rng::mix(spec.seed, static_cast<std::uint64_t>(index)));
    const int res = spec.resolution;
    ImageTensor region(res, res, 1);

    ImageTensor img;
    std::vector<Owner> owner;
    render(spec, g, img, owner);

    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) {
            const Owner o = owner[static_cast<std::size_t>(y) * res + x];
            bool in = false;
            switch (attr) {
                case kBlondHair:
                case kBlackHair:
                    in = o == Owner::Hair;
                    break;
                case kGlasses:
                    in = in_glasses_stencil(g, x, y);
                    break;
                case kSmile: {
                    const MouthBox b = mouth_box(g, res);
                    in = y >= b.y0 && y <= b.y1 && x >= b.x0 && x <= b.x1;
                    break;
                }
                case kPaleSkin:
                    in = o == Owner::Skin;
                    break;
            }
            if (in) region.at(0, y, x) = 1.0f;
        }
    return region;
}

}  // namespace vg::dataio
