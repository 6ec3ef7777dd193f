#include "venomguard/evaluation/metrics.hpp"

#include <cmath>
#include <limits>

namespace vg::evaluation {

using dataio::ImageTensor;

double distance(const ImageTensor& a, const ImageTensor& b, DistanceKind kind) {
    if (!a.same_shape(b)) throw ShapeError("distance: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        acc += kind == DistanceKind::L1 ? std::fabs(d) : d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

double psnr(const ImageTensor& a, const ImageTensor& b) {
    const double mse = distance(a, b, DistanceKind::L2);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

// clockwise from top-left
constexpr int kNbr[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, 1},
                            {1, 1},   {1, 0},  {1, -1}, {0, -1}};

}  // namespace

ImageTensor lbp_map(const ImageTensor& img) {
    const int h = img.height, w = img.width;
    std::vector<double> luma(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v;
            if (img.channels == 3)
                v = 0.299 * img.at(0, y, x) + 0.587 * img.at(1, y, x) + 0.114 * img.at(2, y, x);
            else
                v = img.at(0, y, x);
            luma[static_cast<std::size_t>(y) * w + x] = v;
        }

    ImageTensor out(h, w, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double c = luma[static_cast<std::size_t>(y) * w + x];
            int code = 0;
            for (int i = 0; i < 8; ++i) {
                const int ny = y + kNbr[i][0], nx = x + kNbr[i][1];
                const double nv = (ny >= 0 && ny < h && nx >= 0 && nx < w)
                                      ? luma[static_cast<std::size_t>(ny) * w + nx]
                                      : 0.0;
                if (nv >= c) code |= 1 << i;
            }
            out.at(0, y, x) = static_cast<float>(code) / 255.0f;
        }
    return out;
}

DsrResult defense_success_rate(
    const std::vector<std::pair<ImageTensor, ImageTensor>>& pairs, Task task, double threshold) {
    if (pairs.empty()) throw ConfigError("defense_success_rate: empty input");
    DsrResult r;
    r.success.reserve(pairs.size());
    std::size_t hits = 0;
    const DistanceKind kind =
        task == Task::AttributeEditing ? DistanceKind::L2 : DistanceKind::L1;
    for (const auto& [y, yp] : pairs) {
        const bool ok = distance(y, yp, kind) > threshold;
        r.success.push_back(ok ? 1 : 0);
        if (ok) ++hits;
    }
    r.dsr = static_cast<double>(hits) / static_cast<double>(pairs.size());
    return r;
}

namespace {

constexpr int kPercFeatures = 8;
constexpr int kPercScales = 3;

struct PercFilters {
    // [feature][in_channel][3][3] for 1- and 3-channel inputs
    std::vector<double> w3, w1;
};

const PercFilters& perc_filters(std::uint64_t seed) {
    static PercFilters cached;
    static std::uint64_t cached_seed = ~0ULL;
    if (cached_seed != seed) {
        Rng rng(Rng::mix(seed, 0x7065726321ULL));
        cached.w3.resize(kPercFeatures * 3 * 9);
        for (auto& v : cached.w3) v = rng.normal() / std::sqrt(27.0);
        cached.w1.resize(kPercFeatures * 9);
        for (auto& v : cached.w1) v = rng.normal() / std::sqrt(9.0);
        cached_seed = seed;
    }
    return cached;
}

std::vector<double> conv_features(const std::vector<double>& img, int h, int w, int ch,
                                  const PercFilters& f) {
    const double* wt = ch == 3 ? f.w3.data() : f.w1.data();
    std::vector<double> out(static_cast<std::size_t>(kPercFeatures) * h * w, 0.0);
    for (int fo = 0; fo < kPercFeatures; ++fo)
        for (int c = 0; c < ch; ++c)
            for (int ky = 0; ky < 3; ++ky)
                for (int kx = 0; kx < 3; ++kx) {
                    const double wv = wt[((fo * ch + c) * 3 + ky) * 3 + kx];
                    for (int y = 0; y < h; ++y) {
                        const int iy = y + ky - 1;
                        if (iy < 0 || iy >= h) continue;
                        for (int x = 0; x < w; ++x) {
                            const int ix = x + kx - 1;
                            if (ix < 0 || ix >= w) continue;
                            out[(static_cast<std::size_t>(fo) * h + y) * w + x] +=
                                wv * img[(static_cast<std::size_t>(c) * h + iy) * w + ix];
                        }
                    }
                }
    return out;
}

std::vector<double> downsample_avg(const std::vector<double>& img, int h, int w, int ch) {
    const int oh = h / 2, ow = w / 2;
    std::vector<double> out(static_cast<std::size_t>(ch) * oh * ow);
    for (int c = 0; c < ch; ++c)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double s = 0.0;
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx)
                        s += img[(static_cast<std::size_t>(c) * h + 2 * y + dy) * w + 2 * x + dx];
                out[(static_cast<std::size_t>(c) * oh + y) * ow + x] = 0.25 * s;
            }
    return out;
}

double scale_distance(const std::vector<double>& fa, const std::vector<double>& fb, int h,
                      int w) {
    double acc = 0.0;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (std::size_t px = 0; px < plane; ++px) {
        double na = 1e-10, nb = 1e-10;
        for (int f = 0; f < kPercFeatures; ++f) {
            na += fa[f * plane + px] * fa[f * plane + px];
            nb += fb[f * plane + px] * fb[f * plane + px];
        }
        na = std::sqrt(na);
        nb = std::sqrt(nb);
        for (int f = 0; f < kPercFeatures; ++f) {
            const double d = fa[f * plane + px] / na - fb[f * plane + px] / nb;
            acc += d * d;
        }
    }
    return acc / (static_cast<double>(plane) * kPercFeatures);
}

}  // namespace

double perceptual_distance(const ImageTensor& a, const ImageTensor& b, std::uint64_t seed) {
    if (!a.same_shape(b)) throw ShapeError("perceptual_distance: shape mismatch");
    const PercFilters& filt = perc_filters(seed);

    std::vector<double> ia(a.data.begin(), a.data.end());
    std::vector<double> ib(b.data.begin(), b.data.end());
    int h = a.height, w = a.width;
    const int ch = a.channels;

    double total = 0.0;
    int scales = 0;
    for (int s = 0; s < kPercScales; ++s) {
        const auto fa = conv_features(ia, h, w, ch, filt);
        const auto fb = conv_features(ib, h, w, ch, filt);
        total += scale_distance(fa, fb, h, w);
        ++scales;
        if (h < 4 || w < 4 || s + 1 == kPercScales) break;
        ia = downsample_avg(ia, h, w, ch);
        ib = downsample_avg(ib, h, w, ch);
        h /= 2;
        w /= 2;
    }
    return total / static_cast<double>(scales);
}

ImageTensor noise_perturb(const ImageTensor& x, double eps, Rng& rng) {
    ImageTensor out = x;
    for (auto& v : out.data) {
        double nv = static_cast<double>(v) + eps * rng.uniform(-1.0, 1.0);
        nv = nv < 0.0 ? 0.0 : (nv > 1.0 ? 1.0 : nv);
        v = static_cast<float>(nv);
    }
    // keep the float-domain budget exact, mirroring the generator path
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const float xf = x.data[i];
        float& pf = out.data[i];
        while (std::fabs(static_cast<double>(pf) - xf) > eps) pf = std::nextafterf(pf, xf);
    }
    return out;
}

}  // namespace vg::evaluation
