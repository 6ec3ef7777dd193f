#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "venomguard/common/rng.hpp"
#include "venomguard/dataio/image.hpp"

namespace vg::evaluation {

enum class DistanceKind { L1, L2 };
enum class Task { AttributeEditing, Reenactment };

// Per-element mean absolute / squared difference over all pixels & channels.
double distance(const dataio::ImageTensor& a, const dataio::ImageTensor& b, DistanceKind kind);

// 10*log10(1/MSE) with peak 1; +inf when images are identical.
double psnr(const dataio::ImageTensor& a, const dataio::ImageTensor& b);

// Classic 8-neighbor 3x3 LBP on luma (0.299R + 0.587G + 0.114B), zero padding
// at borders, neighbors clockwise from top-left, ties set the bit; codes
// rescaled to [0,1] by /255.
dataio::ImageTensor lbp_map(const dataio::ImageTensor& img);

struct DsrResult {
    double dsr = 0.0;
    std::vector<char> success;
};

// Editing: success iff L2 > threshold (default 0.05). Reenactment: L1 > threshold.
DsrResult defense_success_rate(
    const std::vector<std::pair<dataio::ImageTensor, dataio::ImageTensor>>& pairs, Task task,
    double threshold = 0.05);

inline constexpr std::uint64_t kPerceptualSeed = 0xFACEFEED;

// Fixed-seed random 3-scale convolutional feature pyramid; squared L2 between
// per-pixel unit-normalized feature vectors, averaged over pixels and scales.
double perceptual_distance(const dataio::ImageTensor& a, const dataio::ImageTensor& b,
                           std::uint64_t seed = kPerceptualSeed);

// --- reference perturbations for comparisons ---

// x + eps*U(-1,1) clipped to [0,1]; same budget surface as the generator.
dataio::ImageTensor noise_perturb(const dataio::ImageTensor& x, double eps, Rng& rng);

}  // namespace vg::evaluation
