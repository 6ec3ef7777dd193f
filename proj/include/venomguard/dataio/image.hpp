#pragma once

#include <vector>

#include "venomguard/common/errors.hpp"
#include "venomguard/nn/tensor.hpp"

namespace vg::dataio {

// Planar (CHW) float image with values in [0,1]. float storage keeps the raw
// container round-trip bit-exact; the training stack promotes to double at
// its boundary.
struct ImageTensor {
    int height = 0;
    int width = 0;
    int channels = 0;          // 1 (mask / landmark map) or 3 (RGB)
    std::vector<float> data;   // [c][y][x]

    ImageTensor() = default;
    ImageTensor(int h, int w, int c, float fill = 0.0f)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * w * c, fill) {
        if (h < 1 || w < 1 || (c != 1 && c != 3))
            throw ConfigError("ImageTensor: bad dimensions");
    }

    float& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    float at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }

    std::size_t size() const { return data.size(); }

    bool same_shape(const ImageTensor& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

// [C,H,W] double tensor from an image; batchify with to_batch.
nn::Tensor to_tensor(const ImageTensor& img);

// Stacks images of identical shape into [N,C,H,W].
nn::Tensor to_batch(const std::vector<ImageTensor>& imgs);

// Rounds to float storage; clips to [0,1]. src must be [C,H,W] or [1,C,H,W].
ImageTensor from_tensor(const nn::Tensor& t);

}  // namespace vg::dataio
