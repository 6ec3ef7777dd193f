#include "venomguard/dataio/image.hpp"

namespace vg::dataio {

nn::Tensor to_tensor(const ImageTensor& img) {
    nn::Tensor t = nn::Tensor::zeros({img.channels, img.height, img.width});
    double* d = t.data();
    for (std::size_t i = 0; i < img.data.size(); ++i) d[i] = static_cast<double>(img.data[i]);
    return t;
}

nn::Tensor to_batch(const std::vector<ImageTensor>& imgs) {
    if (imgs.empty()) throw ConfigError("to_batch: empty batch");
    const ImageTensor& first = imgs[0];
    nn::Tensor t = nn::Tensor::zeros(
        {static_cast<int>(imgs.size()), first.channels, first.height, first.width});
    double* d = t.data();
    for (const auto& img : imgs) {
        if (!img.same_shape(first)) throw ShapeError("to_batch: inconsistent shapes");
        for (std::size_t i = 0; i < img.data.size(); ++i) *d++ = static_cast<double>(img.data[i]);
    }
    return t;
}

ImageTensor from_tensor(const nn::Tensor& t) {
    std::vector<int> d = t.dims();
    if (d.size() == 4) {
        if (d[0] != 1) throw ShapeError("from_tensor: batch must be 1");
        d.erase(d.begin());
    }
    if (d.size() != 3) throw ShapeError("from_tensor: [C,H,W] required");
    ImageTensor img(d[1], d[2], d[0]);
    const double* src = t.data();
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        double v = src[i];
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        img.data[i] = static_cast<float>(v);
    }
    return img;
}

}  // namespace vg::dataio
