#pragma once

#include <string>

#include "venomguard/dataio/image.hpp"

namespace vg::dataio {

// 8-bit PNG (RGB or grayscale). Quantization moves any value by at most
// 1/510; PNG round-trips are for human inspection, the raw container below is
// the exact-pipeline format.
void save_png(const ImageTensor& img, const std::string& path);
ImageTensor load_png(const std::string& path);

// Raw float32 container: "VGF1" magic + u32 LE height/width/channels header
// (16 bytes) + planar float32 LE payload. Round-trips bit-exactly.
void save_raw(const ImageTensor& img, const std::string& path);
ImageTensor load_raw(const std::string& path);

// Dispatch by extension: .png or .vgf
void save_image(const ImageTensor& img, const std::string& path);
ImageTensor load_image(const std::string& path);

}  // namespace vg::dataio
