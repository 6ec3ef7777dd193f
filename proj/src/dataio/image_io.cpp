#include "venomguard/dataio/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

namespace vg::dataio {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    throw IoError(std::string("png: ") + msg);
}

void png_warn_fn(png_structp, png_const_charp) {}

}  // namespace

void save_png(const ImageTensor& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3) throw IoError("save_png: 1 or 3 channels");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("save_png: cannot open " + path);

    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
    if (!png) throw IoError("save_png: init failed");
    png_infop info = png_create_info_struct(png);
    try {
        png_init_io(png, fp.get());
        png_set_IHDR(png, info, img.width, img.height, 8,
                     img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);

        std::vector<png_byte> row(static_cast<std::size_t>(img.width) * img.channels);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < img.channels; ++c) {
                    float v = img.at(c, y, x);
                    v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
                    row[static_cast<std::size_t>(x) * img.channels + c] =
                        static_cast<png_byte>(std::lround(v * 255.0f));
                }
            png_write_row(png, row.data());
        }
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
}

ImageTensor load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("load_png: cannot open " + path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
        throw IoError("load_png: not a PNG file: " + path);

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
    if (!png) throw IoError("load_png: init failed");
    png_infop info = png_create_info_struct(png);
    ImageTensor img;
    try {
        png_init_io(png, fp.get());
        png_set_sig_bytes(png, 8);
        png_read_info(png, info);

        png_set_expand(png);
        png_set_strip_16(png);
        png_set_strip_alpha(png);
        png_read_update_info(png, info);

        const int w = static_cast<int>(png_get_image_width(png, info));
        const int h = static_cast<int>(png_get_image_height(png, info));
        const int ch = static_cast<int>(png_get_channels(png, info));
        if (ch != 1 && ch != 3) throw IoError("load_png: unsupported channel count");

        img = ImageTensor(h, w, ch);
        std::vector<png_byte> row(static_cast<std::size_t>(w) * ch);
        for (int y = 0; y < h; ++y) {
            png_read_row(png, row.data(), nullptr);
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < ch; ++c)
                    img.at(c, y, x) =
                        static_cast<float>(row[static_cast<std::size_t>(x) * ch + c]) / 255.0f;
        }
        png_read_end(png, nullptr);
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

namespace {

constexpr char kMagic[4] = {'V', 'G', 'F', '1'};

void put_u32(std::FILE* f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    if (std::fwrite(b, 1, 4, f) != 4) throw IoError("raw: short write");
}

std::uint32_t get_u32(std::FILE* f) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) throw IoError("raw: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void save_raw(const ImageTensor& img, const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("save_raw: cannot open " + path);
    if (std::fwrite(kMagic, 1, 4, fp.get()) != 4) throw IoError("raw: short write");
    put_u32(fp.get(), static_cast<std::uint32_t>(img.height));
    put_u32(fp.get(), static_cast<std::uint32_t>(img.width));
    put_u32(fp.get(), static_cast<std::uint32_t>(img.channels));
    static_assert(sizeof(float) == 4);
    // float32 little-endian payload; x86-64 is little-endian, so plain dump
    if (std::fwrite(img.data.data(), sizeof(float), img.data.size(), fp.get()) !=
        img.data.size())
        throw IoError("raw: short write");
}

ImageTensor load_raw(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("load_raw: cannot open " + path);
    char magic[4];
    if (std::fread(magic, 1, 4, fp.get()) != 4 || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("load_raw: bad magic in " + path);
    const std::uint32_t h = get_u32(fp.get());
    const std::uint32_t w = get_u32(fp.get());
    const std::uint32_t c = get_u32(fp.get());
    if (h < 1 || w < 1 || (c != 1 && c != 3) || h > 1 << 20 || w > 1 << 20)
        throw IoError("load_raw: implausible header in " + path);
    ImageTensor img(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    if (std::fread(img.data.data(), sizeof(float), img.data.size(), fp.get()) != img.data.size())
        throw IoError("load_raw: truncated payload in " + path);
    return img;
}

namespace {

bool ends_with(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace

void save_image(const ImageTensor& img, const std::string& path) {
    if (ends_with(path, ".png"))
        save_png(img, path);
    else if (ends_with(path, ".vgf"))
        save_raw(img, path);
    else
        throw IoError("save_image: unknown extension: " + path);
}

ImageTensor load_image(const std::string& path) {
    if (ends_with(path, ".png")) return load_png(path);
    if (ends_with(path, ".vgf")) return load_raw(path);
    throw IoError("load_image: unknown extension: " + path);
}

}  // namespace vg::dataio
