#include "venomguard/evaluation/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "venomguard/dataio/image_io.hpp"

namespace vg::evaluation {

using dataio::ImageTensor;

namespace {

// 3x5 digit/sign glyphs for tick labels
constexpr std::uint16_t kGlyphs[13] = {
    0b111101101101111,  // 0
    0b010110010010111,  // 1
    0b111001111100111,  // 2
    0b111001111001111,  // 3
    0b101101111001001,  // 4
    0b111100111001111,  // 5
    0b111100111101111,  // 6
    0b111001001001001,  // 7
    0b111101111101111,  // 8
    0b111101111001111,  // 9
    0b000000111000000,  // -
    0b000000000000010,  // .
    0b000000000000000,  // space
};

int glyph_index(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c == '-') return 10;
    if (c == '.') return 11;
    return 12;
}

void put_px(ImageTensor& img, int x, int y, float r, float g, float b) {
    if (x < 0 || x >= img.width || y < 0 || y >= img.height) return;
    img.at(0, y, x) = r;
    img.at(1, y, x) = g;
    img.at(2, y, x) = b;
}

void draw_text(ImageTensor& img, int x, int y, const std::string& text) {
    for (char c : text) {
        const std::uint16_t bits = kGlyphs[glyph_index(c)];
        for (int gy = 0; gy < 5; ++gy)
            for (int gx = 0; gx < 3; ++gx)
                if (bits & (1u << (14 - (gy * 3 + gx)))) put_px(img, x + gx, y + gy, 0.1f, 0.1f, 0.1f);
        x += 4;
    }
}

void draw_line(ImageTensor& img, int x0, int y0, int x1, int y1, float r, float g, float b) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        put_px(img, x0, y0, r, g, b);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

constexpr float kColors[6][3] = {{0.85f, 0.2f, 0.2f}, {0.2f, 0.35f, 0.85f}, {0.15f, 0.6f, 0.25f},
                                 {0.75f, 0.55f, 0.1f}, {0.55f, 0.2f, 0.7f}, {0.1f, 0.6f, 0.6f}};

}  // namespace

void line_plot_png(const std::string& path, const std::vector<Series>& series, int width,
                   int height) {
    if (series.empty()) throw ConfigError("line_plot_png: no series");
    ImageTensor img(height, width, 3, 1.0f);

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
            xmin = std::min(xmin, s.xs[i]);
            xmax = std::max(xmax, s.xs[i]);
            ymin = std::min(ymin, s.ys[i]);
            ymax = std::max(ymax, s.ys[i]);
        }
    if (!std::isfinite(xmin)) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;

    const int ml = 46, mr = 12, mt = 12, mb = 24;  // margins
    const int pw = width - ml - mr, ph = height - mt - mb;
    auto tx = [&](double v) { return ml + static_cast<int>(std::lround((v - xmin) / (xmax - xmin) * (pw - 1))); };
    auto ty = [&](double v) {
        return mt + ph - 1 - static_cast<int>(std::lround((v - ymin) / (ymax - ymin) * (ph - 1)));
    };

    // frame + gridlines
    for (int gx = 0; gx <= 4; ++gx) {
        const int x = ml + gx * (pw - 1) / 4;
        draw_line(img, x, mt, x, mt + ph - 1, 0.9f, 0.9f, 0.9f);
    }
    for (int gy = 0; gy <= 4; ++gy) {
        const int y = mt + gy * (ph - 1) / 4;
        draw_line(img, ml, y, ml + pw - 1, y, 0.9f, 0.9f, 0.9f);
    }
    draw_line(img, ml, mt, ml, mt + ph - 1, 0.2f, 0.2f, 0.2f);
    draw_line(img, ml, mt + ph - 1, ml + pw - 1, mt + ph - 1, 0.2f, 0.2f, 0.2f);

    draw_text(img, 2, ty(ymax) - 2, fmt_tick(ymax));
    draw_text(img, 2, ty(ymin) - 2, fmt_tick(ymin));
    draw_text(img, ml - 4, height - mb + 6, fmt_tick(xmin));
    draw_text(img, ml + pw - 24, height - mb + 6, fmt_tick(xmax));

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const auto& c = kColors[si % 6];
        for (std::size_t i = 0; i + 1 < s.xs.size(); ++i) {
            if (!std::isfinite(s.ys[i]) || !std::isfinite(s.ys[i + 1])) continue;
            draw_line(img, tx(s.xs[i]), ty(s.ys[i]), tx(s.xs[i + 1]), ty(s.ys[i + 1]), c[0], c[1],
                      c[2]);
        }
        // legend swatch
        const int ly = mt + 4 + static_cast<int>(si) * 8;
        draw_line(img, ml + 6, ly, ml + 22, ly, c[0], c[1], c[2]);
    }
    dataio::save_png(img, path);
}

ImageTensor image_grid(const std::vector<std::vector<ImageTensor>>& rows, int pad) {
    if (rows.empty() || rows[0].empty()) throw ConfigError("image_grid: empty input");
    const int th = rows[0][0].height, tw = rows[0][0].width;
    std::size_t cols = 0;
    for (const auto& r : rows) cols = std::max(cols, r.size());
    const int H = static_cast<int>(rows.size()) * (th + pad) + pad;
    const int W = static_cast<int>(cols) * (tw + pad) + pad;
    ImageTensor out(H, W, 3, 0.35f);
    for (std::size_t ri = 0; ri < rows.size(); ++ri)
        for (std::size_t ci = 0; ci < rows[ri].size(); ++ci) {
            const ImageTensor& t = rows[ri][ci];
            if (t.height != th || t.width != tw) throw ShapeError("image_grid: tile size mismatch");
            const int oy = pad + static_cast<int>(ri) * (th + pad);
            const int ox = pad + static_cast<int>(ci) * (tw + pad);
            for (int y = 0; y < th; ++y)
                for (int x = 0; x < tw; ++x)
                    for (int c = 0; c < 3; ++c)
                        out.at(c, oy + y, ox + x) = t.channels == 3 ? t.at(c, y, x) : t.at(0, y, x);
        }
    return out;
}

}  // namespace vg::evaluation
