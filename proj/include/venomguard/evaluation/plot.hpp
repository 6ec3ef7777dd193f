#pragma once

#include <string>
#include <vector>

#include "venomguard/dataio/image.hpp"

namespace vg::evaluation {

struct Series {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
};

// Minimal raster plot: axes box, tick labels (digits only), one polyline per
// series. Enough for loss curves and epsilon sweeps.
void line_plot_png(const std::string& path, const std::vector<Series>& series, int width = 520,
                   int height = 340);

// Tiles same-sized images into a grid (rows x cols) with separators;
// 1-channel tiles are expanded to gray RGB.
dataio::ImageTensor image_grid(const std::vector<std::vector<dataio::ImageTensor>>& rows,
                               int pad = 2);

}  // namespace vg::evaluation
