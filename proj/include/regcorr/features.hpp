#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regcorr/geometry.hpp"

namespace regcorr {

// Dense per-cell feature field, row-major with channels innermost:
// value(y, x, c) = data[(y * width + x) * channels + c].
// cell_size (pixels per cell) is kept as an exact rational so files
// round-trip losslessly.
struct FeatureGrid {
    int height = 0, width = 0, channels = 0;
    std::uint32_t cell_size_num = 1, cell_size_den = 1;
    std::vector<float> data;

    double cell_size() const { return static_cast<double>(cell_size_num) / cell_size_den; }
    ImageSize image_size() const {
        return {width * cell_size(), height * cell_size()};
    }

    float at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    float& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    void validate() const;
};

// Fixed-size pooled region feature, same layout convention as FeatureGrid:
// value(py, px, c) = data[(py * resolution + px) * channels + c].
struct PooledFeature {
    int resolution = 0;
    int channels = 0;
    std::vector<float> data;
};

// Max-pools the box (pixel coordinates) over a resolution x resolution
// lattice of sub-windows. Sub-window boundaries are rounded outward so each
// covers at least one cell. Throws std::invalid_argument if the box does
// not intersect the grid extent.
PooledFeature roi_pool(const FeatureGrid& grid, const Box& box, int resolution);

// Row-major, channel-innermost vector of length P*P*C. Layout is stable:
// index(py, px, c) = (py * P + px) * C + c.
std::vector<double> flatten(const PooledFeature& pooled);

// Feature-grid binary format: magic "FGRD", version u8 = 1, then H, W, C,
// cell_size numerator, cell_size denominator as little-endian u32, then
// H*W*C little-endian 32-bit floats.
FeatureGrid load_feature_grid(const std::string& path);
void save_feature_grid(const std::string& path, const FeatureGrid& grid);

}  // namespace regcorr
