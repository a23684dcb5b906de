#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "regcorr/geometry.hpp"

namespace regcorr {

// Dense per-pixel displacement over the source image. Pixels are addressed
// by their integer coordinates; flow(p) maps p to p + (dx, dy) in the
// target image.
struct FlowField {
    int width = 0, height = 0;
    std::vector<float> dx, dy;
    std::vector<std::uint8_t> assigned;

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    }
};

struct ScoredBoxMatch {
    Box src, tgt;
    double score = 0;
    int src_index = 0;
    int tgt_index = 0;
};

// Greedy densification: matches are consumed in score-descending order
// (ties to the lower source index); pixels inside a match's source box that
// are still unassigned receive the axis-aligned affine map src -> tgt.
// Pixels left uncovered copy the flow of the nearest assigned pixel
// (Euclidean distance, ties by row-major order). Throws on an empty list.
FlowField densify(std::span<const ScoredBoxMatch> matches, const ImageSize& size_a, const ImageSize& size_b);

// phi(p) = p + flow(round(p)), nearest-pixel lookup. p must lie inside the
// source image.
std::array<double, 2> warp_keypoint(const FlowField& flow, double px, double py);

// Flow file: magic "FLOW", width and height little-endian u32, then
// per-pixel (dx, dy) little-endian 32-bit floats, row-major.
void save_flow(const std::string& path, const FlowField& flow);
FlowField load_flow(const std::string& path);

}  // namespace regcorr
