#pragma once

#include <compare>
#include <span>
#include <string>
#include <vector>

namespace regcorr {

// Axis-aligned region with half-open continuous pixel coordinates;
// width = x_max - x_min.
struct Box {
    double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    double center_x() const { return 0.5 * (x_min + x_max); }
    double center_y() const { return 0.5 * (y_min + y_max); }

    bool valid() const;

    friend bool operator==(const Box&, const Box&) = default;
};

struct ImageSize {
    double width = 0, height = 0;

    bool valid() const;
    double diagonal() const;
};

// Geometric displacement of a match: center translation normalized by the
// image dimensions, plus base-2 log ratios of normalized box sizes.
struct Offset {
    double tx = 0, ty = 0, sx = 0, sy = 0;
};

struct OffsetBin {
    int itx = 0, ity = 0, isx = 0, isy = 0;

    friend bool operator==(const OffsetBin&, const OffsetBin&) = default;
    friend std::strong_ordering operator<=>(const OffsetBin&, const OffsetBin&) = default;
};

// Quantization lattice for offsets. A range of R with width w covers bins
// [-R/w, +R/w]; R must be an integer multiple of w.
struct BinGrid {
    double translation_width = 0.25;
    double log_scale_width = 1.0;
    double translation_range = 1.0;
    double log_scale_range = 2.0;

    void validate() const;
    int max_translation_index() const;
    int max_log_scale_index() const;
};

// Intersection over union. Throws std::invalid_argument on degenerate boxes.
double iou(const Box& a, const Box& b);

// Offset implied by matching source box r to target box s.
Offset offset_between(const Box& r, const Box& s, const ImageSize& size_a, const ImageSize& size_b);

// Nearest lattice point per coordinate (round half away from zero),
// clamped to the grid bounds. Total: every finite offset gets a bin.
OffsetBin assign_bin(const Offset& o, const BinGrid& grid);

// 1 iff both matches fall in the same offset bin.
inline int kernel_entry(const OffsetBin& a, const OffsetBin& b) { return a == b ? 1 : 0; }

// Proposals file: header `x_min,y_min,x_max,y_max`, one box per line.
std::vector<Box> load_boxes_csv(const std::string& path);
void save_boxes_csv(const std::string& path, std::span<const Box> boxes);

}  // namespace regcorr
