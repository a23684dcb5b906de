#include "regcorr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "regcorr/detail/csv.hpp"
#include "regcorr/error.hpp"

namespace regcorr {

bool Box::valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
           std::isfinite(y_max) && x_min < x_max && y_min < y_max;
}

bool ImageSize::valid() const {
    return std::isfinite(width) && std::isfinite(height) && width > 0 && height > 0;
}

double ImageSize::diagonal() const { return std::sqrt(width * width + height * height); }

void BinGrid::validate() const {
    if (!(translation_width > 0) || !(log_scale_width > 0))
        throw std::invalid_argument("bin grid: widths must be positive");
    if (!(translation_range >= 0) || !(log_scale_range >= 0))
        throw std::invalid_argument("bin grid: ranges must be non-negative");
    const double rt = translation_range / translation_width;
    const double rs = log_scale_range / log_scale_width;
    if (std::abs(rt - std::round(rt)) > 1e-9 || std::abs(rs - std::round(rs)) > 1e-9)
        throw std::invalid_argument("bin grid: range must be an integer multiple of the bin width");
}

int BinGrid::max_translation_index() const {
    return static_cast<int>(std::llround(translation_range / translation_width));
}

int BinGrid::max_log_scale_index() const {
    return static_cast<int>(std::llround(log_scale_range / log_scale_width));
}

double iou(const Box& a, const Box& b) {
    if (!a.valid() || !b.valid()) throw std::invalid_argument("iou: degenerate or non-finite box");
    const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

Offset offset_between(const Box& r, const Box& s, const ImageSize& size_a, const ImageSize& size_b) {
    if (!r.valid() || !s.valid()) throw std::invalid_argument("offset: degenerate or non-finite box");
    if (!size_a.valid() || !size_b.valid()) throw std::invalid_argument("offset: invalid image size");
    Offset o;
    o.tx = s.center_x() / size_b.width - r.center_x() / size_a.width;
    o.ty = s.center_y() / size_b.height - r.center_y() / size_a.height;
    o.sx = std::log2((s.width() / size_b.width) / (r.width() / size_a.width));
    o.sy = std::log2((s.height() / size_b.height) / (r.height() / size_a.height));
    return o;
}

namespace {

// Round half away from zero, then clamp to [-max_idx, max_idx].
int quantize(double value, double width, int max_idx) {
    const double idx = std::round(value / width);
    if (idx < -max_idx) return -max_idx;
    if (idx > max_idx) return max_idx;
    return static_cast<int>(idx);
}

}  // namespace

OffsetBin assign_bin(const Offset& o, const BinGrid& grid) {
    grid.validate();
    if (!std::isfinite(o.tx) || !std::isfinite(o.ty) || !std::isfinite(o.sx) || !std::isfinite(o.sy))
        throw std::invalid_argument("assign_bin: non-finite offset");
    OffsetBin b;
    b.itx = quantize(o.tx, grid.translation_width, grid.max_translation_index());
    b.ity = quantize(o.ty, grid.translation_width, grid.max_translation_index());
    b.isx = quantize(o.sx, grid.log_scale_width, grid.max_log_scale_index());
    b.isy = quantize(o.sy, grid.log_scale_width, grid.max_log_scale_index());
    return b;
}

std::vector<Box> load_boxes_csv(const std::string& path) {
    const auto lines = detail::read_text_lines(path);
    if (lines.empty() || lines[0] != "x_min,y_min,x_max,y_max")
        throw FormatError("proposals csv: missing header 'x_min,y_min,x_max,y_max' in " + path, 0);
    std::vector<Box> boxes;
    boxes.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = detail::split_csv_line(lines[i]);
        if (fields.size() != 4) throw FormatError("proposals csv: expected 4 fields in " + path, i);
        Box b;
        b.x_min = detail::parse_double_field(fields[0], path, i);
        b.y_min = detail::parse_double_field(fields[1], path, i);
        b.x_max = detail::parse_double_field(fields[2], path, i);
        b.y_max = detail::parse_double_field(fields[3], path, i);
        if (!b.valid()) throw FormatError("proposals csv: degenerate box in " + path, i);
        boxes.push_back(b);
    }
    return boxes;
}

void save_boxes_csv(const std::string& path, std::span<const Box> boxes) {
    std::string out = "x_min,y_min,x_max,y_max\n";
    for (const Box& b : boxes) {
        out += detail::format_double(b.x_min);
        out += ',';
        out += detail::format_double(b.y_min);
        out += ',';
        out += detail::format_double(b.x_max);
        out += ',';
        out += detail::format_double(b.y_max);
        out += '\n';
    }
    detail::write_text_file(path, out);
}

}  // namespace regcorr
