#include "regcorr/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "regcorr/detail/binio.hpp"

namespace regcorr {

void FeatureGrid::validate() const {
    if (height < 1 || width < 1 || channels < 1)
        throw std::invalid_argument("feature grid: dimensions must be >= 1");
    if (cell_size_num == 0 || cell_size_den == 0)
        throw std::invalid_argument("feature grid: cell size must be positive");
    const std::size_t expected =
        static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
    if (data.size() != expected) throw std::invalid_argument("feature grid: data length mismatch");
    for (float v : data)
        if (!std::isfinite(v)) throw std::invalid_argument("feature grid: non-finite value");
}

PooledFeature roi_pool(const FeatureGrid& grid, const Box& box, int resolution) {
    if (resolution < 1) throw std::invalid_argument("roi_pool: resolution must be >= 1");
    if (!box.valid()) throw std::invalid_argument("roi_pool: degenerate box");

    const double cs = grid.cell_size();
    // Box extent in cell coordinates, clipped to the grid.
    const double cx0 = std::max(0.0, box.x_min / cs);
    const double cx1 = std::min(static_cast<double>(grid.width), box.x_max / cs);
    const double cy0 = std::max(0.0, box.y_min / cs);
    const double cy1 = std::min(static_cast<double>(grid.height), box.y_max / cs);
    if (!(cx0 < cx1) || !(cy0 < cy1))
        throw std::invalid_argument("roi_pool: box does not intersect the grid extent");

    const int P = resolution;
    const int C = grid.channels;
    PooledFeature out;
    out.resolution = P;
    out.channels = C;
    out.data.assign(static_cast<std::size_t>(P) * P * C, 0.0f);

    // Outward rounding: floor the start, ceil the end, and widen degenerate
    // windows so every sub-window covers at least one cell.
    auto window = [](double lo, double hi, int k, int P_, int max_cell) {
        const double a = lo + (hi - lo) * k / P_;
        const double b = lo + (hi - lo) * (k + 1) / P_;
        int s = static_cast<int>(std::floor(a));
        int e = static_cast<int>(std::ceil(b));
        if (e <= s) e = s + 1;
        s = std::clamp(s, 0, max_cell - 1);
        e = std::clamp(e, s + 1, max_cell);
        return std::pair<int, int>{s, e};
    };

    for (int py = 0; py < P; ++py) {
        const auto [ys, ye] = window(cy0, cy1, py, P, grid.height);
        for (int px = 0; px < P; ++px) {
            const auto [xs, xe] = window(cx0, cx1, px, P, grid.width);
            float* cell = &out.data[(static_cast<std::size_t>(py) * P + px) * C];
            for (int c = 0; c < C; ++c) cell[c] = grid.at(ys, xs, c);
            for (int y = ys; y < ye; ++y)
                for (int x = xs; x < xe; ++x) {
                    const float* src = &grid.data[(static_cast<std::size_t>(y) * grid.width + x) * C];
                    for (int c = 0; c < C; ++c) cell[c] = std::max(cell[c], src[c]);
                }
        }
    }
    return out;
}

std::vector<double> flatten(const PooledFeature& pooled) {
    return std::vector<double>(pooled.data.begin(), pooled.data.end());
}

namespace {
constexpr char kMagic[4] = {'F', 'G', 'R', 'D'};
constexpr std::uint8_t kVersion = 1;
// Caps H*W*C so the payload size cannot overflow or exhaust memory.
constexpr std::uint64_t kMaxCells = 1ull << 28;
}  // namespace

FeatureGrid load_feature_grid(const std::string& path) {
    detail::ByteReader r(detail::read_file_bytes(path));
    char magic[4];
    r.get_bytes(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("feature grid: bad magic in " + path, 0);
    const std::uint8_t version = r.get_u8("version");
    if (version != kVersion) throw FormatError("feature grid: unsupported version in " + path, 4);

    FeatureGrid g;
    const std::uint32_t h = r.get_u32("height");
    const std::uint32_t w = r.get_u32("width");
    const std::uint32_t c = r.get_u32("channels");
    g.cell_size_num = r.get_u32("cell size numerator");
    g.cell_size_den = r.get_u32("cell size denominator");
    if (h == 0 || w == 0 || c == 0) throw FormatError("feature grid: zero dimension in " + path, 5);
    const std::uint64_t cells = static_cast<std::uint64_t>(h) * w * c;
    if (cells > kMaxCells) throw FormatError("feature grid: dimension overflow in " + path, 5);
    if (g.cell_size_num == 0 || g.cell_size_den == 0)
        throw FormatError("feature grid: zero cell size in " + path, 17);

    g.height = static_cast<int>(h);
    g.width = static_cast<int>(w);
    g.channels = static_cast<int>(c);
    g.data.resize(static_cast<std::size_t>(cells));
    for (std::uint64_t i = 0; i < cells; ++i) {
        const std::uint64_t at = r.offset();
        const float v = r.get_f32("feature value");
        if (!std::isfinite(v)) throw FormatError("feature grid: non-finite value in " + path, at);
        g.data[i] = v;
    }
    if (r.remaining() != 0) throw FormatError("feature grid: trailing bytes in " + path, r.offset());
    return g;
}

void save_feature_grid(const std::string& path, const FeatureGrid& grid) {
    grid.validate();
    detail::ByteWriter w;
    w.put_bytes(kMagic, 4);
    w.put_u8(kVersion);
    w.put_u32(static_cast<std::uint32_t>(grid.height));
    w.put_u32(static_cast<std::uint32_t>(grid.width));
    w.put_u32(static_cast<std::uint32_t>(grid.channels));
    w.put_u32(grid.cell_size_num);
    w.put_u32(grid.cell_size_den);
    for (float v : grid.data) w.put_f32(v);
    detail::write_file_bytes(path, w.bytes());
}

}  // namespace regcorr
