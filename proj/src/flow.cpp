#include "regcorr/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "regcorr/detail/binio.hpp"

namespace regcorr {

FlowField densify(std::span<const ScoredBoxMatch> matches, const ImageSize& size_a, const ImageSize& size_b) {
    if (matches.empty()) throw std::invalid_argument("densify: empty match list");
    if (!size_a.valid() || !size_b.valid()) throw std::invalid_argument("densify: invalid image size");
    (void)size_b;  // target extent is implied by the matched boxes

    FlowField flow;
    flow.width = static_cast<int>(std::llround(size_a.width));
    flow.height = static_cast<int>(std::llround(size_a.height));
    const std::size_t n_px = static_cast<std::size_t>(flow.width) * static_cast<std::size_t>(flow.height);
    flow.dx.assign(n_px, 0.0f);
    flow.dy.assign(n_px, 0.0f);
    flow.assigned.assign(n_px, 0);

    std::vector<std::size_t> order(matches.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (matches[a].score != matches[b].score) return matches[a].score > matches[b].score;
        if (matches[a].src_index != matches[b].src_index) return matches[a].src_index < matches[b].src_index;
        return matches[a].tgt_index < matches[b].tgt_index;
    });

    std::size_t remaining = n_px;
    for (std::size_t oi : order) {
        if (remaining == 0) break;
        const ScoredBoxMatch& m = matches[oi];
        if (!m.src.valid() || !m.tgt.valid()) throw std::invalid_argument("densify: degenerate box");
        if (!std::isfinite(m.score)) throw std::invalid_argument("densify: non-finite score");

        const double scale_x = m.tgt.width() / m.src.width();
        const double scale_y = m.tgt.height() / m.src.height();
        const int x_lo = std::max(0, static_cast<int>(std::ceil(m.src.x_min)));
        const int y_lo = std::max(0, static_cast<int>(std::ceil(m.src.y_min)));
        // Half-open: a pixel belongs to the box when min <= coordinate < max.
        const int x_hi = std::min(flow.width - 1, static_cast<int>(std::ceil(m.src.x_max)) - 1);
        const int y_hi = std::min(flow.height - 1, static_cast<int>(std::ceil(m.src.y_max)) - 1);

        for (int y = y_lo; y <= y_hi; ++y)
            for (int x = x_lo; x <= x_hi; ++x) {
                const std::size_t i = flow.index(x, y);
                if (flow.assigned[i]) continue;
                const double mapped_x = m.tgt.x_min + (x - m.src.x_min) * scale_x;
                const double mapped_y = m.tgt.y_min + (y - m.src.y_min) * scale_y;
                flow.dx[i] = static_cast<float>(mapped_x - x);
                flow.dy[i] = static_cast<float>(mapped_y - y);
                flow.assigned[i] = 1;
                --remaining;
            }
    }

    if (remaining == 0) return flow;
    if (remaining == n_px) throw std::invalid_argument("densify: no match covers any pixel");

    // Fill uncovered pixels from the nearest assigned one. Expanding
    // Chebyshev rings, stopping once no closer Euclidean hit is possible;
    // ties resolve to the smallest row-major index.
    std::vector<std::uint8_t> region_assigned = flow.assigned;
    for (int y = 0; y < flow.height; ++y)
        for (int x = 0; x < flow.width; ++x) {
            const std::size_t i = flow.index(x, y);
            if (region_assigned[i]) continue;
            long long best_d2 = -1;
            std::size_t best_idx = 0;
            const int max_r = std::max(std::max(x, flow.width - 1 - x), std::max(y, flow.height - 1 - y));
            for (int r = 1; r <= max_r; ++r) {
                if (best_d2 >= 0 && static_cast<long long>(r) * r > best_d2) break;
                auto consider = [&](int qx, int qy) {
                    if (qx < 0 || qx >= flow.width || qy < 0 || qy >= flow.height) return;
                    const std::size_t qi = flow.index(qx, qy);
                    if (!region_assigned[qi]) return;
                    const long long ddx = qx - x, ddy = qy - y;
                    const long long d2 = ddx * ddx + ddy * ddy;
                    if (best_d2 < 0 || d2 < best_d2 || (d2 == best_d2 && qi < best_idx)) {
                        best_d2 = d2;
                        best_idx = qi;
                    }
                };
                for (int qx = x - r; qx <= x + r; ++qx) {
                    consider(qx, y - r);
                    consider(qx, y + r);
                }
                for (int qy = y - r + 1; qy <= y + r - 1; ++qy) {
                    consider(x - r, qy);
                    consider(x + r, qy);
                }
            }
            flow.dx[i] = flow.dx[best_idx];
            flow.dy[i] = flow.dy[best_idx];
            flow.assigned[i] = 1;
        }
    return flow;
}

std::array<double, 2> warp_keypoint(const FlowField& flow, double px, double py) {
    if (!(px >= 0 && px < flow.width && py >= 0 && py < flow.height))
        throw std::invalid_argument("warp_keypoint: point outside the source image");
    const int x = std::clamp(static_cast<int>(std::llround(px)), 0, flow.width - 1);
    const int y = std::clamp(static_cast<int>(std::llround(py)), 0, flow.height - 1);
    const std::size_t i = flow.index(x, y);
    return {px + flow.dx[i], py + flow.dy[i]};
}

namespace {
constexpr char kMagic[4] = {'F', 'L', 'O', 'W'};
constexpr std::uint64_t kMaxPixels = 1ull << 28;
}  // namespace

void save_flow(const std::string& path, const FlowField& flow) {
    if (flow.width < 1 || flow.height < 1) throw std::invalid_argument("save_flow: empty field");
    detail::ByteWriter w;
    w.put_bytes(kMagic, 4);
    w.put_u32(static_cast<std::uint32_t>(flow.width));
    w.put_u32(static_cast<std::uint32_t>(flow.height));
    const std::size_t n = static_cast<std::size_t>(flow.width) * static_cast<std::size_t>(flow.height);
    for (std::size_t i = 0; i < n; ++i) {
        w.put_f32(flow.dx[i]);
        w.put_f32(flow.dy[i]);
    }
    detail::write_file_bytes(path, w.bytes());
}

FlowField load_flow(const std::string& path) {
    detail::ByteReader r(detail::read_file_bytes(path));
    char magic[4];
    r.get_bytes(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("flow: bad magic in " + path, 0);
    const std::uint32_t w = r.get_u32("width");
    const std::uint32_t h = r.get_u32("height");
    if (w == 0 || h == 0) throw FormatError("flow: zero dimension in " + path, 4);
    const std::uint64_t n = static_cast<std::uint64_t>(w) * h;
    if (n > kMaxPixels) throw FormatError("flow: dimension overflow in " + path, 4);

    FlowField f;
    f.width = static_cast<int>(w);
    f.height = static_cast<int>(h);
    f.dx.resize(static_cast<std::size_t>(n));
    f.dy.resize(static_cast<std::size_t>(n));
    f.assigned.assign(static_cast<std::size_t>(n), 1);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t at = r.offset();
        const float vx = r.get_f32("dx");
        const float vy = r.get_f32("dy");
        if (!std::isfinite(vx) || !std::isfinite(vy)) throw FormatError("flow: non-finite value in " + path, at);
        f.dx[static_cast<std::size_t>(i)] = vx;
        f.dy[static_cast<std::size_t>(i)] = vy;
    }
    if (r.remaining() != 0) throw FormatError("flow: trailing bytes in " + path, r.offset());
    return f;
}

}  // namespace regcorr
