#include "regcorr/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "regcorr/detail/csv.hpp"
#include "regcorr/error.hpp"

namespace regcorr {

namespace fs = std::filesystem;

namespace {
constexpr int kBoxRetryCap = 100;
constexpr int kRandomBoxRetryCap = 1000;
constexpr double kPi = 3.14159265358979323846;
}  // namespace

AffineTransform AffineTransform::inverse() const {
    const double det = m00 * m11 - m01 * m10;
    if (std::abs(det) < 1e-12) throw std::invalid_argument("affine transform is singular");
    AffineTransform inv;
    inv.m00 = m11 / det;
    inv.m01 = -m01 / det;
    inv.m10 = -m10 / det;
    inv.m11 = m00 / det;
    inv.t0 = -(inv.m00 * t0 + inv.m01 * t1);
    inv.t1 = -(inv.m10 * t0 + inv.m11 * t1);
    return inv;
}

Box warp_box_hull(const Box& box, const AffineTransform& a) {
    const std::array<std::array<double, 2>, 4> corners = {{{box.x_min, box.y_min},
                                                           {box.x_max, box.y_min},
                                                           {box.x_min, box.y_max},
                                                           {box.x_max, box.y_max}}};
    Box hull{1e300, 1e300, -1e300, -1e300};
    for (const auto& c : corners) {
        const auto p = a.apply(c[0], c[1]);
        hull.x_min = std::min(hull.x_min, p[0]);
        hull.y_min = std::min(hull.y_min, p[1]);
        hull.x_max = std::max(hull.x_max, p[0]);
        hull.y_max = std::max(hull.y_max, p[1]);
    }
    return hull;
}

void SynthConfig::validate() const {
    if (grid_h < 1 || grid_w < 1 || channels < 1)
        throw std::invalid_argument("synth config: grid dimensions must be >= 1");
    if (cell_size_num == 0 || cell_size_den == 0)
        throw std::invalid_argument("synth config: cell size must be positive");
    if (!(rotation_max_deg >= 0) || !(translation_frac >= 0))
        throw std::invalid_argument("synth config: warp ranges must be non-negative");
    if (!(scale_min > 0) || !(scale_max >= scale_min))
        throw std::invalid_argument("synth config: scale range must satisfy 0 < min <= max");
    if (n_gt < 0 || n_jitter < 0 || n_keypoints < 0 || smooth_radius < 0)
        throw std::invalid_argument("synth config: counts must be non-negative");
    if (n_keypoints > 0 && n_gt == 0)
        throw std::invalid_argument("synth config: keypoints require ground-truth boxes");
    const double cell = static_cast<double>(cell_size_num) / cell_size_den;
    const double img_min = std::min(grid_w, grid_h) * cell;
    if (!(box_min >= 1) || !(box_max >= box_min) || !(box_max <= img_min))
        throw std::invalid_argument("synth config: box size range must satisfy 1 <= min <= max <= image");
    if (!(feature_noise >= 0)) throw std::invalid_argument("synth config: feature noise must be non-negative");
    if (n_proposals < n_gt) throw std::invalid_argument("synth config: n_proposals must cover the GT boxes");
    if (n_proposals < n_gt * (1 + n_jitter))
        throw std::invalid_argument("synth config: n_proposals must cover GT targets and jitters");
}

AffineTransform sample_transform(const SynthConfig& cfg, Rng& rng) {
    const double cell = static_cast<double>(cfg.cell_size_num) / cfg.cell_size_den;
    const double w_px = cfg.grid_w * cell;
    const double h_px = cfg.grid_h * cell;
    const double theta = rng.uniform(-cfg.rotation_max_deg, cfg.rotation_max_deg) * kPi / 180.0;
    const double scale = rng.uniform(cfg.scale_min, cfg.scale_max);
    const double tx = rng.uniform(-cfg.translation_frac, cfg.translation_frac) * w_px;
    const double ty = rng.uniform(-cfg.translation_frac, cfg.translation_frac) * h_px;

    AffineTransform a;
    a.m00 = scale * std::cos(theta);
    a.m01 = -scale * std::sin(theta);
    a.m10 = scale * std::sin(theta);
    a.m11 = scale * std::cos(theta);
    // Rotate and scale about the image center, then translate.
    const double cx = w_px / 2, cy = h_px / 2;
    a.t0 = cx - (a.m00 * cx + a.m01 * cy) + tx;
    a.t1 = cy - (a.m10 * cx + a.m11 * cy) + ty;
    return a;
}

namespace {

FeatureGrid make_noise_grid(const SynthConfig& cfg, Rng& rng) {
    FeatureGrid g;
    g.height = cfg.grid_h;
    g.width = cfg.grid_w;
    g.channels = cfg.channels;
    g.cell_size_num = cfg.cell_size_num;
    g.cell_size_den = cfg.cell_size_den;
    // Zero-mean noise keeps the pooled descriptors spread out in angle;
    // all-positive features would push every cosine toward 1.
    g.data.resize(static_cast<std::size_t>(cfg.grid_h) * cfg.grid_w * cfg.channels);
    for (float& v : g.data) v = static_cast<float>(rng.next_double() - 0.5);
    return g;
}

// Separable mean filter with clamped windows.
void box_smooth(FeatureGrid& g, int radius) {
    if (radius <= 0) return;
    const int h = g.height, w = g.width, c = g.channels;
    std::vector<float> tmp(g.data.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
            for (int ch = 0; ch < c; ++ch) {
                double sum = 0;
                for (int xx = x0; xx <= x1; ++xx) sum += g.at(y, xx, ch);
                tmp[(static_cast<std::size_t>(y) * w + x) * c + ch] =
                    static_cast<float>(sum / (x1 - x0 + 1));
            }
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
            for (int ch = 0; ch < c; ++ch) {
                double sum = 0;
                for (int yy = y0; yy <= y1; ++yy) sum += tmp[(static_cast<std::size_t>(yy) * w + x) * c + ch];
                g.at(y, x, ch) = static_cast<float>(sum / (y1 - y0 + 1));
            }
        }
}

FeatureGrid resample_grid(const FeatureGrid& src, const AffineTransform& a, Rng& fill_rng) {
    FeatureGrid out = src;
    const AffineTransform inv = a.inverse();
    const double cell = src.cell_size();
    const int h = src.height, w = src.width, c = src.channels;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double px = (x + 0.5) * cell, py = (y + 0.5) * cell;
            const auto sp = inv.apply(px, py);
            const double sx = sp[0] / cell - 0.5, sy = sp[1] / cell - 0.5;
            float* dst = &out.data[(static_cast<std::size_t>(y) * w + x) * c];
            if (sx >= 0 && sx <= w - 1 && sy >= 0 && sy <= h - 1) {
                const int ix = std::min(static_cast<int>(sx), w - 2 >= 0 ? w - 2 : 0);
                const int iy = std::min(static_cast<int>(sy), h - 2 >= 0 ? h - 2 : 0);
                const double fx = sx - ix, fy = sy - iy;
                const int ix1 = std::min(ix + 1, w - 1), iy1 = std::min(iy + 1, h - 1);
                for (int ch = 0; ch < c; ++ch) {
                    const double v00 = src.at(iy, ix, ch), v01 = src.at(iy, ix1, ch);
                    const double v10 = src.at(iy1, ix, ch), v11 = src.at(iy1, ix1, ch);
                    dst[ch] = static_cast<float>(v00 * (1 - fx) * (1 - fy) + v01 * fx * (1 - fy) +
                                                 v10 * (1 - fx) * fy + v11 * fx * fy);
                }
            } else {
                for (int ch = 0; ch < c; ++ch) dst[ch] = static_cast<float>(fill_rng.next_double() - 0.5);
            }
        }
    return out;
}

Box random_box(double w_px, double h_px, double box_min, double box_max, Rng& rng) {
    const double bw = rng.uniform(box_min, box_max);
    const double bh = rng.uniform(box_min, box_max);
    const double cx = rng.uniform(bw / 2, w_px - bw / 2);
    const double cy = rng.uniform(bh / 2, h_px - bh / 2);
    return {cx - bw / 2, cy - bh / 2, cx + bw / 2, cy + bh / 2};
}

Box clamp_box_into(const Box& b, double w_px, double h_px) {
    if (b.x_min >= 0 && b.y_min >= 0 && b.x_max <= w_px && b.y_max <= h_px && b.width() >= 1 &&
        b.height() >= 1)
        return b;
    double bw = std::min(b.width(), w_px);
    double bh = std::min(b.height(), h_px);
    bw = std::max(bw, 1.0);
    bh = std::max(bh, 1.0);
    double x0 = std::clamp(b.x_min, 0.0, w_px - bw);
    double y0 = std::clamp(b.y_min, 0.0, h_px - bh);
    return {x0, y0, x0 + bw, y0 + bh};
}

Box jitter_box(const Box& b, const JitterParams& jp, double w_px, double h_px, Rng& rng) {
    const double dx = rng.uniform(-jp.center_frac, jp.center_frac) * b.width();
    const double dy = rng.uniform(-jp.center_frac, jp.center_frac) * b.height();
    const double sw = 1.0 + rng.uniform(-jp.scale_frac, jp.scale_frac);
    const double sh = 1.0 + rng.uniform(-jp.scale_frac, jp.scale_frac);
    if (dx == 0 && dy == 0 && sw == 1 && sh == 1) return clamp_box_into(b, w_px, h_px);
    const double cx = b.center_x() + dx, cy = b.center_y() + dy;
    const double bw = b.width() * sw, bh = b.height() * sh;
    return clamp_box_into({cx - bw / 2, cy - bh / 2, cx + bw / 2, cy + bh / 2}, w_px, h_px);
}

Box uniform_corner_box(double w_px, double h_px, Rng& rng) {
    for (int attempt = 0; attempt < kRandomBoxRetryCap; ++attempt) {
        double x0 = rng.uniform(0, w_px), x1 = rng.uniform(0, w_px);
        double y0 = rng.uniform(0, h_px), y1 = rng.uniform(0, h_px);
        if (x0 > x1) std::swap(x0, x1);
        if (y0 > y1) std::swap(y0, y1);
        if (x1 - x0 >= 2 && y1 - y0 >= 2) return {x0, y0, x1, y1};
    }
    throw std::invalid_argument("uniform box sampling: retry cap exhausted");
}

}  // namespace

SynthPair generate_pair(const SynthConfig& cfg) {
    Rng master(cfg.seed);
    Rng warp_rng = master.derive("warp");
    return generate_pair_with_transform(cfg, sample_transform(cfg, warp_rng));
}

SynthPair generate_pair_with_transform(const SynthConfig& cfg, const AffineTransform& a) {
    cfg.validate();
    Rng master(cfg.seed);
    const double cell = static_cast<double>(cfg.cell_size_num) / cfg.cell_size_den;
    const double w_px = cfg.grid_w * cell, h_px = cfg.grid_h * cell;

    SynthPair sp;
    sp.seed = cfg.seed;
    sp.transform = a;

    Rng noise_rng = master.derive("source_noise");
    sp.pair.grid_a = make_noise_grid(cfg, noise_rng);
    box_smooth(sp.pair.grid_a, cfg.smooth_radius);

    Rng fill_rng = master.derive("target_fill");
    sp.pair.grid_b = resample_grid(sp.pair.grid_a, a, fill_rng);
    if (cfg.feature_noise > 0) {
        Rng noise_rng = master.derive("feature_noise");
        for (float& v : sp.pair.grid_b.data)
            v += static_cast<float>(cfg.feature_noise * (noise_rng.next_double() - 0.5));
    }

    // Ground-truth boxes must keep their warped hull inside the target.
    Rng box_rng = master.derive("gt_boxes");
    std::vector<Box> gt_boxes;
    std::vector<Box> gt_hulls;
    for (int i = 0; i < cfg.n_gt; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < kBoxRetryCap; ++attempt) {
            const Box b = random_box(w_px, h_px, cfg.box_min, cfg.box_max, box_rng);
            const Box hull = warp_box_hull(b, a);
            if (hull.x_min >= 0 && hull.y_min >= 0 && hull.x_max <= w_px && hull.y_max <= h_px) {
                gt_boxes.push_back(b);
                gt_hulls.push_back(hull);
                placed = true;
                break;
            }
        }
        if (!placed)
            throw std::invalid_argument("generate_pair: could not place a ground-truth box inside the "
                                        "warped image (retry cap exhausted)");
    }

    sp.pair.props_a = gt_boxes;
    Rng distract_a = master.derive("distract_src");
    while (static_cast<int>(sp.pair.props_a.size()) < cfg.n_proposals)
        sp.pair.props_a.push_back(random_box(w_px, h_px, cfg.box_min, cfg.box_max, distract_a));

    sp.pair.props_b = gt_hulls;
    Rng jitter_rng = master.derive("jitter");
    for (int i = 0; i < cfg.n_gt; ++i)
        for (int j = 0; j < cfg.n_jitter; ++j)
            sp.pair.props_b.push_back(
                jitter_box(gt_hulls[static_cast<std::size_t>(i)], {}, w_px, h_px, jitter_rng));
    Rng distract_b = master.derive("distract_tgt");
    while (static_cast<int>(sp.pair.props_b.size()) < cfg.n_proposals)
        sp.pair.props_b.push_back(random_box(w_px, h_px, cfg.box_min, cfg.box_max, distract_b));

    for (int i = 0; i < cfg.n_gt; ++i) sp.pair.truth[i] = gt_hulls[static_cast<std::size_t>(i)];

    Rng kp_rng = master.derive("keypoints");
    for (int i = 0; i < cfg.n_keypoints; ++i) {
        const Box& b = gt_boxes[kp_rng.uniform_int(static_cast<std::uint64_t>(cfg.n_gt))];
        const double px = kp_rng.uniform(b.x_min, b.x_max);
        const double py = kp_rng.uniform(b.y_min, b.y_max);
        const auto q = a.apply(px, py);
        sp.pair.keypoints.push_back({px, py, q[0], q[1]});
    }
    return sp;
}

ProposalKind proposal_kind_from_name(const std::string& name) {
    if (name == "gt_jitter") return ProposalKind::GtJitter;
    if (name == "sliding_window") return ProposalKind::SlidingWindow;
    if (name == "uniform_random") return ProposalKind::UniformRandom;
    throw std::invalid_argument("unknown proposal kind '" + name + "'");
}

std::string proposal_kind_name(ProposalKind kind) {
    switch (kind) {
        case ProposalKind::GtJitter: return "gt_jitter";
        case ProposalKind::SlidingWindow: return "sliding_window";
        case ProposalKind::UniformRandom: return "uniform_random";
    }
    return "?";
}

std::vector<Box> sliding_window_grid(const ImageSize& size, double box_frac, double stride_frac) {
    if (!size.valid()) throw std::invalid_argument("sliding_window_grid: invalid image size");
    if (!(box_frac > 0 && box_frac <= 1) || !(stride_frac > 0))
        throw std::invalid_argument("sliding_window_grid: fractions out of range");
    const double side = box_frac * std::min(size.width, size.height);
    const double stride = stride_frac * side;
    std::vector<Box> out;
    for (double y = 0; y + side <= size.height + 1e-9; y += stride)
        for (double x = 0; x + side <= size.width + 1e-9; x += stride)
            out.push_back({x, y, x + side, y + side});
    return out;
}

std::vector<Box> proposal_variants(const SynthPair& sp, ProposalKind kind, int count, PairSide side,
                                   std::uint64_t seed, const JitterParams& jitter) {
    if (count < 1) throw std::invalid_argument("proposal_variants: count must be >= 1");
    const ImageSize size = side == PairSide::Source ? sp.pair.size_a() : sp.pair.size_b();
    Rng rng = Rng(seed).derive(proposal_kind_name(kind));

    if (kind == ProposalKind::UniformRandom) {
        std::vector<Box> out;
        out.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) out.push_back(uniform_corner_box(size.width, size.height, rng));
        return out;
    }

    if (kind == ProposalKind::SlidingWindow) {
        // Refine the stride until the multi-scale pyramid can fill the
        // budget, then interleave scales round-robin so no single scale or
        // image region soaks up the whole count.
        const std::vector<double> scales = {0.25, 0.5, 0.75};
        for (int level = 0; level < 13; ++level) {
            const double stride_frac = 1.0 / static_cast<double>(1 << level);
            std::vector<std::vector<Box>> per_scale;
            std::size_t total = 0;
            for (double s : scales) {
                per_scale.push_back(sliding_window_grid(size, s, stride_frac));
                total += per_scale.back().size();
            }
            if (static_cast<int>(total) < count) continue;
            std::vector<Box> out;
            out.reserve(static_cast<std::size_t>(count));
            std::vector<std::size_t> cursor(per_scale.size(), 0);
            while (static_cast<int>(out.size()) < count)
                for (std::size_t s = 0; s < per_scale.size() && static_cast<int>(out.size()) < count; ++s)
                    if (cursor[s] < per_scale[s].size()) out.push_back(per_scale[s][cursor[s]++]);
            return out;
        }
        throw std::invalid_argument("proposal_variants: sliding window cannot reach the requested count");
    }

    // GtJitter: perturbed copies of the true boxes for most of the budget,
    // random fill for the rest.
    std::vector<Box> base;
    for (const auto& [src, hull] : sp.pair.truth)
        base.push_back(side == PairSide::Source ? sp.pair.props_a.at(static_cast<std::size_t>(src)) : hull);
    if (base.empty()) throw std::invalid_argument("proposal_variants: pair has no ground-truth boxes");

    std::vector<Box> out;
    const int jitter_target = std::min(count, std::max(static_cast<int>(base.size()), count - count / 10));
    while (static_cast<int>(out.size()) < jitter_target)
        for (const Box& b : base) {
            if (static_cast<int>(out.size()) >= jitter_target) break;
            out.push_back(jitter_box(b, jitter, size.width, size.height, rng));
        }
    while (static_cast<int>(out.size()) < count)
        out.push_back(uniform_corner_box(size.width, size.height, rng));
    return out;
}

namespace {

std::string meta_to_string(const SynthPair& sp) {
    std::string out;
    auto kv = [&](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
    kv("m00", detail::format_double(sp.transform.m00));
    kv("m01", detail::format_double(sp.transform.m01));
    kv("m10", detail::format_double(sp.transform.m10));
    kv("m11", detail::format_double(sp.transform.m11));
    kv("t0", detail::format_double(sp.transform.t0));
    kv("t1", detail::format_double(sp.transform.t1));
    kv("seed", std::to_string(sp.seed));
    return out;
}

}  // namespace

void save_pair(const std::string& dir, const SynthPair& sp) {
    fs::create_directories(dir);
    save_feature_grid(dir + "/src.fgrd", sp.pair.grid_a);
    save_feature_grid(dir + "/tgt.fgrd", sp.pair.grid_b);
    save_boxes_csv(dir + "/src_props.csv", sp.pair.props_a);
    save_boxes_csv(dir + "/tgt_props.csv", sp.pair.props_b);
    save_truth_csv(dir + "/gt.csv", sp.pair.truth);
    save_keypoints_csv(dir + "/kps.csv", sp.pair.keypoints);
    detail::write_text_file(dir + "/meta.txt", meta_to_string(sp));
}

SynthPair load_pair(const std::string& dir) {
    SynthPair sp;
    sp.pair.grid_a = load_feature_grid(dir + "/src.fgrd");
    sp.pair.grid_b = load_feature_grid(dir + "/tgt.fgrd");
    sp.pair.props_a = load_boxes_csv(dir + "/src_props.csv");
    sp.pair.props_b = load_boxes_csv(dir + "/tgt_props.csv");
    sp.pair.truth = load_truth_csv(dir + "/gt.csv");
    sp.pair.keypoints = load_keypoints_csv(dir + "/kps.csv");

    const auto lines = detail::read_text_lines(dir + "/meta.txt");
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("meta.txt: missing '=' in " + dir, i);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "m00") sp.transform.m00 = detail::parse_double_field(value, dir + "/meta.txt", i);
        else if (key == "m01") sp.transform.m01 = detail::parse_double_field(value, dir + "/meta.txt", i);
        else if (key == "m10") sp.transform.m10 = detail::parse_double_field(value, dir + "/meta.txt", i);
        else if (key == "m11") sp.transform.m11 = detail::parse_double_field(value, dir + "/meta.txt", i);
        else if (key == "t0") sp.transform.t0 = detail::parse_double_field(value, dir + "/meta.txt", i);
        else if (key == "t1") sp.transform.t1 = detail::parse_double_field(value, dir + "/meta.txt", i);
        else if (key == "seed") sp.seed = detail::parse_uint_field(value, dir, i);
        else throw FormatError("meta.txt: unknown key '" + key + "' in " + dir, i);
    }
    return sp;
}

std::vector<std::string> list_pair_dirs(const std::string& split_dir) {
    std::vector<std::string> dirs;
    if (!fs::is_directory(split_dir)) throw FormatError("dataset split not found: " + split_dir, 0);
    for (const auto& entry : fs::directory_iterator(split_dir))
        if (entry.is_directory() && entry.path().filename().string().rfind("pair_", 0) == 0)
            dirs.push_back(entry.path().string());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

void write_dataset(const std::string& root, const SynthConfig& cfg, int n_train, int n_val, int n_test) {
    cfg.validate();
    if (n_train < 0 || n_val < 0 || n_test < 0)
        throw std::invalid_argument("write_dataset: split counts must be non-negative");
    const Rng master(cfg.seed);
    int global = 0;
    const std::array<std::pair<std::string, int>, 3> splits = {
        {{"train", n_train}, {"val", n_val}, {"test", n_test}}};
    for (const auto& [name, count] : splits) {
        for (int i = 0; i < count; ++i, ++global) {
            SynthConfig pair_cfg = cfg;
            pair_cfg.seed = master.derive("pair", static_cast<std::uint64_t>(global)).seed();
            const SynthPair sp = generate_pair(pair_cfg);
            char buf[16];
            std::snprintf(buf, sizeof buf, "pair_%04d", i);
            save_pair(root + "/" + name + "/" + buf, sp);
        }
    }
}

}  // namespace regcorr
