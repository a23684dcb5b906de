#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regcorr/geometry.hpp"
#include "regcorr/learning.hpp"
#include "regcorr/rng.hpp"

namespace regcorr {

// 2D affine map p -> M p + t in pixel coordinates.
struct AffineTransform {
    double m00 = 1, m01 = 0, m10 = 0, m11 = 1, t0 = 0, t1 = 0;

    std::array<double, 2> apply(double x, double y) const {
        return {m00 * x + m01 * y + t0, m10 * x + m11 * y + t1};
    }
    AffineTransform inverse() const;

    static AffineTransform identity() { return {}; }
    static AffineTransform translation(double dx, double dy) { return {1, 0, 0, 1, dx, dy}; }
};

// Axis-aligned hull of the box corners under the transform.
Box warp_box_hull(const Box& box, const AffineTransform& a);

struct SynthConfig {
    int grid_h = 64, grid_w = 64, channels = 16;
    std::uint32_t cell_size_num = 1, cell_size_den = 1;

    // Warp ranges: rotation in degrees, isotropic scale, translation as a
    // fraction of the image dimensions.
    double rotation_max_deg = 15.0;
    double scale_min = 0.9, scale_max = 1.1;
    double translation_frac = 0.1;

    int n_gt = 50;           // ground-truth object boxes
    int n_jitter = 3;        // jittered copies per ground-truth target
    int n_proposals = 500;   // per side; distractors fill up to this count
    int n_keypoints = 20;
    int smooth_radius = 2;   // box-filter radius for the noise features
    double box_min = 8, box_max = 24;  // ground-truth box side range, pixels
    double feature_noise = 0.0;        // uniform noise amplitude added to the target grid

    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthPair {
    LabeledPair pair;
    AffineTransform transform;
    std::uint64_t seed = 0;
};

AffineTransform sample_transform(const SynthConfig& cfg, Rng& rng);

// Source grid: seeded noise smoothed by a box filter; target grid: bilinear
// resample of the source under the inverse transform, with out-of-range
// cells filled by fresh noise. Proposals, ground truth and keypoints as
// described in the dataset layout. Deterministic given the config seed.
// Boxes whose warped hull leaves the target image are resampled up to a
// retry cap; exhausting it is an error.
SynthPair generate_pair(const SynthConfig& cfg);
SynthPair generate_pair_with_transform(const SynthConfig& cfg, const AffineTransform& a);

enum class ProposalKind { GtJitter, SlidingWindow, UniformRandom };
enum class PairSide { Source, Target };

ProposalKind proposal_kind_from_name(const std::string& name);
std::string proposal_kind_name(ProposalKind kind);

struct JitterParams {
    double center_frac = 0.1;  // center noise as a fraction of the box size
    double scale_frac = 0.2;   // size noise as a fraction of 1
};

// Replacement proposal sets for one side of a pair. GtJitter perturbs the
// ground-truth boxes (source side) or their warped hulls (target side) and
// fills with random boxes; SlidingWindow emits a regular multi-scale grid;
// UniformRandom draws i.i.d. boxes. Deterministic per seed.
std::vector<Box> proposal_variants(const SynthPair& sp, ProposalKind kind, int count, PairSide side,
                                   std::uint64_t seed, const JitterParams& jitter = {});

// Square windows of side box_frac * min(W, H), stepped by stride_frac of
// the window side, row-major.
std::vector<Box> sliding_window_grid(const ImageSize& size, double box_frac, double stride_frac);

// Dataset directory layout: pair_NNNN/ with src.fgrd, tgt.fgrd,
// src_props.csv, tgt_props.csv, gt.csv, kps.csv and meta.txt (transform and
// seed as key=value lines).
void save_pair(const std::string& dir, const SynthPair& sp);
SynthPair load_pair(const std::string& dir);

// Sorted pair_* subdirectories of a split directory.
std::vector<std::string> list_pair_dirs(const std::string& split_dir);

// Writes train/val/test splits under root; pair seeds derive from
// cfg.seed and the global pair index.
void write_dataset(const std::string& root, const SynthConfig& cfg, int n_train, int n_val, int n_test);

}  // namespace regcorr
