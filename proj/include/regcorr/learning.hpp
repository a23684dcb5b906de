#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "regcorr/embedding.hpp"
#include "regcorr/features.hpp"
#include "regcorr/geometry.hpp"
#include "regcorr/scoring.hpp"

namespace regcorr {

// IoU thresholds for positive / negative sampling.
struct SampleConfig {
    double t_pos = 0.6;
    double t_neg = 0.4;

    void validate() const;
};

struct TrainConfig {
    double learning_rate = 0.001;
    double weight_decay = 0.0005;
    int epochs = 30;
    std::uint64_t seed = 0;
    double margin_pos = 0.7;
    double margin_neg = 0.3;
    bool bin_normalize = true;
    ScoreMode mode = ScoreMode::A;
    SampleConfig sampling;
    BinGrid bin_grid;
    int pool_resolution = 7;
    int embed_dim = 64;
    int prefilter_k = 0;  // 0 = score every candidate pair
    int threads = 1;

    void validate() const;
};

// A training pair: two feature grids with proposals, ground-truth target
// boxes for (a subset of) the source proposals, and keypoint pairs
// (src_x, src_y, tgt_x, tgt_y).
struct LabeledPair {
    FeatureGrid grid_a, grid_b;
    std::vector<Box> props_a, props_b;
    std::map<int, Box> truth;
    std::vector<std::array<double, 4>> keypoints;

    ImageSize size_a() const { return grid_a.image_size(); }
    ImageSize size_b() const { return grid_b.image_size(); }
};

// Labels matches in ms per the threshold scheme: for each source proposal
// with ground truth, every target with IoU(target, truth) > t_pos is a
// positive; among targets with IoU < t_neg, the min(#positives, available)
// with the highest appearance similarity become negatives (ties to the
// lower target index). Everything else stays unlabeled. Returns the sampled
// match indices in deterministic order. Requires similarities to be filled
// and a non-empty truth map.
std::vector<int> sample_matches(MatchSet& ms, const std::map<int, Box>& truth, const SampleConfig& cfg);

// Two-margin hinge on the (optionally bin-normalized) score:
//   l = y * max(0, margin_pos - z) + (1 - y) * max(0, z - margin_neg)
// Subgradient at the kinks is 0.
struct HingeResult {
    double loss = 0;
    double dloss_dz = 0;
};
HingeResult hinge_loss(double z_norm, int y, double margin_pos, double margin_neg);

// Mean-vote normalization used only inside the loss; matching and
// evaluation always see the raw score.
double normalize_score(double z, int bin_size, bool enabled);

// Forward state for one pair under fixed parameters.
struct PairForward {
    std::vector<double> raw_a, raw_b;  // p x d_in, row-major
    std::vector<Descriptor> desc_a, desc_b;
    std::vector<Descriptor> desc_ga, desc_gb;  // AG+ only
    MatchSet ms;                               // with f, f_g and z filled
    std::vector<double> z;

    ScoreBackwardInputs backward_inputs(const EmbeddingParams& params) const;
};
PairForward forward_pair(const LabeledPair& pair, const EmbeddingParams& params, ScoreMode mode,
                         const BinGrid& grid, int pool_resolution, int threads, int prefilter_k = 0);

// A sampled match with its frozen label (1 positive, 0 negative).
struct LabeledSample {
    int match_idx = 0;
    int y = 0;
};
std::vector<LabeledSample> labeled_samples(const MatchSet& ms, std::span<const int> sample_indices);

// Objective E = sum_samples l(y, z_norm) + weight_decay * |W|^2 over a
// fixed sampled subset, and optionally its exact parameter gradient
// (including the 2 * weight_decay * W term). The fixed subset keeps the
// function differentiable for finite-difference checks.
double pair_objective(const PairForward& fwd, std::span<const LabeledSample> samples,
                      const EmbeddingParams& params, const TrainConfig& cfg, ScoreGradient* grad_out);

struct LossRecord {
    int epoch = 0;
    int pair = 0;
    double loss = 0;
};

struct TrainResult {
    EmbeddingParams params;
    std::vector<LossRecord> loss_log;
};

// Mini-batch SGD, one pair per batch, pairs shuffled per epoch from the
// seeded generator. Deterministic given (config, seed) and independent of
// the thread count. Throws NumericError on a non-finite loss.
TrainResult train(std::span<const LabeledPair> pairs, const TrainConfig& cfg);

// Ground-truth file: `src_box_id,tgt_x_min,tgt_y_min,tgt_x_max,tgt_y_max`.
std::map<int, Box> load_truth_csv(const std::string& path);
void save_truth_csv(const std::string& path, const std::map<int, Box>& truth);

// Keypoints file: `src_x,src_y,tgt_x,tgt_y`.
std::vector<std::array<double, 4>> load_keypoints_csv(const std::string& path);
void save_keypoints_csv(const std::string& path, std::span<const std::array<double, 4>> kps);

// Loss log: `epoch,pair,loss`.
void save_loss_log_csv(const std::string& path, std::span<const LossRecord> log);

}  // namespace regcorr
