#pragma once

#include <string>
#include <vector>

#include "regcorr/learning.hpp"
#include "regcorr/metrics.hpp"
#include "regcorr/scoring.hpp"
#include "regcorr/synthbench.hpp"

namespace regcorr {

struct EvalOptions {
    std::vector<double> taus = tau_grid();
    int miou_k = 30;
    int pool_resolution = 7;
    BinGrid bin_grid;
    int prefilter_k = 0;
    int threads = 1;
};

// Best matches as box pairs for densification.
std::vector<ScoredBoxMatch> to_scored_box_matches(const MatchSet& ms, std::span<const BestMatch> best);

// Forward pass, per-source argmax, densified flow and metric curves for one
// pair. PCR and mIoU run over the source proposals that carry ground truth;
// PCK runs over the keypoints through the densified flow.
PairEval evaluate_pair(const std::string& name, const LabeledPair& pair, const EmbeddingParams& params,
                       ScoreMode mode, const EvalOptions& opts);

EvalReport evaluate_pairs(const std::vector<std::string>& names, std::span<const LabeledPair> pairs,
                          const EmbeddingParams& params, ScoreMode mode, const EvalOptions& opts);

// Replaces both proposal sets with generated variants and extends the
// ground truth to every source proposal via the pair's stored transform.
void apply_variant_proposals(SynthPair& sp, ProposalKind kind, int count, std::uint64_t seed,
                             const JitterParams& jitter = {});

}  // namespace regcorr
