#include "regcorr/pipeline.hpp"

#include <stdexcept>

namespace regcorr {

std::vector<ScoredBoxMatch> to_scored_box_matches(const MatchSet& ms, std::span<const BestMatch> best) {
    std::vector<ScoredBoxMatch> out;
    out.reserve(best.size());
    for (const BestMatch& b : best)
        out.push_back({ms.props_a[static_cast<std::size_t>(b.src)], ms.props_b[static_cast<std::size_t>(b.tgt)],
                       b.z, b.src, b.tgt});
    return out;
}

PairEval evaluate_pair(const std::string& name, const LabeledPair& pair, const EmbeddingParams& params,
                       ScoreMode mode, const EvalOptions& opts) {
    if (pair.truth.empty()) throw std::invalid_argument("evaluate_pair: pair has no ground truth");
    const PairForward fwd = forward_pair(pair, params, mode, opts.bin_grid, opts.pool_resolution,
                                         opts.threads, opts.prefilter_k);
    const std::vector<BestMatch> best = best_matches(fwd.ms);

    std::vector<int> best_tgt(pair.props_a.size(), -1);
    std::vector<double> best_score(pair.props_a.size(), 0.0);
    for (const BestMatch& b : best) {
        best_tgt[static_cast<std::size_t>(b.src)] = b.tgt;
        best_score[static_cast<std::size_t>(b.src)] = b.z;
    }

    std::vector<RegionAssignment> assignments;
    std::vector<ScoredOverlap> overlaps;
    for (const auto& [src, true_box] : pair.truth) {
        const int tgt = best_tgt.at(static_cast<std::size_t>(src));
        if (tgt < 0) continue;
        const Box& predicted = pair.props_b[static_cast<std::size_t>(tgt)];
        assignments.push_back({predicted, true_box});
        overlaps.push_back({best_score[static_cast<std::size_t>(src)], iou(predicted, true_box)});
    }
    if (assignments.empty()) throw std::invalid_argument("evaluate_pair: no ground-truth regions matched");

    const FlowField flow = densify(to_scored_box_matches(fwd.ms, best), pair.size_a(), pair.size_b());

    PairEval ev;
    ev.name = name;
    ev.pck_curve.reserve(opts.taus.size());
    ev.pcr_curve.reserve(opts.taus.size());
    for (double tau : opts.taus) {
        ev.pck_curve.push_back(pair.keypoints.empty() ? 0.0 : pck(flow, pair.keypoints, pair.size_b(), tau));
        ev.pcr_curve.push_back(pcr(assignments, tau));
    }
    for (int k = 1; k <= opts.miou_k; ++k) ev.miou.push_back(miou_at_k(overlaps, k));
    return ev;
}

EvalReport evaluate_pairs(const std::vector<std::string>& names, std::span<const LabeledPair> pairs,
                          const EmbeddingParams& params, ScoreMode mode, const EvalOptions& opts) {
    if (names.size() != pairs.size()) throw std::invalid_argument("evaluate_pairs: name count mismatch");
    std::vector<PairEval> evals;
    evals.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
        evals.push_back(evaluate_pair(names[i], pairs[i], params, mode, opts));
    return aggregate_evals(std::move(evals), opts.taus);
}

void apply_variant_proposals(SynthPair& sp, ProposalKind kind, int count, std::uint64_t seed,
                             const JitterParams& jitter) {
    const std::vector<Box> src =
        proposal_variants(sp, kind, count, PairSide::Source, seed ^ 0x736f757263ull, jitter);
    const std::vector<Box> tgt =
        proposal_variants(sp, kind, count, PairSide::Target, seed ^ 0x746172676574ull, jitter);
    sp.pair.props_a = src;
    sp.pair.props_b = tgt;
    sp.pair.truth.clear();
    for (std::size_t i = 0; i < src.size(); ++i)
        sp.pair.truth[static_cast<int>(i)] = warp_box_hull(src[i], sp.transform);
}

}  // namespace regcorr
