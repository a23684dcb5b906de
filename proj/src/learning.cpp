#include "regcorr/learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "regcorr/detail/csv.hpp"
#include "regcorr/detail/parallel.hpp"
#include "regcorr/error.hpp"

namespace regcorr {

void SampleConfig::validate() const {
    if (!(t_pos >= 0 && t_pos <= 1) || !(t_neg >= 0 && t_neg <= 1))
        throw std::invalid_argument("sample config: thresholds must lie in [0,1]");
    if (t_neg > t_pos) throw std::invalid_argument("sample config: t_neg must not exceed t_pos");
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0)) throw std::invalid_argument("train config: learning rate must be non-negative");
    if (!(weight_decay >= 0)) throw std::invalid_argument("train config: weight decay must be non-negative");
    if (epochs < 0) throw std::invalid_argument("train config: epochs must be non-negative");
    if (!(margin_neg >= 0 && margin_neg < margin_pos && margin_pos <= 1))
        throw std::invalid_argument("train config: margins must satisfy 0 <= neg < pos <= 1");
    if (pool_resolution < 1) throw std::invalid_argument("train config: pool resolution must be >= 1");
    if (embed_dim < 1) throw std::invalid_argument("train config: embed dim must be >= 1");
    if (prefilter_k < 0) throw std::invalid_argument("train config: prefilter k must be non-negative");
    sampling.validate();
    bin_grid.validate();
}

std::vector<int> sample_matches(MatchSet& ms, const std::map<int, Box>& truth, const SampleConfig& cfg) {
    cfg.validate();
    if (truth.empty()) throw std::invalid_argument("sample_matches: pair has no ground truth");

    // Candidate matches grouped by source proposal, in target order.
    std::vector<std::vector<int>> by_src(ms.props_a.size());
    for (std::size_t k = 0; k < ms.matches.size(); ++k)
        by_src[static_cast<std::size_t>(ms.matches[k].src)].push_back(static_cast<int>(k));

    std::vector<int> sampled;
    for (const auto& [src, true_box] : truth) {
        if (src < 0 || static_cast<std::size_t>(src) >= by_src.size())
            throw std::invalid_argument("sample_matches: ground-truth source index out of range");

        std::vector<int> positives;
        std::vector<int> neg_candidates;
        for (int k : by_src[static_cast<std::size_t>(src)]) {
            const Match& m = ms.matches[static_cast<std::size_t>(k)];
            const double overlap = iou(ms.props_b[static_cast<std::size_t>(m.tgt)], true_box);
            if (overlap > cfg.t_pos)
                positives.push_back(k);
            else if (overlap < cfg.t_neg)
                neg_candidates.push_back(k);
        }
        if (positives.empty()) continue;

        // Hardest negatives: highest appearance similarity below t_neg,
        // ties to the lower target index.
        std::sort(neg_candidates.begin(), neg_candidates.end(), [&](int a, int b) {
            const Match& ma = ms.matches[static_cast<std::size_t>(a)];
            const Match& mb = ms.matches[static_cast<std::size_t>(b)];
            if (ma.f != mb.f) return ma.f > mb.f;
            return ma.tgt < mb.tgt;
        });
        const std::size_t n_neg = std::min(positives.size(), neg_candidates.size());

        for (int k : positives) {
            ms.matches[static_cast<std::size_t>(k)].label = MatchLabel::Positive;
            sampled.push_back(k);
        }
        for (std::size_t i = 0; i < n_neg; ++i) {
            ms.matches[static_cast<std::size_t>(neg_candidates[i])].label = MatchLabel::Negative;
            sampled.push_back(neg_candidates[i]);
        }
    }
    return sampled;
}

HingeResult hinge_loss(double z_norm, int y, double margin_pos, double margin_neg) {
    HingeResult r;
    if (y == 1) {
        if (z_norm < margin_pos) {
            r.loss = margin_pos - z_norm;
            r.dloss_dz = -1;
        }
    } else {
        if (z_norm > margin_neg) {
            r.loss = z_norm - margin_neg;
            r.dloss_dz = 1;
        }
    }
    return r;
}

double normalize_score(double z, int bin_size, bool enabled) {
    if (bin_size < 1) throw std::invalid_argument("normalize_score: bin size must be >= 1");
    return enabled ? z / bin_size : z;
}

ScoreBackwardInputs PairForward::backward_inputs(const EmbeddingParams& params) const {
    ScoreBackwardInputs in;
    in.raw_a = raw_a;
    in.raw_b = raw_b;
    in.desc_a = desc_a;
    in.desc_b = desc_b;
    in.desc_ga = desc_ga;
    in.desc_gb = desc_gb;
    in.params = &params;
    return in;
}

namespace {

// Pools and embeds one proposal side. Outputs are per-proposal, so the
// parallel blocks write disjoint ranges.
void pool_and_embed(const FeatureGrid& grid, const std::vector<Box>& props, const EmbeddingParams& params,
                    bool with_g, int pool_resolution, int threads, std::vector<double>& raw,
                    std::vector<Descriptor>& desc, std::vector<Descriptor>& desc_g) {
    const std::size_t d_in = static_cast<std::size_t>(params.d_in);
    raw.assign(props.size() * d_in, 0.0);
    desc.resize(props.size());
    if (with_g) desc_g.resize(props.size());
    detail::parallel_blocks(static_cast<std::int64_t>(props.size()), 8, threads,
                            [&](std::int64_t begin, std::int64_t end) {
                                for (std::int64_t i = begin; i < end; ++i) {
                                    const auto ii = static_cast<std::size_t>(i);
                                    const auto pooled = roi_pool(grid, props[ii], pool_resolution);
                                    const auto flat = flatten(pooled);
                                    std::copy(flat.begin(), flat.end(), raw.begin() + ii * d_in);
                                    std::span<const double> r(raw.data() + ii * d_in, d_in);
                                    desc[ii] = embed(r, params.w_a, params.d_in, params.d_out);
                                    if (with_g) desc_g[ii] = embed(r, params.w_g, params.d_in, params.d_out);
                                }
                            });
}

}  // namespace

PairForward forward_pair(const LabeledPair& pair, const EmbeddingParams& params, ScoreMode mode,
                         const BinGrid& grid, int pool_resolution, int threads, int prefilter_k) {
    params.validate();
    if (pair.grid_a.channels != pair.grid_b.channels)
        throw std::invalid_argument("forward_pair: channel mismatch between grids");
    const int d_in = pool_resolution * pool_resolution * pair.grid_a.channels;
    if (d_in != params.d_in)
        throw std::invalid_argument("forward_pair: embedding d_in does not match P*P*C of the features");
    if (mode == ScoreMode::AGPlus && params.mode != ScoreMode::AGPlus)
        throw std::invalid_argument("forward_pair: AG+ scoring requires AG+ parameters (w_g)");

    PairForward fwd;
    const bool with_g = mode == ScoreMode::AGPlus;
    pool_and_embed(pair.grid_a, pair.props_a, params, with_g, pool_resolution, threads, fwd.raw_a,
                   fwd.desc_a, fwd.desc_ga);
    pool_and_embed(pair.grid_b, pair.props_b, params, with_g, pool_resolution, threads, fwd.raw_b,
                   fwd.desc_b, fwd.desc_gb);

    fwd.ms = build_match_set(pair.props_a, pair.props_b, pair.size_a(), pair.size_b(), grid);
    set_similarities(fwd.ms, fwd.desc_a, fwd.desc_b, fwd.desc_ga, fwd.desc_gb, threads);
    if (prefilter_k > 0) fwd.ms = prefilter_top_k(fwd.ms, prefilter_k);
    fwd.z = score_sparse(fwd.ms, mode);
    fwd.ms.set_scores(fwd.z);
    return fwd;
}

std::vector<LabeledSample> labeled_samples(const MatchSet& ms, std::span<const int> sample_indices) {
    std::vector<LabeledSample> out;
    out.reserve(sample_indices.size());
    for (int k : sample_indices) {
        const MatchLabel label = ms.matches.at(static_cast<std::size_t>(k)).label;
        if (label == MatchLabel::Unlabeled)
            throw std::invalid_argument("labeled_samples: unlabeled match in sample set");
        out.push_back({k, label == MatchLabel::Positive ? 1 : 0});
    }
    return out;
}

double pair_objective(const PairForward& fwd, std::span<const LabeledSample> samples,
                      const EmbeddingParams& params, const TrainConfig& cfg, ScoreGradient* grad_out) {
    double loss = 0;
    std::vector<double> dz;
    if (grad_out) dz.assign(fwd.ms.matches.size(), 0.0);

    for (const LabeledSample& s : samples) {
        const auto k = static_cast<std::size_t>(s.match_idx);
        // Mode A carries no votes, so its loss sees the raw similarity.
        const int bin_size = cfg.mode == ScoreMode::A ? 1 : fwd.ms.bin_size_of(s.match_idx);
        const double z_norm = normalize_score(fwd.z[k], bin_size, cfg.bin_normalize);
        const HingeResult h = hinge_loss(z_norm, s.y, cfg.margin_pos, cfg.margin_neg);
        loss += h.loss;
        if (grad_out && h.dloss_dz != 0)
            dz[k] += cfg.bin_normalize ? h.dloss_dz / bin_size : h.dloss_dz;
    }

    double reg = 0;
    for (double v : params.w_a) reg += v * v;
    for (double v : params.w_g) reg += v * v;
    loss += cfg.weight_decay * reg;

    if (grad_out) {
        *grad_out = score_gradient(fwd.ms, cfg.mode, dz, fwd.backward_inputs(params), cfg.threads);
        const double two_wd = 2.0 * cfg.weight_decay;
        if (two_wd != 0) {
            for (std::size_t i = 0; i < params.w_a.size(); ++i) grad_out->d_w_a[i] += two_wd * params.w_a[i];
            for (std::size_t i = 0; i < params.w_g.size(); ++i) grad_out->d_w_g[i] += two_wd * params.w_g[i];
        }
    }
    return loss;
}

TrainResult train(std::span<const LabeledPair> pairs, const TrainConfig& cfg) {
    cfg.validate();
    if (pairs.empty()) throw std::invalid_argument("train: need at least one labeled pair");
    const int channels = pairs[0].grid_a.channels;
    for (const LabeledPair& p : pairs)
        if (p.grid_a.channels != channels || p.grid_b.channels != channels)
            throw std::invalid_argument("train: inconsistent channel counts across pairs");

    const int d_in = cfg.pool_resolution * cfg.pool_resolution * channels;
    Rng master(cfg.seed);
    Rng init_rng = master.derive("init");
    Rng shuffle_rng = master.derive("shuffle");

    TrainResult result;
    result.params = init_params(d_in, cfg.embed_dim, cfg.mode, init_rng);

    std::vector<int> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (int pair_idx : order) {
            const LabeledPair& pair = pairs[static_cast<std::size_t>(pair_idx)];
            PairForward fwd = forward_pair(pair, result.params, cfg.mode, cfg.bin_grid,
                                           cfg.pool_resolution, cfg.threads, cfg.prefilter_k);
            const std::vector<int> sampled = sample_matches(fwd.ms, pair.truth, cfg.sampling);
            const std::vector<LabeledSample> samples = labeled_samples(fwd.ms, sampled);

            ScoreGradient grad;
            const double loss = pair_objective(fwd, samples, result.params, cfg, &grad);
            if (!std::isfinite(loss))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", pair " +
                                   std::to_string(pair_idx));
            result.loss_log.push_back({epoch, pair_idx, loss});

            for (std::size_t i = 0; i < result.params.w_a.size(); ++i)
                result.params.w_a[i] -= cfg.learning_rate * grad.d_w_a[i];
            for (std::size_t i = 0; i < result.params.w_g.size(); ++i)
                result.params.w_g[i] -= cfg.learning_rate * grad.d_w_g[i];
        }
    }
    return result;
}

std::map<int, Box> load_truth_csv(const std::string& path) {
    const auto lines = detail::read_text_lines(path);
    if (lines.empty() || lines[0] != "src_box_id,tgt_x_min,tgt_y_min,tgt_x_max,tgt_y_max")
        throw FormatError("truth csv: bad header in " + path, 0);
    std::map<int, Box> truth;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = detail::split_csv_line(lines[i]);
        if (fields.size() != 5) throw FormatError("truth csv: expected 5 fields in " + path, i);
        const int id = static_cast<int>(detail::parse_int_field(fields[0], path, i));
        Box b;
        b.x_min = detail::parse_double_field(fields[1], path, i);
        b.y_min = detail::parse_double_field(fields[2], path, i);
        b.x_max = detail::parse_double_field(fields[3], path, i);
        b.y_max = detail::parse_double_field(fields[4], path, i);
        if (!b.valid()) throw FormatError("truth csv: degenerate box in " + path, i);
        truth[id] = b;
    }
    return truth;
}

void save_truth_csv(const std::string& path, const std::map<int, Box>& truth) {
    std::string out = "src_box_id,tgt_x_min,tgt_y_min,tgt_x_max,tgt_y_max\n";
    for (const auto& [id, b] : truth) {
        out += std::to_string(id);
        out += ',';
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

std::vector<std::array<double, 4>> load_keypoints_csv(const std::string& path) {
    const auto lines = detail::read_text_lines(path);
    if (lines.empty() || lines[0] != "src_x,src_y,tgt_x,tgt_y")
        throw FormatError("keypoints csv: bad header in " + path, 0);
    std::vector<std::array<double, 4>> kps;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = detail::split_csv_line(lines[i]);
        if (fields.size() != 4) throw FormatError("keypoints csv: expected 4 fields in " + path, i);
        std::array<double, 4> kp;
        for (int j = 0; j < 4; ++j)
            kp[static_cast<std::size_t>(j)] = detail::parse_double_field(fields[static_cast<std::size_t>(j)], path, i);
        kps.push_back(kp);
    }
    return kps;
}

void save_keypoints_csv(const std::string& path, std::span<const std::array<double, 4>> kps) {
    std::string out = "src_x,src_y,tgt_x,tgt_y\n";
    for (const auto& kp : kps) {
        out += detail::format_double(kp[0]);
        out += ',';
        out += detail::format_double(kp[1]);
        out += ',';
        out += detail::format_double(kp[2]);
        out += ',';
        out += detail::format_double(kp[3]);
        out += '\n';
    }
    detail::write_text_file(path, out);
}

void save_loss_log_csv(const std::string& path, std::span<const LossRecord> log) {
    std::string out = "epoch,pair,loss\n";
    for (const LossRecord& r : log) {
        out += std::to_string(r.epoch);
        out += ',';
        out += std::to_string(r.pair);
        out += ',';
        out += detail::format_double(r.loss);
        out += '\n';
    }
    detail::write_text_file(path, out);
}

}  // namespace regcorr
