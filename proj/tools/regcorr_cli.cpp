// Command-line front end: dataset synthesis, training, matching, flow
// export, evaluation and the scoring benchmark. Every run is reproducible
// from its --seed and writes an effective-config dump next to its output.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "regcorr/detail/csv.hpp"
#include "regcorr/error.hpp"
#include "regcorr/learning.hpp"
#include "regcorr/pipeline.hpp"
#include "regcorr/scoring.hpp"
#include "regcorr/synthbench.hpp"

namespace fs = std::filesystem;
using namespace regcorr;

namespace {

// Exit codes: 0 success, 2 usage error, 3 data/format error, 4 numeric
// failure.
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dump every effective option of the invoked subcommand, defaults included,
// in the section format `regcorr --config <file> <subcommand>` reads back.
void write_effective_config(CLI::App* sub, const std::string& path) {
    detail::write_text_file(path, "[" + sub->get_name() + "]\n" + sub->config_to_str(true, true));
}

std::pair<std::uint32_t, std::uint32_t> parse_cell_size(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            const unsigned long num = std::stoul(text);
            if (num == 0) throw UsageError("cell size must be positive");
            return {static_cast<std::uint32_t>(num), 1};
        }
        const unsigned long num = std::stoul(text.substr(0, slash));
        const unsigned long den = std::stoul(text.substr(slash + 1));
        if (num == 0 || den == 0) throw UsageError("cell size must be positive");
        return {static_cast<std::uint32_t>(num), static_cast<std::uint32_t>(den)};
    } catch (const std::exception&) {
        throw UsageError("cell size must be N or N/D with positive integers: '" + text + "'");
    }
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string out;
    int pairs = 10;
    double split_train = 0.7, split_val = 0.15, split_test = 0.15;
    std::string warp = "moderate";
    SynthConfig cfg;
    std::string cell_size = "1";
    // Track whether explicit warp flags were given so presets do not
    // clobber them.
    CLI::Option *rot_opt = nullptr, *smin_opt = nullptr, *smax_opt = nullptr, *trans_opt = nullptr;
};

void apply_warp_preset(SynthArgs& a) {
    SynthConfig preset = a.cfg;
    if (a.warp == "identity") {
        preset.rotation_max_deg = 0;
        preset.scale_min = preset.scale_max = 1;
        preset.translation_frac = 0;
    } else if (a.warp == "moderate") {
        preset.rotation_max_deg = 15;
        preset.scale_min = 0.9;
        preset.scale_max = 1.1;
        preset.translation_frac = 0.1;
    } else if (a.warp == "hard") {
        preset.rotation_max_deg = 40;
        preset.scale_min = 0.7;
        preset.scale_max = 1.3;
        preset.translation_frac = 0.2;
    } else {
        throw UsageError("unknown warp preset '" + a.warp + "' (identity, moderate, hard)");
    }
    if (!a.rot_opt->count()) a.cfg.rotation_max_deg = preset.rotation_max_deg;
    if (!a.smin_opt->count()) a.cfg.scale_min = preset.scale_min;
    if (!a.smax_opt->count()) a.cfg.scale_max = preset.scale_max;
    if (!a.trans_opt->count()) a.cfg.translation_frac = preset.translation_frac;
}

int run_synth(SynthArgs& a, CLI::App* sub) {
    apply_warp_preset(a);
    const auto cell = parse_cell_size(a.cell_size);
    a.cfg.cell_size_num = cell.first;
    a.cfg.cell_size_den = cell.second;
    if (a.pairs < 0) throw UsageError("--pairs must be non-negative");
    if (a.split_train < 0 || a.split_val < 0 || a.split_test < 0 ||
        std::abs(a.split_train + a.split_val + a.split_test - 1.0) > 1e-9)
        throw UsageError("split fractions must be non-negative and sum to 1");
    try {
        a.cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    const int n_val = static_cast<int>(std::llround(a.split_val * a.pairs));
    const int n_test = static_cast<int>(std::llround(a.split_test * a.pairs));
    const int n_train = a.pairs - n_val - n_test;
    if (n_train < 0) throw UsageError("split fractions leave no room for the train split");

    fs::create_directories(a.out);
    write_dataset(a.out, a.cfg, n_train, n_val, n_test);
    write_effective_config(sub, a.out + "/effective_config.cfg");
    std::printf("wrote %d train / %d val / %d test pairs to %s\n", n_train, n_val, n_test, a.out.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string data, out, loss_log;
    std::string mode = "AG";
    TrainConfig cfg;
};

std::vector<LabeledPair> load_split(const std::string& dir) {
    std::vector<LabeledPair> pairs;
    for (const std::string& d : list_pair_dirs(dir)) pairs.push_back(load_pair(d).pair);
    if (pairs.empty()) throw FormatError("no pair_* directories under " + dir, 0);
    return pairs;
}

int run_train(TrainArgs& a, CLI::App* sub) {
    try {
        a.cfg.mode = score_mode_from_name(a.mode);
        a.cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const std::vector<LabeledPair> pairs = load_split(a.data);
    const TrainResult result = train(pairs, a.cfg);
    save_checkpoint(a.out, result.params);
    const std::string log_path = a.loss_log.empty() ? a.out + ".loss.csv" : a.loss_log;
    save_loss_log_csv(log_path, result.loss_log);
    write_effective_config(sub, a.out + ".cfg");

    double final_loss = 0;
    int n = 0;
    for (const LossRecord& r : result.loss_log)
        if (r.epoch == a.cfg.epochs - 1) {
            final_loss += r.loss;
            ++n;
        }
    std::printf("checkpoint %s (mode %s, %d epochs), final train loss %s\n", a.out.c_str(),
                score_mode_name(a.cfg.mode).c_str(), a.cfg.epochs,
                n ? detail::format_double(final_loss / n).c_str() : "n/a");
    return 0;
}

// ---------------------------------------------------------------------------
// match / flow

struct MatchArgs {
    std::string pair_dir, ckpt, out;
    std::string mode;
    bool all = false;
    BinGrid grid;
    int pool = 7;
    int prefilter_k = 0;
    int threads = 1;
};

ScoreMode resolve_mode(const std::string& flag, const EmbeddingParams& params) {
    if (flag.empty()) return params.mode;
    ScoreMode m;
    try {
        m = score_mode_from_name(flag);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return m;
}

PairForward forward_from_dir(const MatchArgs& a, const EmbeddingParams& params, ScoreMode mode,
                             LabeledPair* pair_out) {
    const SynthPair sp = load_pair(a.pair_dir);
    if (pair_out) *pair_out = sp.pair;
    return forward_pair(sp.pair, params, mode, a.grid, a.pool, a.threads, a.prefilter_k);
}

int run_match(MatchArgs& a, CLI::App* sub) {
    const EmbeddingParams params = load_checkpoint(a.ckpt);
    const ScoreMode mode = resolve_mode(a.mode, params);
    PairForward fwd = forward_from_dir(a, params, mode, nullptr);
    if (a.all) {
        save_matches_csv(a.out, fwd.ms);
    } else {
        std::vector<int> best_rows;
        for (const BestMatch& b : best_matches(fwd.ms)) best_rows.push_back(b.match_idx);
        save_matches_csv(a.out, fwd.ms, best_rows);
    }
    write_effective_config(sub, a.out + ".cfg");
    std::printf("wrote %s matches for %s to %s\n", a.all ? "all" : "best", a.pair_dir.c_str(), a.out.c_str());
    return 0;
}

int run_flow(MatchArgs& a, CLI::App* sub) {
    const EmbeddingParams params = load_checkpoint(a.ckpt);
    const ScoreMode mode = resolve_mode(a.mode, params);
    LabeledPair pair;
    PairForward fwd = forward_from_dir(a, params, mode, &pair);
    const auto best = best_matches(fwd.ms);
    const FlowField flow = densify(to_scored_box_matches(fwd.ms, best), pair.size_a(), pair.size_b());
    save_flow(a.out, flow);
    write_effective_config(sub, a.out + ".cfg");
    std::printf("wrote flow field %dx%d to %s\n", flow.width, flow.height, a.out.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string data, ckpt, out;
    std::string mode;
    std::string proposal_kind = "dataset";
    int proposal_count = 1000;
    int miou_k = 30;
    int tau_points = 101;
    std::uint64_t seed = 0;
    BinGrid grid;
    int pool = 7;
    int prefilter_k = 0;
    int threads = 1;
};

int run_eval(EvalArgs& a, CLI::App* sub) {
    if (a.tau_points < 2) throw UsageError("--tau-points must be at least 2");
    if (a.miou_k < 1) throw UsageError("--miou-k must be at least 1");
    const EmbeddingParams params = load_checkpoint(a.ckpt);
    const ScoreMode mode = resolve_mode(a.mode, params);

    const bool variants = a.proposal_kind != "dataset";
    ProposalKind kind = ProposalKind::GtJitter;
    if (variants) {
        try {
            kind = proposal_kind_from_name(a.proposal_kind);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        if (a.proposal_count < 1) throw UsageError("--proposal-count must be positive");
    }

    EvalOptions opts;
    opts.taus = tau_grid(a.tau_points);
    opts.miou_k = a.miou_k;
    opts.pool_resolution = a.pool;
    opts.bin_grid = a.grid;
    opts.prefilter_k = a.prefilter_k;
    opts.threads = a.threads;

    std::vector<std::string> names;
    std::vector<LabeledPair> pairs;
    const Rng master(a.seed);
    const auto dirs = list_pair_dirs(a.data);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        SynthPair sp = load_pair(dirs[i]);
        if (variants)
            apply_variant_proposals(sp, kind, a.proposal_count,
                                    master.derive("eval_proposals", static_cast<std::uint64_t>(i)).seed());
        names.push_back(fs::path(dirs[i]).filename().string());
        pairs.push_back(std::move(sp.pair));
    }
    if (pairs.empty()) throw FormatError("no pair_* directories under " + a.data, 0);

    const EvalReport report = evaluate_pairs(names, pairs, params, mode, opts);

    fs::create_directories(a.out);
    save_curve_csv(a.out + "/curve.csv", report);
    save_summary_csv(a.out + "/summary.csv", report);
    save_miou_csv(a.out + "/miou.csv", report);
    save_per_pair_csv(a.out + "/per_pair.csv", report);
    write_effective_config(sub, a.out + "/effective_config.cfg");

    std::printf("PCK@0.05 = %s\n", detail::format_double(curve_at(report, report.pck_curve, 0.05)).c_str());
    std::printf("PCK@0.10 = %s\n", detail::format_double(curve_at(report, report.pck_curve, 0.10)).c_str());
    std::printf("PCK@0.15 = %s\n", detail::format_double(curve_at(report, report.pck_curve, 0.15)).c_str());
    std::printf("PCR AuC  = %s\n", detail::format_double(report.auc_pcr).c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
    std::string out;
    std::vector<std::int64_t> n_list = {10, 1000, 10000, 50000, 250000};
    std::int64_t dense_cap = 100000;
    int n_bins = 500;
    std::uint64_t seed = 0;
};

MatchSet synthetic_bench_set(std::int64_t n, int n_bins, Rng& rng) {
    std::vector<double> f(static_cast<std::size_t>(n));
    std::vector<OffsetBin> bins(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) {
        f[static_cast<std::size_t>(k)] = rng.next_double();
        const int b = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_bins)));
        bins[static_cast<std::size_t>(k)] = {b % 9 - 4, (b / 9) % 9 - 4, (b / 81) % 5 - 2, (b / 405) % 5 - 2};
    }
    return match_set_from_values(f, bins);
}

int run_bench(BenchArgs& a, CLI::App* sub) {
    if (a.n_bins < 1) throw UsageError("--bins must be positive");
    using clock = std::chrono::steady_clock;
    volatile double sink = 0;  // keep the scored results observable

    std::string csv = "n,dense_ms,sparse_ms,speedup\n";
    for (std::int64_t n : a.n_list) {
        if (n < 1) throw UsageError("--n-list entries must be positive");
        Rng rng = Rng(a.seed).derive("bench", static_cast<std::uint64_t>(n));
        const MatchSet ms = synthetic_bench_set(n, a.n_bins, rng);

        const int sparse_reps = n >= 100000 ? 3 : 20;
        const auto ts0 = clock::now();
        for (int rep = 0; rep < sparse_reps; ++rep) {
            const auto z = score_sparse(ms, ScoreMode::AG);
            sink = sink + z[0];
        }
        const double sparse_ms =
            std::chrono::duration<double, std::milli>(clock::now() - ts0).count() / sparse_reps;

        std::string dense_field, speedup_field;
        if (n <= a.dense_cap) {
            const auto td0 = clock::now();
            const auto z = score_dense(ms, ScoreMode::AG);
            sink = sink + z[0];
            const double dense_ms = std::chrono::duration<double, std::milli>(clock::now() - td0).count();
            dense_field = detail::format_double(dense_ms);
            speedup_field = detail::format_double(dense_ms / sparse_ms);
        }
        csv += std::to_string(n) + "," + dense_field + "," + detail::format_double(sparse_ms) + "," +
               speedup_field + "\n";
        std::printf("n=%lld sparse %.3f ms%s%s\n", static_cast<long long>(n), sparse_ms,
                    dense_field.empty() ? "" : ", dense ", dense_field.c_str());
    }
    detail::write_text_file(a.out, csv);
    write_effective_config(sub, a.out + ".cfg");
    return 0;
}

void add_bin_grid_flags(CLI::App* sub, BinGrid& grid) {
    sub->add_option("--bin-trans-width", grid.translation_width, "Translation bin width")
        ->capture_default_str();
    sub->add_option("--bin-scale-width", grid.log_scale_width, "Log-scale bin width")->capture_default_str();
    sub->add_option("--bin-trans-range", grid.translation_range, "Translation bin range (covers [-r, r])")
        ->capture_default_str();
    sub->add_option("--bin-scale-range", grid.log_scale_range, "Log-scale bin range (covers [-r, r])")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Region-correspondence toolkit: synthetic benchmarks, trainable matching, flow and metrics"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value config file");
    app.allow_config_extras(CLI::config_extras_mode::error);

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic warped-pair dataset");
    synth->add_option("--out", synth_args.out, "Output dataset directory")->required();
    synth->add_option("--pairs", synth_args.pairs, "Total number of pairs")->capture_default_str();
    synth->add_option("--split-train", synth_args.split_train, "Train split fraction")->capture_default_str();
    synth->add_option("--split-val", synth_args.split_val, "Validation split fraction")->capture_default_str();
    synth->add_option("--split-test", synth_args.split_test, "Test split fraction")->capture_default_str();
    synth->add_option("--warp", synth_args.warp, "Warp preset: identity, moderate, hard")
        ->capture_default_str();
    synth_args.rot_opt = synth->add_option("--rot-max", synth_args.cfg.rotation_max_deg,
                                           "Max |rotation| in degrees")->capture_default_str();
    synth_args.smin_opt =
        synth->add_option("--scale-min", synth_args.cfg.scale_min, "Min scale factor")->capture_default_str();
    synth_args.smax_opt =
        synth->add_option("--scale-max", synth_args.cfg.scale_max, "Max scale factor")->capture_default_str();
    synth_args.trans_opt = synth->add_option("--trans-frac", synth_args.cfg.translation_frac,
                                             "Max |translation| as an image fraction")->capture_default_str();
    synth->add_option("--grid-h", synth_args.cfg.grid_h, "Grid height (cells)")->capture_default_str();
    synth->add_option("--grid-w", synth_args.cfg.grid_w, "Grid width (cells)")->capture_default_str();
    synth->add_option("--channels", synth_args.cfg.channels, "Feature channels")->capture_default_str();
    synth->add_option("--cell-size", synth_args.cell_size, "Pixels per cell, N or N/D")->capture_default_str();
    synth->add_option("--gt", synth_args.cfg.n_gt, "Ground-truth boxes per pair")->capture_default_str();
    synth->add_option("--jitter", synth_args.cfg.n_jitter, "Jittered copies per ground-truth target")
        ->capture_default_str();
    synth->add_option("--proposals", synth_args.cfg.n_proposals, "Proposals per side")->capture_default_str();
    synth->add_option("--keypoints", synth_args.cfg.n_keypoints, "Keypoint pairs per pair")
        ->capture_default_str();
    synth->add_option("--smooth-radius", synth_args.cfg.smooth_radius, "Feature box-filter radius")
        ->capture_default_str();
    synth->add_option("--box-min", synth_args.cfg.box_min, "Min ground-truth box side (px)")
        ->capture_default_str();
    synth->add_option("--box-max", synth_args.cfg.box_max, "Max ground-truth box side (px)")
        ->capture_default_str();
    synth->add_option("--seed", synth_args.cfg.seed, "Master seed")->capture_default_str();

    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "Train embedding parameters on a dataset split");
    train_cmd->add_option("--data", train_args.data, "Dataset split directory (contains pair_*)")->required();
    train_cmd->add_option("--out", train_args.out, "Output checkpoint path")->required();
    train_cmd->add_option("--loss-log", train_args.loss_log, "Loss log CSV path (default <out>.loss.csv)");
    train_cmd->add_option("--mode", train_args.mode, "Score mode: A, AG or AG+")->capture_default_str();
    train_cmd->add_option("--epochs", train_args.cfg.epochs, "Training epochs")->capture_default_str();
    train_cmd->add_option("--lr", train_args.cfg.learning_rate, "Learning rate")->capture_default_str();
    train_cmd->add_option("--weight-decay", train_args.cfg.weight_decay, "L2 weight decay")
        ->capture_default_str();
    train_cmd->add_option("--margin-pos", train_args.cfg.margin_pos, "Positive hinge margin")
        ->capture_default_str();
    train_cmd->add_option("--margin-neg", train_args.cfg.margin_neg, "Negative hinge margin")
        ->capture_default_str();
    train_cmd->add_flag("--bin-normalize,!--no-bin-normalize", train_args.cfg.bin_normalize,
                        "Normalize scores by bin size inside the loss")
        ->capture_default_str();
    train_cmd->add_option("--t-pos", train_args.cfg.sampling.t_pos, "Positive IoU threshold")
        ->capture_default_str();
    train_cmd->add_option("--t-neg", train_args.cfg.sampling.t_neg, "Negative IoU threshold")
        ->capture_default_str();
    train_cmd->add_option("--pool", train_args.cfg.pool_resolution, "ROI pooling resolution")
        ->capture_default_str();
    train_cmd->add_option("--embed-dim", train_args.cfg.embed_dim, "Embedding dimension")
        ->capture_default_str();
    train_cmd->add_option("--prefilter-k", train_args.cfg.prefilter_k,
                          "Keep only the top-k candidates per source by appearance (0 = all)")
        ->capture_default_str();
    add_bin_grid_flags(train_cmd, train_args.cfg.bin_grid);
    train_cmd->add_option("--seed", train_args.cfg.seed, "Master seed")->capture_default_str();
    train_cmd->add_option("--threads", train_args.cfg.threads, "Worker thread cap")->capture_default_str();

    MatchArgs match_args;
    CLI::App* match_cmd = app.add_subcommand("match", "Dump best matches for one pair as CSV");
    match_cmd->add_option("--pair", match_args.pair_dir, "Pair directory")->required();
    match_cmd->add_option("--ckpt", match_args.ckpt, "Checkpoint path")->required();
    match_cmd->add_option("--out", match_args.out, "Output CSV path")->required();
    match_cmd->add_option("--mode", match_args.mode, "Score mode (default: checkpoint mode)");
    match_cmd->add_flag("--all", match_args.all, "Dump every candidate match instead of the best ones");
    match_cmd->add_option("--pool", match_args.pool, "ROI pooling resolution")->capture_default_str();
    match_cmd->add_option("--prefilter-k", match_args.prefilter_k,
                          "Keep only the top-k candidates per source by appearance (0 = all)")
        ->capture_default_str();
    add_bin_grid_flags(match_cmd, match_args.grid);
    match_cmd->add_option("--threads", match_args.threads, "Worker thread cap")->capture_default_str();

    MatchArgs flow_args;
    CLI::App* flow_cmd = app.add_subcommand("flow", "Densify best matches into a flow field file");
    flow_cmd->add_option("--pair", flow_args.pair_dir, "Pair directory")->required();
    flow_cmd->add_option("--ckpt", flow_args.ckpt, "Checkpoint path")->required();
    flow_cmd->add_option("--out", flow_args.out, "Output flow file path")->required();
    flow_cmd->add_option("--mode", flow_args.mode, "Score mode (default: checkpoint mode)");
    flow_cmd->add_option("--pool", flow_args.pool, "ROI pooling resolution")->capture_default_str();
    flow_cmd->add_option("--prefilter-k", flow_args.prefilter_k,
                          "Keep only the top-k candidates per source by appearance (0 = all)")
        ->capture_default_str();
    add_bin_grid_flags(flow_cmd, flow_args.grid);
    flow_cmd->add_option("--threads", flow_args.threads, "Worker thread cap")->capture_default_str();

    EvalArgs eval_args;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
    eval_cmd->add_option("--data", eval_args.data, "Dataset split directory")->required();
    eval_cmd->add_option("--ckpt", eval_args.ckpt, "Checkpoint path")->required();
    eval_cmd->add_option("--out", eval_args.out, "Output report directory")->required();
    eval_cmd->add_option("--mode", eval_args.mode, "Score mode (default: checkpoint mode)");
    eval_cmd->add_option("--proposal-kind", eval_args.proposal_kind,
                         "dataset, gt_jitter, sliding_window or uniform_random")
        ->capture_default_str();
    eval_cmd->add_option("--proposal-count", eval_args.proposal_count,
                         "Proposals per side for regenerated kinds")
        ->capture_default_str();
    eval_cmd->add_option("--miou-k", eval_args.miou_k, "Largest k for mIoU@k")->capture_default_str();
    eval_cmd->add_option("--tau-points", eval_args.tau_points, "Points on the tau grid")
        ->capture_default_str();
    eval_cmd->add_option("--pool", eval_args.pool, "ROI pooling resolution")->capture_default_str();
    eval_cmd->add_option("--prefilter-k", eval_args.prefilter_k,
                         "Keep only the top-k candidates per source by appearance (0 = all)")
        ->capture_default_str();
    add_bin_grid_flags(eval_cmd, eval_args.grid);
    eval_cmd->add_option("--seed", eval_args.seed, "Master seed (proposal regeneration)")
        ->capture_default_str();
    eval_cmd->add_option("--threads", eval_args.threads, "Worker thread cap")->capture_default_str();

    BenchArgs bench_args;
    CLI::App* bench_cmd = app.add_subcommand("bench", "Time sparse vs dense scoring");
    bench_cmd->add_option("--out", bench_args.out, "Output timing CSV path")->required();
    bench_cmd->add_option("--n-list", bench_args.n_list, "Match counts to time")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_option("--dense-cap", bench_args.dense_cap, "Skip the dense oracle above this n")
        ->capture_default_str();
    bench_cmd->add_option("--bins", bench_args.n_bins, "Distinct offset bins in the synthetic instance")
        ->capture_default_str();
    bench_cmd->add_option("--seed", bench_args.seed, "Master seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (synth->parsed()) return run_synth(synth_args, synth);
        if (train_cmd->parsed()) return run_train(train_args, train_cmd);
        if (match_cmd->parsed()) return run_match(match_args, match_cmd);
        if (flow_cmd->parsed()) return run_flow(flow_args, flow_cmd);
        if (eval_cmd->parsed()) return run_eval(eval_args, eval_cmd);
        if (bench_cmd->parsed()) return run_bench(bench_args, bench_cmd);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    }
    return 0;
}
