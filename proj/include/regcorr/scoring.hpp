#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "regcorr/embedding.hpp"
#include "regcorr/geometry.hpp"

namespace regcorr {

enum class MatchLabel : int { Unlabeled = -1, Negative = 0, Positive = 1 };

// One candidate pairing of a source and a target proposal, with its cached
// geometry and similarities. f and f_g are rectified cosines in [0, 1].
struct Match {
    int src = 0, tgt = 0;
    Offset offset;
    OffsetBin bin;
    double f = 0, f_g = 0, z = 0;
    MatchLabel label = MatchLabel::Unlabeled;
};

// All candidate matches between two proposal sets plus the offset-bin index.
// The bin index partitions exactly the contained matches; member lists keep
// insertion (match index) order so dense and sparse summation orders agree.
struct MatchSet {
    std::vector<Box> props_a, props_b;
    ImageSize size_a, size_b;
    BinGrid grid;
    std::vector<Match> matches;
    std::map<OffsetBin, std::vector<int>> bins;

    int bin_size_of(int match_idx) const;
    void set_scores(std::span<const double> z);
};

// Builds the dense candidate set (every source x target pair) with offsets,
// bins and the bin index. Similarities are filled separately.
MatchSet build_match_set(std::vector<Box> props_a, std::vector<Box> props_b, ImageSize size_a,
                         ImageSize size_b, const BinGrid& grid);

// Builds a MatchSet from externally supplied similarities and bin
// assignments (one synthetic match per entry). Used for voting with
// precomputed appearance probabilities and for benchmarks.
MatchSet match_set_from_values(std::span<const double> f, std::span<const OffsetBin> bins);

// Fills f (and f_g when the geometry descriptors are given) from
// descriptors indexed by the proposal ids. Parallel over matches.
void set_similarities(MatchSet& ms, std::span<const Descriptor> desc_a, std::span<const Descriptor> desc_b,
                      std::span<const Descriptor> desc_ga = {}, std::span<const Descriptor> desc_gb = {},
                      int threads = 1);

// Keeps, per source proposal, only the top_k candidates by appearance
// similarity (ties to the lower target index) and rebuilds the bin index.
// The supporting set for voting shrinks accordingly. Off by default in the
// pipeline; meant for very large proposal sets.
MatchSet prefilter_top_k(const MatchSet& ms, int top_k);

// O(n^2) brute-force score: z(m) = f(m) * sum_m' K_mm' * f(m'), the sum
// including m' = m. Mode A returns f; AG+ votes with f_g. Serves as the
// oracle for the sparse path.
std::vector<double> score_dense(const MatchSet& ms, ScoreMode mode);

// O(n) bin-shared score: one vote sum per non-empty bin, shared across the
// bin's matches. Bit-identical to score_dense (same summation order).
std::vector<double> score_sparse(const MatchSet& ms, ScoreMode mode);

// Per-bin vote sums (sum of f, or f_g in AG+, over the bin's members, in
// insertion order), keyed like ms.bins.
std::map<OffsetBin, double> bin_vote_sums(const MatchSet& ms, ScoreMode mode);

// Everything the backward pass needs about the forward pass: pooled raw
// features (row-major p x d_in) and the embedded descriptors per side.
struct ScoreBackwardInputs {
    std::span<const double> raw_a, raw_b;
    std::span<const Descriptor> desc_a, desc_b;
    std::span<const Descriptor> desc_ga, desc_gb;
    const EmbeddingParams* params = nullptr;
};

struct ScoreGradient {
    std::vector<double> d_w_a;
    std::vector<double> d_w_g;  // empty unless AG+

    void add_scaled(const ScoreGradient& other, double scale);
};

// Gradient of sum_m dz(m) * z(m) with respect to the embedding parameters,
// accumulated per offset bin so no n^2 term is ever materialized.
ScoreGradient score_gradient(const MatchSet& ms, ScoreMode mode, std::span<const double> dz,
                             const ScoreBackwardInputs& inputs, int threads = 1);

// Per-source argmax over stored z scores; ties resolved to the lowest
// target index. Result is sorted by score descending (then source, target
// ascending). Throws std::invalid_argument on an empty target set.
struct BestMatch {
    int src = 0, tgt = 0;
    double z = 0;
    int match_idx = 0;
};
std::vector<BestMatch> best_matches(const MatchSet& ms);

// Match dump: `src_idx,tgt_idx,f,fg,z,bin_itx,bin_ity,bin_isx,bin_isy,label`
// with label -1 for unlabeled rows.
void save_matches_csv(const std::string& path, const MatchSet& ms, std::span<const int> subset = {});

}  // namespace regcorr
