#pragma once

#include <span>
#include <string>
#include <vector>

#include "regcorr/rng.hpp"

namespace regcorr {

// Score variants: appearance only (A), appearance with offset-bin voting
// (AG), and voting through a second, separately embedded similarity (AG+).
enum class ScoreMode { A, AG, AGPlus };

std::string score_mode_name(ScoreMode mode);
ScoreMode score_mode_from_name(const std::string& name);

// Trainable linear projections, row-major d_in x d_out. w_g is present only
// in AG+ mode, where the geometry term uses its own embedding.
struct EmbeddingParams {
    ScoreMode mode = ScoreMode::A;
    int d_in = 0, d_out = 0;
    std::vector<double> w_a;
    std::vector<double> w_g;

    void validate() const;
};

// Entries i.i.d. uniform in [-1/sqrt(d_in), +1/sqrt(d_in)].
EmbeddingParams init_params(int d_in, int d_out, ScoreMode mode, Rng& rng);

// Unit-normalized embedded vector. A numerically zero pre-normalization
// vector yields v = 0 with is_zero set instead of an error; its similarity
// and gradients are zero.
struct Descriptor {
    std::vector<double> v;
    double pre_norm = 0;
    bool is_zero = false;
};

// v = W^T raw, L2-normalized. Throws std::invalid_argument on dimension
// mismatch.
Descriptor embed(std::span<const double> raw, std::span<const double> w, int d_in, int d_out);

// Rectified cosine similarity max(0, a . b), in [0, 1].
double similarity(const Descriptor& a, const Descriptor& b);

struct SimilarityGrads {
    std::vector<double> d_w;      // d_in x d_out
    std::vector<double> d_raw_a;  // d_in
    std::vector<double> d_raw_b;  // d_in
};

// Exact chain rule for upstream * similarity(embed(raw_a, W), embed(raw_b, W))
// through projection, normalization, dot product and rectifier. Where the
// rectifier clips (dot <= 0) all gradients are exactly zero; the subgradient
// at the kink is fixed to 0.
SimilarityGrads similarity_backward(std::span<const double> raw_a, std::span<const double> raw_b,
                                    std::span<const double> w, int d_in, int d_out, double upstream);

// Parameter checkpoint: magic "SCNW", version u8 = 1, mode tag u8
// (0 = A, 1 = AG, 2 = AG+), d_in, d_out little-endian u32, then w_a (and
// w_g for AG+) as little-endian 64-bit floats, row-major.
void save_checkpoint(const std::string& path, const EmbeddingParams& params);
EmbeddingParams load_checkpoint(const std::string& path);

}  // namespace regcorr
