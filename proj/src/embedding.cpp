#include "regcorr/embedding.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "regcorr/detail/binio.hpp"

namespace regcorr {

namespace {
// Pre-normalization vectors shorter than this are treated as zero.
constexpr double kZeroNorm = 1e-12;
}  // namespace

std::string score_mode_name(ScoreMode mode) {
    switch (mode) {
        case ScoreMode::A: return "A";
        case ScoreMode::AG: return "AG";
        case ScoreMode::AGPlus: return "AG+";
    }
    return "?";
}

ScoreMode score_mode_from_name(const std::string& name) {
    if (name == "A") return ScoreMode::A;
    if (name == "AG") return ScoreMode::AG;
    if (name == "AG+") return ScoreMode::AGPlus;
    throw std::invalid_argument("unknown score mode '" + name + "' (expected A, AG or AG+)");
}

void EmbeddingParams::validate() const {
    if (d_in < 1 || d_out < 1) throw std::invalid_argument("embedding: dimensions must be >= 1");
    const std::size_t n = static_cast<std::size_t>(d_in) * d_out;
    if (w_a.size() != n) throw std::invalid_argument("embedding: w_a size mismatch");
    if (mode == ScoreMode::AGPlus) {
        if (w_g.size() != n) throw std::invalid_argument("embedding: AG+ requires w_g");
    } else if (!w_g.empty()) {
        throw std::invalid_argument("embedding: w_g present outside AG+ mode");
    }
    for (double v : w_a)
        if (!std::isfinite(v)) throw std::invalid_argument("embedding: non-finite w_a entry");
    for (double v : w_g)
        if (!std::isfinite(v)) throw std::invalid_argument("embedding: non-finite w_g entry");
}

EmbeddingParams init_params(int d_in, int d_out, ScoreMode mode, Rng& rng) {
    if (d_in < 1 || d_out < 1) throw std::invalid_argument("init_params: dimensions must be >= 1");
    EmbeddingParams p;
    p.mode = mode;
    p.d_in = d_in;
    p.d_out = d_out;
    const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
    const std::size_t n = static_cast<std::size_t>(d_in) * d_out;
    p.w_a.resize(n);
    for (double& v : p.w_a) v = rng.uniform(-bound, bound);
    if (mode == ScoreMode::AGPlus) {
        p.w_g.resize(n);
        for (double& v : p.w_g) v = rng.uniform(-bound, bound);
    }
    return p;
}

Descriptor embed(std::span<const double> raw, std::span<const double> w, int d_in, int d_out) {
    if (static_cast<int>(raw.size()) != d_in ||
        w.size() != static_cast<std::size_t>(d_in) * static_cast<std::size_t>(d_out))
        throw std::invalid_argument("embed: dimension mismatch");

    Descriptor d;
    d.v.assign(static_cast<std::size_t>(d_out), 0.0);
    for (int i = 0; i < d_in; ++i) {
        const double x = raw[static_cast<std::size_t>(i)];
        if (x == 0.0) continue;
        const double* row = &w[static_cast<std::size_t>(i) * d_out];
        for (int j = 0; j < d_out; ++j) d.v[static_cast<std::size_t>(j)] += row[j] * x;
    }
    double sq = 0;
    for (double v : d.v) sq += v * v;
    d.pre_norm = std::sqrt(sq);
    if (d.pre_norm < kZeroNorm) {
        d.v.assign(static_cast<std::size_t>(d_out), 0.0);
        d.pre_norm = 0;
        d.is_zero = true;
        return d;
    }
    const double inv = 1.0 / d.pre_norm;
    for (double& v : d.v) v *= inv;
    return d;
}

double similarity(const Descriptor& a, const Descriptor& b) {
    if (a.v.size() != b.v.size()) throw std::invalid_argument("similarity: dimension mismatch");
    if (a.is_zero || b.is_zero) return 0.0;
    double dot = 0;
    for (std::size_t i = 0; i < a.v.size(); ++i) dot += a.v[i] * b.v[i];
    return dot > 0 ? dot : 0.0;
}

SimilarityGrads similarity_backward(std::span<const double> raw_a, std::span<const double> raw_b,
                                    std::span<const double> w, int d_in, int d_out, double upstream) {
    const Descriptor da = embed(raw_a, w, d_in, d_out);
    const Descriptor db = embed(raw_b, w, d_in, d_out);

    SimilarityGrads g;
    g.d_w.assign(static_cast<std::size_t>(d_in) * d_out, 0.0);
    g.d_raw_a.assign(static_cast<std::size_t>(d_in), 0.0);
    g.d_raw_b.assign(static_cast<std::size_t>(d_in), 0.0);

    if (da.is_zero || db.is_zero) return g;
    double dot = 0;
    for (int j = 0; j < d_out; ++j) dot += da.v[static_cast<std::size_t>(j)] * db.v[static_cast<std::size_t>(j)];
    if (dot <= 0) return g;

    // d dot / d p_a = (b_hat - dot * a_hat) / |p_a|, and symmetrically for b.
    std::vector<double> gpa(static_cast<std::size_t>(d_out)), gpb(static_cast<std::size_t>(d_out));
    for (int j = 0; j < d_out; ++j) {
        const auto k = static_cast<std::size_t>(j);
        gpa[k] = upstream * (db.v[k] - dot * da.v[k]) / da.pre_norm;
        gpb[k] = upstream * (da.v[k] - dot * db.v[k]) / db.pre_norm;
    }

    for (int i = 0; i < d_in; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        double* dw_row = &g.d_w[ii * d_out];
        const double* w_row = &w[ii * d_out];
        const double xa = raw_a[ii];
        const double xb = raw_b[ii];
        double dra = 0, drb = 0;
        for (int j = 0; j < d_out; ++j) {
            const auto k = static_cast<std::size_t>(j);
            dw_row[k] += xa * gpa[k] + xb * gpb[k];
            dra += w_row[k] * gpa[k];
            drb += w_row[k] * gpb[k];
        }
        g.d_raw_a[ii] = dra;
        g.d_raw_b[ii] = drb;
    }
    return g;
}

namespace {
constexpr char kMagic[4] = {'S', 'C', 'N', 'W'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint64_t kMaxEntries = 1ull << 26;

std::uint8_t mode_tag(ScoreMode mode) {
    switch (mode) {
        case ScoreMode::A: return 0;
        case ScoreMode::AG: return 1;
        case ScoreMode::AGPlus: return 2;
    }
    return 0;
}
}  // namespace

void save_checkpoint(const std::string& path, const EmbeddingParams& params) {
    params.validate();
    detail::ByteWriter w;
    w.put_bytes(kMagic, 4);
    w.put_u8(kVersion);
    w.put_u8(mode_tag(params.mode));
    w.put_u32(static_cast<std::uint32_t>(params.d_in));
    w.put_u32(static_cast<std::uint32_t>(params.d_out));
    for (double v : params.w_a) w.put_f64(v);
    for (double v : params.w_g) w.put_f64(v);
    detail::write_file_bytes(path, w.bytes());
}

EmbeddingParams load_checkpoint(const std::string& path) {
    detail::ByteReader r(detail::read_file_bytes(path));
    char magic[4];
    r.get_bytes(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("checkpoint: bad magic in " + path, 0);
    if (r.get_u8("version") != kVersion) throw FormatError("checkpoint: unsupported version in " + path, 4);
    const std::uint8_t tag = r.get_u8("mode tag");
    if (tag > 2) throw FormatError("checkpoint: bad mode tag in " + path, 5);

    EmbeddingParams p;
    p.mode = tag == 0 ? ScoreMode::A : tag == 1 ? ScoreMode::AG : ScoreMode::AGPlus;
    const std::uint32_t d_in = r.get_u32("d_in");
    const std::uint32_t d_out = r.get_u32("d_out");
    if (d_in == 0 || d_out == 0) throw FormatError("checkpoint: zero dimension in " + path, 6);
    const std::uint64_t n = static_cast<std::uint64_t>(d_in) * d_out;
    if (n > kMaxEntries) throw FormatError("checkpoint: dimension overflow in " + path, 6);
    p.d_in = static_cast<int>(d_in);
    p.d_out = static_cast<int>(d_out);

    p.w_a.resize(static_cast<std::size_t>(n));
    for (auto& v : p.w_a) {
        const std::uint64_t at = r.offset();
        v = r.get_f64("w_a entry");
        if (!std::isfinite(v)) throw FormatError("checkpoint: non-finite w_a entry in " + path, at);
    }
    if (p.mode == ScoreMode::AGPlus) {
        p.w_g.resize(static_cast<std::size_t>(n));
        for (auto& v : p.w_g) {
            const std::uint64_t at = r.offset();
            v = r.get_f64("w_g entry");
            if (!std::isfinite(v)) throw FormatError("checkpoint: non-finite w_g entry in " + path, at);
        }
    }
    if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes in " + path, r.offset());
    return p;
}

}  // namespace regcorr
