#include "regcorr/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "regcorr/detail/csv.hpp"
#include "regcorr/detail/parallel.hpp"

namespace regcorr {

namespace {
constexpr std::int64_t kMatchBlock = 4096;
constexpr std::int64_t kRowBlock = 16;
}  // namespace

int MatchSet::bin_size_of(int match_idx) const {
    const auto it = bins.find(matches[static_cast<std::size_t>(match_idx)].bin);
    return it == bins.end() ? 0 : static_cast<int>(it->second.size());
}

void MatchSet::set_scores(std::span<const double> z) {
    if (z.size() != matches.size()) throw std::invalid_argument("set_scores: size mismatch");
    for (std::size_t i = 0; i < z.size(); ++i) matches[i].z = z[i];
}

MatchSet build_match_set(std::vector<Box> props_a, std::vector<Box> props_b, ImageSize size_a,
                         ImageSize size_b, const BinGrid& grid) {
    grid.validate();
    if (!size_a.valid() || !size_b.valid()) throw std::invalid_argument("build_match_set: invalid image size");
    MatchSet ms;
    ms.props_a = std::move(props_a);
    ms.props_b = std::move(props_b);
    ms.size_a = size_a;
    ms.size_b = size_b;
    ms.grid = grid;
    ms.matches.reserve(ms.props_a.size() * ms.props_b.size());
    for (std::size_t i = 0; i < ms.props_a.size(); ++i) {
        for (std::size_t j = 0; j < ms.props_b.size(); ++j) {
            Match m;
            m.src = static_cast<int>(i);
            m.tgt = static_cast<int>(j);
            m.offset = offset_between(ms.props_a[i], ms.props_b[j], size_a, size_b);
            m.bin = assign_bin(m.offset, grid);
            ms.matches.push_back(m);
        }
    }
    for (std::size_t k = 0; k < ms.matches.size(); ++k)
        ms.bins[ms.matches[k].bin].push_back(static_cast<int>(k));
    return ms;
}

MatchSet match_set_from_values(std::span<const double> f, std::span<const OffsetBin> bins) {
    if (f.size() != bins.size()) throw std::invalid_argument("match_set_from_values: size mismatch");
    MatchSet ms;
    ms.size_a = {1, 1};
    ms.size_b = {1, 1};
    ms.matches.resize(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (!(f[k] >= 0) || !std::isfinite(f[k]))
            throw std::invalid_argument("match_set_from_values: similarities must be finite and >= 0");
        Match& m = ms.matches[k];
        m.src = static_cast<int>(k);
        m.tgt = 0;
        m.f = f[k];
        m.bin = bins[k];
        ms.bins[m.bin].push_back(static_cast<int>(k));
    }
    return ms;
}

void set_similarities(MatchSet& ms, std::span<const Descriptor> desc_a, std::span<const Descriptor> desc_b,
                      std::span<const Descriptor> desc_ga, std::span<const Descriptor> desc_gb, int threads) {
    if (desc_a.size() != ms.props_a.size() || desc_b.size() != ms.props_b.size())
        throw std::invalid_argument("set_similarities: descriptor count mismatch");
    const bool with_g = !desc_ga.empty() || !desc_gb.empty();
    if (with_g && (desc_ga.size() != ms.props_a.size() || desc_gb.size() != ms.props_b.size()))
        throw std::invalid_argument("set_similarities: geometry descriptor count mismatch");

    detail::parallel_blocks(static_cast<std::int64_t>(ms.matches.size()), kMatchBlock, threads,
                            [&](std::int64_t begin, std::int64_t end) {
                                for (std::int64_t k = begin; k < end; ++k) {
                                    Match& m = ms.matches[static_cast<std::size_t>(k)];
                                    m.f = similarity(desc_a[static_cast<std::size_t>(m.src)],
                                                     desc_b[static_cast<std::size_t>(m.tgt)]);
                                    if (with_g)
                                        m.f_g = similarity(desc_ga[static_cast<std::size_t>(m.src)],
                                                           desc_gb[static_cast<std::size_t>(m.tgt)]);
                                }
                            });
}

std::vector<double> score_dense(const MatchSet& ms, ScoreMode mode) {
    const std::size_t n = ms.matches.size();
    std::vector<double> z(n);
    if (mode == ScoreMode::A) {
        for (std::size_t k = 0; k < n; ++k) z[k] = ms.matches[k].f;
        return z;
    }
    const bool plus = mode == ScoreMode::AGPlus;
    for (std::size_t k = 0; k < n; ++k) {
        const Match& m = ms.matches[k];
        double votes = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const Match& m2 = ms.matches[j];
            if (kernel_entry(m.bin, m2.bin)) votes += plus ? m2.f_g : m2.f;
        }
        z[k] = m.f * votes;
    }
    return z;
}

std::map<OffsetBin, double> bin_vote_sums(const MatchSet& ms, ScoreMode mode) {
    const bool plus = mode == ScoreMode::AGPlus;
    std::map<OffsetBin, double> sums;
    for (const auto& [bin, members] : ms.bins) {
        double s = 0;
        for (int k : members) {
            const Match& m = ms.matches[static_cast<std::size_t>(k)];
            s += plus ? m.f_g : m.f;
        }
        sums[bin] = s;
    }
    return sums;
}

std::vector<double> score_sparse(const MatchSet& ms, ScoreMode mode) {
    const std::size_t n = ms.matches.size();
    std::vector<double> z(n);
    if (mode == ScoreMode::A) {
        for (std::size_t k = 0; k < n; ++k) z[k] = ms.matches[k].f;
        return z;
    }
    const auto sums = bin_vote_sums(ms, mode);
    for (const auto& [bin, members] : ms.bins) {
        const double s = sums.at(bin);
        for (int k : members) z[static_cast<std::size_t>(k)] = ms.matches[static_cast<std::size_t>(k)].f * s;
    }
    return z;
}

MatchSet prefilter_top_k(const MatchSet& ms, int top_k) {
    if (top_k < 1) throw std::invalid_argument("prefilter_top_k: top_k must be >= 1");
    std::vector<std::vector<int>> by_src(ms.props_a.size());
    for (std::size_t k = 0; k < ms.matches.size(); ++k)
        by_src[static_cast<std::size_t>(ms.matches[k].src)].push_back(static_cast<int>(k));

    std::vector<int> kept;
    for (auto& candidates : by_src) {
        std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
            const Match& ma = ms.matches[static_cast<std::size_t>(a)];
            const Match& mb = ms.matches[static_cast<std::size_t>(b)];
            if (ma.f != mb.f) return ma.f > mb.f;
            return ma.tgt < mb.tgt;
        });
        if (static_cast<int>(candidates.size()) > top_k) candidates.resize(static_cast<std::size_t>(top_k));
        kept.insert(kept.end(), candidates.begin(), candidates.end());
    }
    // Original index order keeps summation deterministic.
    std::sort(kept.begin(), kept.end());

    MatchSet out;
    out.props_a = ms.props_a;
    out.props_b = ms.props_b;
    out.size_a = ms.size_a;
    out.size_b = ms.size_b;
    out.grid = ms.grid;
    out.matches.reserve(kept.size());
    for (int k : kept) out.matches.push_back(ms.matches[static_cast<std::size_t>(k)]);
    for (std::size_t k = 0; k < out.matches.size(); ++k)
        out.bins[out.matches[k].bin].push_back(static_cast<int>(k));
    return out;
}

void ScoreGradient::add_scaled(const ScoreGradient& other, double scale) {
    if (d_w_a.size() != other.d_w_a.size() || d_w_g.size() != other.d_w_g.size())
        throw std::invalid_argument("ScoreGradient: shape mismatch");
    for (std::size_t i = 0; i < d_w_a.size(); ++i) d_w_a[i] += scale * other.d_w_a[i];
    for (std::size_t i = 0; i < d_w_g.size(); ++i) d_w_g[i] += scale * other.d_w_g[i];
}

namespace {

// Accumulates coeff * d(similarity)/d(projection) for one match into the
// per-proposal gradient buffers. No-op where the rectifier clips or either
// descriptor is zero.
inline void accumulate_pair_grad(const Descriptor& da, const Descriptor& db, double coeff,
                                 double* g_a, double* g_b, int d_out) {
    if (coeff == 0.0 || da.is_zero || db.is_zero) return;
    double dot = 0;
    for (int j = 0; j < d_out; ++j) dot += da.v[static_cast<std::size_t>(j)] * db.v[static_cast<std::size_t>(j)];
    if (dot <= 0) return;
    const double inv_a = coeff / da.pre_norm;
    const double inv_b = coeff / db.pre_norm;
    for (int j = 0; j < d_out; ++j) {
        const auto k = static_cast<std::size_t>(j);
        g_a[j] += (db.v[k] - dot * da.v[k]) * inv_a;
        g_b[j] += (da.v[k] - dot * db.v[k]) * inv_b;
    }
}

// d_w += raw^T * g, with raw p x d_in and g p x d_out. Parallel over d_in
// rows; per-row accumulation order is fixed, so results do not depend on
// the thread count.
void accumulate_outer(std::span<const double> raw, const std::vector<double>& g, std::size_t p, int d_in,
                      int d_out, int threads, std::vector<double>& d_w) {
    detail::parallel_blocks(d_in, kRowBlock, threads, [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t i = begin; i < end; ++i) {
            double* out = &d_w[static_cast<std::size_t>(i) * d_out];
            for (std::size_t r = 0; r < p; ++r) {
                const double x = raw[r * static_cast<std::size_t>(d_in) + static_cast<std::size_t>(i)];
                if (x == 0.0) continue;
                const double* gr = &g[r * static_cast<std::size_t>(d_out)];
                for (int j = 0; j < d_out; ++j) out[j] += x * gr[j];
            }
        }
    });
}

}  // namespace

ScoreGradient score_gradient(const MatchSet& ms, ScoreMode mode, std::span<const double> dz,
                             const ScoreBackwardInputs& inputs, int threads) {
    if (dz.size() != ms.matches.size()) throw std::invalid_argument("score_gradient: dz size mismatch");
    if (!inputs.params) throw std::invalid_argument("score_gradient: missing parameters");
    const EmbeddingParams& params = *inputs.params;
    const int d_in = params.d_in;
    const int d_out = params.d_out;
    const std::size_t p_a = ms.props_a.size();
    const std::size_t p_b = ms.props_b.size();
    const bool plus = mode == ScoreMode::AGPlus;

    ScoreGradient grad;
    grad.d_w_a.assign(static_cast<std::size_t>(d_in) * d_out, 0.0);
    if (plus) grad.d_w_g.assign(static_cast<std::size_t>(d_in) * d_out, 0.0);

    // Upstream coefficient per match for the appearance similarity, and for
    // the voted similarity (f in AG, f_g in AG+):
    //   d/df(m)   = dz(m) * S(h(m))            [+ T(h(m)) when votes use f]
    //   d/dfg(m)  = T(h(m))                     (AG+ only)
    // with S(x) the bin vote sum and T(x) = sum_{m in B_x} dz(m) * f(m).
    const std::size_t n = ms.matches.size();
    std::vector<double> coeff_a(n, 0.0), coeff_g;
    if (plus) coeff_g.assign(n, 0.0);

    if (mode == ScoreMode::A) {
        for (std::size_t k = 0; k < n; ++k) coeff_a[k] = dz[k];
    } else {
        const auto sums = bin_vote_sums(ms, mode);
        for (const auto& [bin, members] : ms.bins) {
            const double s = sums.at(bin);
            double t = 0;
            for (int k : members) t += dz[static_cast<std::size_t>(k)] * ms.matches[static_cast<std::size_t>(k)].f;
            for (int k : members) {
                const auto kk = static_cast<std::size_t>(k);
                if (plus) {
                    coeff_a[kk] = dz[kk] * s;
                    coeff_g[kk] = t;
                } else {
                    coeff_a[kk] = dz[kk] * s + t;
                }
            }
        }
    }

    // Per-proposal projection gradients, then one outer product per side.
    std::vector<double> g_a(p_a * static_cast<std::size_t>(d_out), 0.0);
    std::vector<double> g_b(p_b * static_cast<std::size_t>(d_out), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (coeff_a[k] == 0.0) continue;
        const Match& m = ms.matches[k];
        accumulate_pair_grad(inputs.desc_a[static_cast<std::size_t>(m.src)],
                             inputs.desc_b[static_cast<std::size_t>(m.tgt)], coeff_a[k],
                             &g_a[static_cast<std::size_t>(m.src) * d_out],
                             &g_b[static_cast<std::size_t>(m.tgt) * d_out], d_out);
    }
    accumulate_outer(inputs.raw_a, g_a, p_a, d_in, d_out, threads, grad.d_w_a);
    accumulate_outer(inputs.raw_b, g_b, p_b, d_in, d_out, threads, grad.d_w_a);

    if (plus) {
        std::vector<double> gg_a(p_a * static_cast<std::size_t>(d_out), 0.0);
        std::vector<double> gg_b(p_b * static_cast<std::size_t>(d_out), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            if (coeff_g[k] == 0.0) continue;
            const Match& m = ms.matches[k];
            accumulate_pair_grad(inputs.desc_ga[static_cast<std::size_t>(m.src)],
                                 inputs.desc_gb[static_cast<std::size_t>(m.tgt)], coeff_g[k],
                                 &gg_a[static_cast<std::size_t>(m.src) * d_out],
                                 &gg_b[static_cast<std::size_t>(m.tgt) * d_out], d_out);
        }
        accumulate_outer(inputs.raw_a, gg_a, p_a, d_in, d_out, threads, grad.d_w_g);
        accumulate_outer(inputs.raw_b, gg_b, p_b, d_in, d_out, threads, grad.d_w_g);
    }
    return grad;
}

std::vector<BestMatch> best_matches(const MatchSet& ms) {
    if (ms.props_b.empty()) throw std::invalid_argument("best_matches: empty target set");
    std::vector<int> best_for_src(ms.props_a.size(), -1);
    for (std::size_t k = 0; k < ms.matches.size(); ++k) {
        const Match& m = ms.matches[k];
        int& cur = best_for_src[static_cast<std::size_t>(m.src)];
        if (cur < 0) {
            cur = static_cast<int>(k);
            continue;
        }
        const Match& c = ms.matches[static_cast<std::size_t>(cur)];
        if (m.z > c.z || (m.z == c.z && m.tgt < c.tgt)) cur = static_cast<int>(k);
    }
    std::vector<BestMatch> out;
    out.reserve(ms.props_a.size());
    for (int idx : best_for_src) {
        if (idx < 0) continue;
        const Match& m = ms.matches[static_cast<std::size_t>(idx)];
        out.push_back({m.src, m.tgt, m.z, idx});
    }
    std::sort(out.begin(), out.end(), [](const BestMatch& a, const BestMatch& b) {
        if (a.z != b.z) return a.z > b.z;
        if (a.src != b.src) return a.src < b.src;
        return a.tgt < b.tgt;
    });
    return out;
}

void save_matches_csv(const std::string& path, const MatchSet& ms, std::span<const int> subset) {
    std::string out = "src_idx,tgt_idx,f,fg,z,bin_itx,bin_ity,bin_isx,bin_isy,label\n";
    auto emit = [&](const Match& m) {
        out += std::to_string(m.src);
        out += ',';
        out += std::to_string(m.tgt);
        out += ',';
        out += detail::format_double(m.f);
        out += ',';
        out += detail::format_double(m.f_g);
        out += ',';
        out += detail::format_double(m.z);
        out += ',';
        out += std::to_string(m.bin.itx);
        out += ',';
        out += std::to_string(m.bin.ity);
        out += ',';
        out += std::to_string(m.bin.isx);
        out += ',';
        out += std::to_string(m.bin.isy);
        out += ',';
        out += std::to_string(static_cast<int>(m.label));
        out += '\n';
    };
    if (subset.empty()) {
        for (const Match& m : ms.matches) emit(m);
    } else {
        for (int k : subset) emit(ms.matches.at(static_cast<std::size_t>(k)));
    }
    detail::write_text_file(path, out);
}

}  // namespace regcorr
