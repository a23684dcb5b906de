#include "regcorr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "regcorr/detail/csv.hpp"

namespace regcorr {

double pck(const FlowField& flow, std::span<const std::array<double, 4>> keypoints, const ImageSize& size_b,
           double tau) {
    if (keypoints.empty()) throw std::invalid_argument("pck: need at least one keypoint pair");
    if (!size_b.valid()) throw std::invalid_argument("pck: invalid target image size");
    const double diag = size_b.diagonal();
    std::size_t correct = 0;
    for (const auto& kp : keypoints) {
        const auto warped = warp_keypoint(flow, kp[0], kp[1]);
        const double dx = warped[0] - kp[2];
        const double dy = warped[1] - kp[3];
        if (std::sqrt(dx * dx + dy * dy) / diag <= tau) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(keypoints.size());
}

double pcr(std::span<const RegionAssignment> assignments, double tau) {
    if (assignments.empty()) throw std::invalid_argument("pcr: empty assignment list");
    std::size_t correct = 0;
    for (const auto& a : assignments)
        if (1.0 - iou(a.predicted, a.truth) < tau) ++correct;
    return static_cast<double>(correct) / static_cast<double>(assignments.size());
}

double miou_at_k(std::span<const ScoredOverlap> items, int k) {
    if (k < 1) throw std::invalid_argument("miou_at_k: k must be >= 1");
    if (items.empty()) throw std::invalid_argument("miou_at_k: empty list");
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return items[a].score > items[b].score; });
    const std::size_t take = std::min(static_cast<std::size_t>(k), items.size());
    double sum = 0;
    for (std::size_t i = 0; i < take; ++i) sum += items[order[i]].overlap;
    return sum / static_cast<double>(take);
}

double auc(std::span<const double> curve) {
    if (curve.size() < 2) throw std::invalid_argument("auc: need at least two samples");
    const double step = 1.0 / static_cast<double>(curve.size() - 1);
    double area = 0;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) area += 0.5 * (curve[i] + curve[i + 1]) * step;
    return area;
}

std::vector<double> tau_grid(int n) {
    if (n < 2) throw std::invalid_argument("tau_grid: need at least two points");
    std::vector<double> taus(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) taus[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
    return taus;
}

EvalReport aggregate_evals(std::vector<PairEval> pairs, std::vector<double> taus) {
    if (pairs.empty()) throw std::invalid_argument("aggregate_evals: no pairs");
    EvalReport report;
    report.taus = std::move(taus);
    const std::size_t nt = report.taus.size();
    std::size_t max_k = 0;
    for (const PairEval& p : pairs) {
        if (p.pck_curve.size() != nt || p.pcr_curve.size() != nt)
            throw std::invalid_argument("aggregate_evals: curve length mismatch");
        max_k = std::max(max_k, p.miou.size());
    }

    report.pck_curve.assign(nt, 0.0);
    report.pcr_curve.assign(nt, 0.0);
    for (const PairEval& p : pairs)
        for (std::size_t i = 0; i < nt; ++i) {
            report.pck_curve[i] += p.pck_curve[i];
            report.pcr_curve[i] += p.pcr_curve[i];
        }
    const double inv = 1.0 / static_cast<double>(pairs.size());
    for (std::size_t i = 0; i < nt; ++i) {
        report.pck_curve[i] *= inv;
        report.pcr_curve[i] *= inv;
    }

    report.miou.assign(max_k, 0.0);
    for (std::size_t k = 0; k < max_k; ++k) {
        double sum = 0;
        std::size_t count = 0;
        for (const PairEval& p : pairs)
            if (k < p.miou.size()) {
                sum += p.miou[k];
                ++count;
            }
        report.miou[k] = count ? sum / static_cast<double>(count) : 0.0;
    }

    report.auc_pcr = auc(report.pcr_curve);
    report.pairs = std::move(pairs);
    return report;
}

double curve_at(const EvalReport& report, const std::vector<double>& curve, double tau) {
    if (curve.size() != report.taus.size() || curve.empty())
        throw std::invalid_argument("curve_at: curve does not match the tau grid");
    std::size_t best = 0;
    for (std::size_t i = 1; i < report.taus.size(); ++i)
        if (std::abs(report.taus[i] - tau) < std::abs(report.taus[best] - tau)) best = i;
    return curve[best];
}

void save_curve_csv(const std::string& path, const EvalReport& report) {
    std::string out = "tau,pcr,pck\n";
    for (std::size_t i = 0; i < report.taus.size(); ++i) {
        out += detail::format_double(report.taus[i]);
        out += ',';
        out += detail::format_double(report.pcr_curve[i]);
        out += ',';
        out += detail::format_double(report.pck_curve[i]);
        out += '\n';
    }
    detail::write_text_file(path, out);
}

void save_summary_csv(const std::string& path, const EvalReport& report) {
    std::string out = "metric,value\n";
    auto row = [&](const std::string& name, double v) {
        out += name;
        out += ',';
        out += detail::format_double(v);
        out += '\n';
    };
    row("pck@0.05", curve_at(report, report.pck_curve, 0.05));
    row("pck@0.10", curve_at(report, report.pck_curve, 0.10));
    row("pck@0.15", curve_at(report, report.pck_curve, 0.15));
    row("pcr_auc", report.auc_pcr);
    if (!report.miou.empty()) row("miou@" + std::to_string(report.miou.size()), report.miou.back());
    detail::write_text_file(path, out);
}

void save_miou_csv(const std::string& path, const EvalReport& report) {
    std::string out = "k,miou\n";
    for (std::size_t k = 0; k < report.miou.size(); ++k) {
        out += std::to_string(k + 1);
        out += ',';
        out += detail::format_double(report.miou[k]);
        out += '\n';
    }
    detail::write_text_file(path, out);
}

void save_per_pair_csv(const std::string& path, const EvalReport& report) {
    std::string out = "pair,pck_at_0.1,pcr_auc\n";
    for (const PairEval& p : report.pairs) {
        out += p.name;
        out += ',';
        out += detail::format_double(curve_at(report, p.pck_curve, 0.10));
        out += ',';
        out += detail::format_double(auc(p.pcr_curve));
        out += '\n';
    }
    detail::write_text_file(path, out);
}

}  // namespace regcorr
