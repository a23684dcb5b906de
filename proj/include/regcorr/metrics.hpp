#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "regcorr/flow.hpp"
#include "regcorr/geometry.hpp"

namespace regcorr {

// Fraction of keypoints whose warped position lies within
// tau * diagonal(target image) of the annotated target (<= comparison).
double pck(const FlowField& flow, std::span<const std::array<double, 4>> keypoints, const ImageSize& size_b,
           double tau);

// Region assignment with its ground-truth correspondent.
struct RegionAssignment {
    Box predicted, truth;
};

// Fraction of regions with 1 - IoU(predicted, truth) strictly below tau.
double pcr(std::span<const RegionAssignment> assignments, double tau);

struct ScoredOverlap {
    double score = 0;
    double overlap = 0;  // IoU vs ground truth
};

// Mean IoU of the k highest-score entries (all of them when k exceeds the
// list). Sorting is internal; ties keep input order.
double miou_at_k(std::span<const ScoredOverlap> items, int k);

// Trapezoidal area under a curve sampled on a uniform grid over [0, 1].
double auc(std::span<const double> curve);

// Uniform tau grid with n points covering [0, 1].
std::vector<double> tau_grid(int n = 101);

// Per-pair curves; dataset metrics are unweighted means over pairs.
struct PairEval {
    std::string name;
    std::vector<double> pck_curve, pcr_curve;
    std::vector<double> miou;  // index k-1 = mIoU@k
};

struct EvalReport {
    std::vector<double> taus;
    std::vector<double> pck_curve, pcr_curve;
    std::vector<double> miou;
    double auc_pcr = 0;
    std::vector<PairEval> pairs;
};

EvalReport aggregate_evals(std::vector<PairEval> pairs, std::vector<double> taus);

// Curve CSV `tau,pcr,pck`; summary CSV `metric,value`; mIoU CSV `k,miou`;
// per-pair CSV `pair,pck_at_0.1,pcr_auc`.
void save_curve_csv(const std::string& path, const EvalReport& report);
void save_summary_csv(const std::string& path, const EvalReport& report);
void save_miou_csv(const std::string& path, const EvalReport& report);
void save_per_pair_csv(const std::string& path, const EvalReport& report);

// Curve value at the grid point nearest to tau.
double curve_at(const EvalReport& report, const std::vector<double>& curve, double tau);

}  // namespace regcorr
