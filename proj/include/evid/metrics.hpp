#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "evid/data.hpp"
#include "evid/opinion.hpp"

namespace evid {

struct EvalReport {
  double eer;            // in [0, 1]; > 0.5 simply reports inverted polarity
  double eer_threshold;  // interpolated score threshold at the crossing
  std::optional<double> min_tdcf;
  int n_bonafide;
  int n_spoof;
};

/// Cost model for the tandem detection cost. The defaults follow the
/// common anti-spoofing evaluation convention (unit costs, priors
/// 0.9405 / 0.0095 / 0.05) with the verification stage fixed at a perfect
/// operating point; every constant is configurable.
struct TdcfCosts {
  double c_miss_cm = 1.0;
  double c_fa_cm = 1.0;
  double c_miss_asv = 1.0;
  double c_fa_asv = 1.0;
  double pi_tar = 0.9405;
  double pi_non = 0.0095;
  double pi_spoof = 0.05;
  // Verification-stage error rates at its fixed operating point.
  double p_miss_asv = 0.0;
  double p_fa_asv = 0.0;
  double p_miss_spoof_asv = 0.0;  // fraction of spoofs the ASV rejects
};

struct CalibrationBin {
  double mean_confidence;
  double accuracy;
  int count;
};

struct CalibrationReport {
  double aece = 0.0;
  std::optional<double> pcc;  // absent when some bin has zero accuracy
  std::vector<CalibrationBin> bins;
  int r_bins = 0;
};

struct UncertaintyGroup {
  double mean_uncertainty;
  double accuracy;
  int count;
};

/// Ten equal-mass groups ordered by increasing uncertainty.
struct UncertaintyBins {
  std::vector<UncertaintyGroup> groups;
};

/// Equal-error rate over a threshold sweep of all distinct scores with
/// +-inf sentinels, linearly interpolating the crossing of
///   FAR(t) = #{spoof scored > t} / n_spoof  and
///   FRR(t) = #{bonafide scored < t} / n_bonafide.
/// Polarity is fixed (higher = more bonafide) and never auto-corrected.
EvalReport compute_eer(const std::vector<ScoreRecord>& records);

/// Normalized minimum t-DCF: decisions are "accept as bonafide iff
/// score > t"; min over t of (C1 P_miss + C2 P_fa) / min(C1, C2).
double compute_min_tdcf(const std::vector<ScoreRecord>& records, const TdcfCosts& costs);

/// Adaptive (equal-mass) calibration error: sort by confidence, split into
/// r_bins bins whose sizes differ by at most one (larger bins first), then
/// average |mean confidence - accuracy|. Ties keep input order.
CalibrationReport compute_aece(const std::vector<double>& confidences,
                               const std::vector<bool>& correct, int r_bins);

/// sum_r |conf(b_r) / acc(b_r) - 1| over the same bins as compute_aece.
/// Throws std::domain_error naming the first bin whose accuracy is zero.
double compute_pcc(const std::vector<double>& confidences,
                   const std::vector<bool>& correct, int r_bins);

/// aECE and bins always; PCC only when every bin has nonzero accuracy.
CalibrationReport compute_calibration(const std::vector<double>& confidences,
                                      const std::vector<bool>& correct, int r_bins);

/// Decile accuracy analysis: sort by uncertainty, 10 equal-mass groups,
/// accuracy of the argmax-probability decision per group (the Unknown
/// mapping is not applied here).
UncertaintyBins uncertainty_bins(const std::vector<std::pair<Opinion, int>>& labeled);

/// Same analysis over scored trials carrying an uncertainty column;
/// the decision is bonafide iff score > 0.5.
UncertaintyBins uncertainty_bins(const std::vector<ScoreRecord>& records);

/// max_k p_k.
double confidence_of(const Opinion& o);

/// Min-max rescaling onto [0, 1]; a constant input maps to all 0.5.
std::vector<double> normalize_scores_minmax(const std::vector<double>& scores);

}  // namespace evid
