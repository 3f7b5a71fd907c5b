#include "evid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace evid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void split_scores(const std::vector<ScoreRecord>& records, std::vector<double>& bona,
                  std::vector<double>& spoof) {
  for (const auto& r : records)
    (r.key == TrialKey::Bonafide ? bona : spoof).push_back(r.score);
  if (bona.empty() || spoof.empty())
    throw std::invalid_argument("need at least one bonafide and one spoof trial");
  std::sort(bona.begin(), bona.end());
  std::sort(spoof.begin(), spoof.end());
}

std::vector<double> sweep_thresholds(const std::vector<double>& bona,
                                     const std::vector<double>& spoof) {
  std::vector<double> t;
  t.reserve(bona.size() + spoof.size() + 2);
  t.push_back(-kInf);
  std::merge(bona.begin(), bona.end(), spoof.begin(), spoof.end(),
             std::back_inserter(t));
  t.erase(std::unique(t.begin(), t.end()), t.end());
  t.push_back(kInf);
  return t;
}

// #{x < t} and #{x > t} over a sorted array.
double frac_below(const std::vector<double>& sorted, double t) {
  const auto n = std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
  return static_cast<double>(n) / static_cast<double>(sorted.size());
}
double frac_above(const std::vector<double>& sorted, double t) {
  const auto n = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
  return static_cast<double>(n) / static_cast<double>(sorted.size());
}
double frac_at_or_below(const std::vector<double>& sorted, double t) {
  const auto n = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
  return static_cast<double>(n) / static_cast<double>(sorted.size());
}

struct BinSpan {
  std::size_t begin;
  std::size_t end;
};

// Equal-mass split: the first (n mod r) bins take one extra element.
std::vector<BinSpan> equal_mass_spans(std::size_t n, int r) {
  std::vector<BinSpan> spans;
  const std::size_t base = n / static_cast<std::size_t>(r);
  const std::size_t extra = n % static_cast<std::size_t>(r);
  std::size_t at = 0;
  for (int i = 0; i < r; ++i) {
    const std::size_t len = base + (static_cast<std::size_t>(i) < extra ? 1 : 0);
    spans.push_back({at, at + len});
    at += len;
  }
  return spans;
}

std::vector<CalibrationBin> calibration_bins(const std::vector<double>& confidences,
                                             const std::vector<bool>& correct,
                                             int r_bins) {
  if (confidences.size() != correct.size())
    throw std::invalid_argument("confidence / correctness length mismatch");
  if (confidences.empty()) throw std::invalid_argument("no predictions to bin");
  if (r_bins < 1) throw std::invalid_argument("r_bins must be >= 1");
  if (confidences.size() < static_cast<std::size_t>(r_bins))
    throw std::invalid_argument("need at least r_bins predictions");
  for (double c : confidences)
    if (!(c >= 0.0 && c <= 1.0))
      throw std::invalid_argument("confidence outside [0, 1]");

  std::vector<std::size_t> order(confidences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return confidences[a] < confidences[b];
  });

  std::vector<CalibrationBin> bins;
  for (const auto& span : equal_mass_spans(order.size(), r_bins)) {
    double conf_sum = 0.0;
    int hits = 0;
    for (std::size_t i = span.begin; i < span.end; ++i) {
      conf_sum += confidences[order[i]];
      hits += correct[order[i]] ? 1 : 0;
    }
    const auto count = static_cast<int>(span.end - span.begin);
    bins.push_back({conf_sum / count, static_cast<double>(hits) / count, count});
  }
  return bins;
}

UncertaintyBins uncertainty_bins_core(const std::vector<double>& u,
                                      const std::vector<bool>& correct) {
  constexpr int kGroups = 10;
  if (u.size() < kGroups)
    throw std::invalid_argument("uncertainty analysis needs at least 10 items");

  std::vector<std::size_t> order(u.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });

  UncertaintyBins out;
  for (const auto& span : equal_mass_spans(order.size(), kGroups)) {
    double u_sum = 0.0;
    int hits = 0;
    for (std::size_t i = span.begin; i < span.end; ++i) {
      u_sum += u[order[i]];
      hits += correct[order[i]] ? 1 : 0;
    }
    const auto count = static_cast<int>(span.end - span.begin);
    out.groups.push_back({u_sum / count, static_cast<double>(hits) / count, count});
  }
  return out;
}

}  // namespace

EvalReport compute_eer(const std::vector<ScoreRecord>& records) {
  std::vector<double> bona, spoof;
  split_scores(records, bona, spoof);

  // FAR falls and FRR rises as the threshold sweeps upward, so the sign of
  // FAR - FRR flips exactly once.
  double prev_far = 1.0, prev_frr = 0.0, prev_t = -kInf;
  EvalReport report{0.0, 0.0, std::nullopt, static_cast<int>(bona.size()),
                    static_cast<int>(spoof.size())};
  for (double t : sweep_thresholds(bona, spoof)) {
    const double far = frac_above(spoof, t);
    const double frr = frac_below(bona, t);
    if (far <= frr) {
      if (far == frr) {
        report.eer = far;
        report.eer_threshold = t;
      } else {
        const double w = (prev_far - prev_frr) / ((frr - prev_frr) - (far - prev_far));
        report.eer = prev_far + w * (far - prev_far);
        report.eer_threshold = prev_t + w * (t - prev_t);
      }
      return report;
    }
    prev_far = far;
    prev_frr = frr;
    prev_t = t;
  }
  throw std::logic_error("EER sweep found no crossing");  // unreachable
}

double compute_min_tdcf(const std::vector<ScoreRecord>& records, const TdcfCosts& costs) {
  if (!(costs.c_miss_cm > 0.0 && costs.c_fa_cm > 0.0 && costs.c_miss_asv > 0.0 &&
        costs.c_fa_asv > 0.0))
    throw std::invalid_argument("t-DCF costs must be positive");
  if (!(costs.pi_tar > 0.0 && costs.pi_non > 0.0 && costs.pi_spoof > 0.0) ||
      costs.pi_tar + costs.pi_non + costs.pi_spoof > 1.0 + 1e-12)
    throw std::invalid_argument("t-DCF priors must be positive and sum to at most 1");
  for (double p : {costs.p_miss_asv, costs.p_fa_asv, costs.p_miss_spoof_asv})
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("ASV operating rates must be in [0, 1]");

  const double c1 = costs.pi_tar * (costs.c_miss_cm - costs.c_miss_asv * costs.p_miss_asv) -
                    costs.pi_non * costs.c_fa_asv * costs.p_fa_asv;
  const double c2 = costs.c_fa_cm * costs.pi_spoof * (1.0 - costs.p_miss_spoof_asv);
  if (!(c1 > 0.0) || !(c2 > 0.0))
    throw std::invalid_argument("degenerate t-DCF constants (C1, C2 must be positive)");

  std::vector<double> bona, spoof;
  split_scores(records, bona, spoof);

  const double norm = std::min(c1, c2);
  double best = kInf;
  for (double t : sweep_thresholds(bona, spoof)) {
    if (t == kInf) break;  // same decision split as the largest score
    const double p_miss = frac_at_or_below(bona, t);
    const double p_fa = frac_above(spoof, t);
    best = std::min(best, (c1 * p_miss + c2 * p_fa) / norm);
  }
  return best;
}

CalibrationReport compute_aece(const std::vector<double>& confidences,
                               const std::vector<bool>& correct, int r_bins) {
  CalibrationReport report;
  report.bins = calibration_bins(confidences, correct, r_bins);
  report.r_bins = r_bins;
  double sum = 0.0;
  for (const auto& b : report.bins) sum += std::abs(b.mean_confidence - b.accuracy);
  report.aece = sum / r_bins;
  return report;
}

double compute_pcc(const std::vector<double>& confidences,
                   const std::vector<bool>& correct, int r_bins) {
  const auto bins = calibration_bins(confidences, correct, r_bins);
  double sum = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i].accuracy == 0.0)
      throw std::domain_error("PCC undefined: bin " + std::to_string(i) +
                              " has zero accuracy");
    sum += std::abs(bins[i].mean_confidence / bins[i].accuracy - 1.0);
  }
  return sum;
}

CalibrationReport compute_calibration(const std::vector<double>& confidences,
                                      const std::vector<bool>& correct, int r_bins) {
  CalibrationReport report = compute_aece(confidences, correct, r_bins);
  const bool defined = std::none_of(report.bins.begin(), report.bins.end(),
                                    [](const CalibrationBin& b) { return b.accuracy == 0.0; });
  if (defined) {
    double sum = 0.0;
    for (const auto& b : report.bins)
      sum += std::abs(b.mean_confidence / b.accuracy - 1.0);
    report.pcc = sum;
  }
  return report;
}

UncertaintyBins uncertainty_bins(const std::vector<std::pair<Opinion, int>>& labeled) {
  std::vector<double> u;
  std::vector<bool> correct;
  u.reserve(labeled.size());
  correct.reserve(labeled.size());
  for (const auto& [opinion, label] : labeled) {
    Index best = 0;
    opinion.probs.maxCoeff(&best);
    // argmax with the tie toward spoofed, matching the opinion decision rule
    if (opinion.probs.size() == 2 &&
        opinion.probs[kBonafideIndex] <= opinion.probs[kSpoofedIndex])
      best = kSpoofedIndex;
    u.push_back(opinion.uncertainty);
    correct.push_back(best == static_cast<Index>(label));
  }
  return uncertainty_bins_core(u, correct);
}

UncertaintyBins uncertainty_bins(const std::vector<ScoreRecord>& records) {
  std::vector<double> u;
  std::vector<bool> correct;
  u.reserve(records.size());
  correct.reserve(records.size());
  for (const auto& r : records) {
    if (!r.uncertainty)
      throw std::invalid_argument("trial '" + r.trial_id + "' has no uncertainty");
    const TrialKey decided = r.score > 0.5 ? TrialKey::Bonafide : TrialKey::Spoof;
    u.push_back(*r.uncertainty);
    correct.push_back(decided == r.key);
  }
  return uncertainty_bins_core(u, correct);
}

double confidence_of(const Opinion& o) { return o.probs.maxCoeff(); }

std::vector<double> normalize_scores_minmax(const std::vector<double>& scores) {
  if (scores.empty()) return {};
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<double> out(scores.size());
  if (lo == hi) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (std::size_t i = 0; i < scores.size(); ++i)
    out[i] = (scores[i] - lo) / (hi - lo);
  return out;
}

}  // namespace evid
