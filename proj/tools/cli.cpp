#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "evid/data.hpp"
#include "evid/metrics.hpp"
#include "evid/net.hpp"

namespace evid::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kReportVersion = 1;

std::string render(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

void write_text_atomic(const fs::path& path, const std::string& payload) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << payload;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

struct GenArgs {
  int n_per_class = 1000;
  int dim = 2;
  double separation = 6.0;
  double noise_fraction = 0.0;
  std::uint64_t seed = 42;
  std::string out;
};

int run_gen(const GenArgs& a) {
  const Dataset data = gen_blobs(a.n_per_class, a.dim, a.separation, a.noise_fraction,
                                 a.seed);
  write_dataset(data, a.out);
  std::cout << "wrote " << a.out << ": n=" << data.samples.size() << " dim=" << data.dim
            << " bonafide=" << a.n_per_class << " spoof=" << a.n_per_class
            << " sep=" << render(a.separation) << " noise=" << render(a.noise_fraction)
            << " seed=" << a.seed << "\n";
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string out;
  std::string trace_out;  // defaults to <out>.trace.csv
  std::string head = "evidential";
  TrainConfig cfg;
};

int run_train(const TrainArgs& a) {
  const Dataset data = read_dataset(a.data);
  const TrainedModel model =
      a.head == "softmax" ? train_baseline(data, a.cfg) : train(data, a.cfg);

  std::string trace_csv = "epoch,mean_ace,mean_kl,lambda\n";
  for (const auto& row : model.trace) {
    std::cout << "epoch " << row.epoch << ": ace=" << render(row.mean_ace)
              << " kl=" << render(row.mean_kl) << " lambda=" << render(row.lambda)
              << "\n";
    trace_csv += std::to_string(row.epoch) + "," + render(row.mean_ace) + "," +
                 render(row.mean_kl) + "," + render(row.lambda) + "\n";
  }

  save_checkpoint(model, a.out);
  const std::string trace_path =
      a.trace_out.empty() ? a.out + ".trace.csv" : a.trace_out;
  write_text_atomic(trace_path, trace_csv);
  std::cout << "wrote checkpoint " << a.out << " and trace " << trace_path << "\n";
  return 0;
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  std::string decisions_out;
  std::optional<double> unknown_threshold;  // overrides the checkpoint value
};

std::string trial_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "t%06zu", i + 1);
  return buf;
}

int run_predict(const PredictArgs& a) {
  TrainedModel model = load_checkpoint(a.model);
  if (a.unknown_threshold) model.config.unknown_threshold = *a.unknown_threshold;
  const Dataset data = read_dataset(a.data);

  const bool evidential =
      model.params.specs.back().activation == Activation::Softplus;

  std::vector<ScoreRecord> records;
  records.reserve(data.samples.size());
  std::string decisions;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const auto& s = data.samples[i];
    const auto key = s.label == 0 ? TrialKey::Bonafide : TrialKey::Spoof;
    if (evidential) {
      const Opinion o = predict(model, s.features);
      records.push_back({trial_id(i), o.probs[kBonafideIndex], o.uncertainty, key});
      decisions += trial_id(i) + "\t" + to_string(o.decision) + "\n";
    } else {
      const Vector p = softmax_probs(model.params, s.features);
      records.push_back({trial_id(i), p[kBonafideIndex], std::nullopt, key});
      decisions += trial_id(i) + "\t" +
                   (p[kBonafideIndex] > p[kSpoofedIndex] ? "bonafide" : "spoofed") + "\n";
    }
  }

  write_scores(records, a.out);
  if (!a.decisions_out.empty()) write_text_atomic(a.decisions_out, decisions);
  std::cout << "wrote " << records.size() << " trials to " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string scores;
  std::string out;
  std::string plots_dir;
  int r_bins = 10;
  bool no_tdcf = false;
  bool normalize_scores = false;
  TdcfCosts costs;
};

json calibration_to_json(const CalibrationReport& rep) {
  json bins = json::array();
  for (const auto& b : rep.bins)
    bins.push_back({{"mean_confidence", b.mean_confidence},
                    {"accuracy", b.accuracy},
                    {"count", b.count}});
  json j = {{"aece", rep.aece}, {"r_bins", rep.r_bins}, {"bins", bins}};
  if (rep.pcc)
    j["pcc"] = *rep.pcc;
  else
    j["pcc"] = nullptr;
  return j;
}

std::string calibration_csv(const CalibrationReport& rep) {
  std::string csv = "bin,mean_confidence,accuracy,count\n";
  for (std::size_t i = 0; i < rep.bins.size(); ++i)
    csv += std::to_string(i) + "," + render(rep.bins[i].mean_confidence) + "," +
           render(rep.bins[i].accuracy) + "," + std::to_string(rep.bins[i].count) + "\n";
  return csv;
}

int run_eval(const EvalArgs& a) {
  std::vector<ScoreRecord> records = read_scores(a.scores);

  json report;
  report["format_version"] = kReportVersion;
  report["kind"] = "evid-eval-report";
  report["config"] = {
      {"scores", a.scores},
      {"r_bins", a.r_bins},
      {"tdcf_enabled", !a.no_tdcf},
      {"normalize_scores", a.normalize_scores},
      {"tdcf",
       {{"c_miss_cm", a.costs.c_miss_cm},
        {"c_fa_cm", a.costs.c_fa_cm},
        {"c_miss_asv", a.costs.c_miss_asv},
        {"c_fa_asv", a.costs.c_fa_asv},
        {"pi_tar", a.costs.pi_tar},
        {"pi_non", a.costs.pi_non},
        {"pi_spoof", a.costs.pi_spoof},
        {"p_miss_asv", a.costs.p_miss_asv},
        {"p_fa_asv", a.costs.p_fa_asv},
        {"p_miss_spoof_asv", a.costs.p_miss_spoof_asv}}}};

  const EvalReport eer = compute_eer(records);
  report["eer"] = eer.eer;
  report["eer_threshold"] = eer.eer_threshold;
  report["n_bonafide"] = eer.n_bonafide;
  report["n_spoof"] = eer.n_spoof;
  std::cout << "eer " << render(eer.eer) << "\n";

  if (!a.no_tdcf) {
    const double tdcf = compute_min_tdcf(records, a.costs);
    report["min_tdcf"] = tdcf;
    std::cout << "min_tdcf " << render(tdcf) << "\n";
  }

  if (a.normalize_scores) {
    std::vector<double> raw(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) raw[i] = records[i].score;
    const auto normed = normalize_scores_minmax(raw);
    for (std::size_t i = 0; i < records.size(); ++i) records[i].score = normed[i];
  }

  // Decision confidences: max(p, 1-p) of the bonafide score. Only defined
  // when scores live in [0, 1]; raw scores on another scale need
  // --normalize-scores first.
  std::vector<double> confidences(records.size());
  std::vector<bool> correct(records.size());
  bool scores_in_unit = true;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double s = records[i].score;
    scores_in_unit = scores_in_unit && s >= 0.0 && s <= 1.0;
    confidences[i] = std::max(s, 1.0 - s);
    const TrialKey decided = s > 0.5 ? TrialKey::Bonafide : TrialKey::Spoof;
    correct[i] = decided == records[i].key;
  }

  std::optional<CalibrationReport> cal;
  if (scores_in_unit && records.size() >= static_cast<std::size_t>(a.r_bins)) {
    cal = compute_calibration(confidences, correct, a.r_bins);
    report["calibration_max_prob"] = calibration_to_json(*cal);
    std::cout << "aece " << render(cal->aece) << "\n";
    if (cal->pcc)
      std::cout << "pcc " << render(*cal->pcc) << "\n";
    else
      std::cout << "pcc undefined (a bin has zero accuracy)\n";
  } else {
    report["calibration_max_prob"] = nullptr;
    report["calibration_note"] =
        scores_in_unit ? "fewer predictions than r_bins"
                       : "scores outside [0, 1]; re-run with --normalize-scores";
  }

  const bool have_u = std::all_of(records.begin(), records.end(),
                                  [](const ScoreRecord& r) { return r.uncertainty.has_value(); });
  std::optional<UncertaintyBins> ubins;
  if (have_u) {
    std::vector<double> one_minus_u(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
      one_minus_u[i] = 1.0 - *records[i].uncertainty;
    if (records.size() >= static_cast<std::size_t>(a.r_bins))
      report["calibration_one_minus_u"] =
          calibration_to_json(compute_calibration(one_minus_u, correct, a.r_bins));
    if (records.size() >= 10) {
      ubins = uncertainty_bins(records);
      json groups = json::array();
      for (const auto& g : ubins->groups)
        groups.push_back({{"mean_uncertainty", g.mean_uncertainty},
                          {"accuracy", g.accuracy},
                          {"count", g.count}});
      report["uncertainty_bins"] = {{"groups", groups}};
    }
  }

  write_text_atomic(a.out, report.dump(2) + "\n");
  std::cout << "wrote report " << a.out << "\n";

  if (!a.plots_dir.empty()) {
    fs::create_directories(a.plots_dir);
    if (cal)
      write_text_atomic(fs::path(a.plots_dir) / "calibration_bins.csv",
                        calibration_csv(*cal));
    if (ubins) {
      std::string csv = "group,mean_uncertainty,accuracy,count\n";
      for (std::size_t i = 0; i < ubins->groups.size(); ++i)
        csv += std::to_string(i) + "," + render(ubins->groups[i].mean_uncertainty) +
               "," + render(ubins->groups[i].accuracy) + "," +
               std::to_string(ubins->groups[i].count) + "\n";
      write_text_atomic(fs::path(a.plots_dir) / "uncertainty_bins.csv", csv);
    }
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"evidential binary classifier: blob datasets, Dirichlet-opinion "
               "training, trial scoring and score-file evaluation"};
  app.require_subcommand(1);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "generate a synthetic blob dataset (CSV)");
  gen->add_option("--n", gen_args.n_per_class, "samples per class")->check(CLI::PositiveNumber);
  gen->add_option("--dim", gen_args.dim, "feature dimension")->check(CLI::PositiveNumber);
  gen->add_option("--sep", gen_args.separation, "cluster separation along the first axis")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--noise", gen_args.noise_fraction,
                  "fraction of each class receiving extra N(0, 2I) noise")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", gen_args.seed, "RNG seed");
  gen->add_option("--out", gen_args.out, "output dataset path")->required();

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
  train->add_option("--data", train_args.data, "training dataset (CSV)")->required();
  train->add_option("--out", train_args.out, "checkpoint path (JSON)")->required();
  train->add_option("--trace-out", train_args.trace_out,
                    "trace CSV path (default: <out>.trace.csv)");
  train->add_option("--epochs", train_args.cfg.epochs)->check(CLI::NonNegativeNumber);
  train->add_option("--batch", train_args.cfg.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--lr", train_args.cfg.learning_rate)->check(CLI::PositiveNumber);
  train->add_option("--anneal", train_args.cfg.anneal_epochs,
                    "epochs until the KL weight reaches 1")
      ->check(CLI::PositiveNumber);
  train->add_option("--seed", train_args.cfg.seed, "RNG seed");
  train->add_option("--unknown-threshold", train_args.cfg.unknown_threshold)
      ->check(CLI::Range(0.0, 1.0));
  train->add_option("--head", train_args.head, "output head: evidential or softmax")
      ->check(CLI::IsMember({"evidential", "softmax"}));

  PredictArgs predict_args;
  double predict_threshold = -1.0;
  auto* predict = app.add_subcommand("predict", "score a dataset with a checkpoint");
  predict->add_option("--model", predict_args.model, "checkpoint path")->required();
  predict->add_option("--data", predict_args.data, "dataset to score (CSV)")->required();
  predict->add_option("--out", predict_args.out, "score file path (TSV)")->required();
  predict->add_option("--decisions-out", predict_args.decisions_out,
                      "also write per-trial decisions to this path");
  auto* thr = predict->add_option("--unknown-threshold", predict_threshold,
                                  "override the checkpoint's Unknown threshold")
                  ->check(CLI::Range(0.0, 1.0));

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "evaluate a score file (EER, min t-DCF, "
                                          "aECE, PCC, uncertainty deciles)");
  eval->add_option("--scores", eval_args.scores, "score file (TSV)")->required();
  eval->add_option("--out", eval_args.out, "report path (JSON)")->required();
  eval->add_option("--plots", eval_args.plots_dir, "directory for bin CSV dumps");
  eval->add_option("--r-bins", eval_args.r_bins, "calibration bin count")
      ->check(CLI::PositiveNumber);
  eval->add_flag("--no-tdcf", eval_args.no_tdcf, "skip the min t-DCF computation");
  eval->add_flag("--normalize-scores", eval_args.normalize_scores,
                 "min-max normalize scores to [0, 1] before calibration");
  eval->add_option("--c-miss-cm", eval_args.costs.c_miss_cm);
  eval->add_option("--c-fa-cm", eval_args.costs.c_fa_cm);
  eval->add_option("--c-miss-asv", eval_args.costs.c_miss_asv);
  eval->add_option("--c-fa-asv", eval_args.costs.c_fa_asv);
  eval->add_option("--pi-tar", eval_args.costs.pi_tar);
  eval->add_option("--pi-non", eval_args.costs.pi_non);
  eval->add_option("--pi-spoof", eval_args.costs.pi_spoof);
  eval->add_option("--asv-p-miss", eval_args.costs.p_miss_asv);
  eval->add_option("--asv-p-fa", eval_args.costs.p_fa_asv);
  eval->add_option("--asv-p-miss-spoof", eval_args.costs.p_miss_spoof_asv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return run_gen(gen_args);
    if (train->parsed()) return run_train(train_args);
    if (predict->parsed()) {
      if (thr->count() > 0) predict_args.unknown_threshold = predict_threshold;
      return run_predict(predict_args);
    }
    if (eval->parsed()) return run_eval(eval_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace evid::cli
