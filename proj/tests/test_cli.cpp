#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "cli.hpp"
#include "evid/data.hpp"
#include "evid/net.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"evid"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return evid::cli::run(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("evid-cli-test-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

json report_at(const std::string& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"gen"}) == 2);                  // missing --out
  CHECK(run_cli({"no-such-command"}) == 2);
  CHECK(run_cli({"--help"}) == 0);
  CHECK(run_cli({"train", "--data", "x.csv"}) == 2);  // missing --out
  CHECK(run_cli({"gen", "--out", "x.csv", "--noise", "7"}) == 2);
}

TEST_CASE("gen writes a deterministic dataset") {
  TempDir tmp;
  CHECK(run_cli({"gen", "--n", "50", "--dim", "3", "--sep", "4", "--seed", "7", "--out",
                 tmp.file("a.csv")}) == 0);
  CHECK(run_cli({"gen", "--n", "50", "--dim", "3", "--sep", "4", "--seed", "7", "--out",
                 tmp.file("b.csv")}) == 0);
  CHECK(slurp(tmp.file("a.csv")) == slurp(tmp.file("b.csv")));

  const auto d = evid::read_dataset(tmp.file("a.csv"));
  CHECK(d.samples.size() == 100);
  CHECK(d.dim == 3);
}

TEST_CASE("train writes checkpoint and trace, deterministically") {
  TempDir tmp;
  REQUIRE(run_cli({"gen", "--n", "60", "--dim", "2", "--sep", "5", "--seed", "3",
                   "--out", tmp.file("d.csv")}) == 0);

  CHECK(run_cli({"train", "--data", tmp.file("d.csv"), "--out", tmp.file("m1.json"),
                 "--epochs", "4", "--seed", "1"}) == 0);
  CHECK(run_cli({"train", "--data", tmp.file("d.csv"), "--out", tmp.file("m2.json"),
                 "--epochs", "4", "--seed", "1"}) == 0);
  CHECK(slurp(tmp.file("m1.json")) == slurp(tmp.file("m2.json")));
  CHECK(fs::exists(tmp.file("m1.json") + ".trace.csv"));

  // trace: header + one row per epoch
  const auto trace = slurp(tmp.file("m1.json") + ".trace.csv");
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 5);

  // no-op training still produces a loadable checkpoint
  CHECK(run_cli({"train", "--data", tmp.file("d.csv"), "--out", tmp.file("m0.json"),
                 "--epochs", "0", "--seed", "1"}) == 0);
  const auto m0 = evid::load_checkpoint(tmp.file("m0.json"));
  CHECK(m0.config.epochs == 0);
}

TEST_CASE("train reports divergence with nonzero exit") {
  TempDir tmp;
  std::ofstream(tmp.file("explode.csv")) << "1e308,1e308,0\n-1e308,-1e308,1\n";
  CHECK(run_cli({"train", "--data", tmp.file("explode.csv"), "--out",
                 tmp.file("m.json"), "--epochs", "2"}) == 1);
}

TEST_CASE("predict writes one row per sample; threshold only moves decisions") {
  TempDir tmp;
  REQUIRE(run_cli({"gen", "--n", "40", "--dim", "2", "--sep", "6", "--seed", "4",
                   "--out", tmp.file("d.csv")}) == 0);
  REQUIRE(run_cli({"train", "--data", tmp.file("d.csv"), "--out", tmp.file("m.json"),
                   "--epochs", "10", "--seed", "2"}) == 0);

  CHECK(run_cli({"predict", "--model", tmp.file("m.json"), "--data", tmp.file("d.csv"),
                 "--out", tmp.file("s1.txt"), "--decisions-out", tmp.file("dec1.txt"),
                 "--unknown-threshold", "0.9"}) == 0);
  CHECK(run_cli({"predict", "--model", tmp.file("m.json"), "--data", tmp.file("d.csv"),
                 "--out", tmp.file("s2.txt"), "--decisions-out", tmp.file("dec2.txt"),
                 "--unknown-threshold", "0.0"}) == 0);

  const auto recs = evid::read_scores(tmp.file("s1.txt"));
  CHECK(recs.size() == 80);
  for (const auto& r : recs) CHECK(r.uncertainty.has_value());
  CHECK(slurp(tmp.file("s1.txt")) == slurp(tmp.file("s2.txt")));
  // threshold 0 forces every decision to unknown
  CHECK(slurp(tmp.file("dec1.txt")) != slurp(tmp.file("dec2.txt")));
  const auto dec2 = slurp(tmp.file("dec2.txt"));
  CHECK(dec2.find("\tunknown") != std::string::npos);
}

TEST_CASE("predict with a zero-weight checkpoint is indifferent") {
  TempDir tmp;
  evid::TrainedModel model;
  model.params = evid::init_params(evid::default_architecture(2), 1);
  for (auto& w : model.params.weights) w.setZero();
  evid::save_checkpoint(model, tmp.file("zero.json"));

  REQUIRE(run_cli({"gen", "--n", "10", "--dim", "2", "--sep", "6", "--seed", "5",
                   "--out", tmp.file("d.csv")}) == 0);
  REQUIRE(run_cli({"predict", "--model", tmp.file("zero.json"), "--data",
                   tmp.file("d.csv"), "--out", tmp.file("s.txt")}) == 0);
  const auto recs = evid::read_scores(tmp.file("s.txt"));
  const double u_const = 2.0 / (2.0 + 2.0 * std::log(2.0));
  for (const auto& r : recs) {
    CHECK(r.score == 0.5);
    CHECK(*r.uncertainty == doctest::Approx(u_const).epsilon(1e-15));
  }
}

TEST_CASE("predict rejects mismatched dimensions naming both") {
  TempDir tmp;
  REQUIRE(run_cli({"gen", "--n", "10", "--dim", "3", "--sep", "4", "--seed", "6",
                   "--out", tmp.file("d3.csv")}) == 0);
  REQUIRE(run_cli({"gen", "--n", "10", "--dim", "2", "--sep", "4", "--seed", "6",
                   "--out", tmp.file("d2.csv")}) == 0);
  REQUIRE(run_cli({"train", "--data", tmp.file("d3.csv"), "--out", tmp.file("m3.json"),
                   "--epochs", "1"}) == 0);
  CHECK(run_cli({"predict", "--model", tmp.file("m3.json"), "--data", tmp.file("d2.csv"),
                 "--out", tmp.file("s.txt")}) == 1);
}

TEST_CASE("eval on a perfect score file") {
  TempDir tmp;
  std::ofstream(tmp.file("s.txt")) << "b1\t0.9\tbonafide\nb2\t0.8\tbonafide\n"
                                      "s1\t0.2\tspoof\ns2\t0.1\tspoof\n";
  CHECK(run_cli({"eval", "--scores", tmp.file("s.txt"), "--out", tmp.file("r.json"),
                 "--r-bins", "2"}) == 0);
  const auto r = report_at(tmp.file("r.json"));
  CHECK(r["eer"].get<double>() == 0.0);
  CHECK(r["min_tdcf"].get<double>() == 0.0);
  CHECK(r["n_bonafide"].get<int>() == 2);
  CHECK(r["n_spoof"].get<int>() == 2);
  CHECK_FALSE(r.contains("uncertainty_bins"));  // no uncertainty column
}

TEST_CASE("eval reproduces the four-record calibration example") {
  TempDir tmp;
  // confidences 0.6, 0.6, 0.9, 0.9 with correctness T, F, T, T
  std::ofstream(tmp.file("s.txt")) << "a\t0.6\tbonafide\nb\t0.6\tspoof\n"
                                      "c\t0.9\tbonafide\nd\t0.1\tspoof\n";
  CHECK(run_cli({"eval", "--scores", tmp.file("s.txt"), "--out", tmp.file("r.json"),
                 "--r-bins", "2"}) == 0);
  const auto r = report_at(tmp.file("r.json"));
  CHECK(r["calibration_max_prob"]["aece"].get<double>() == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(r["calibration_max_prob"]["pcc"].get<double>() == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("eval error paths exit 1") {
  TempDir tmp;
  std::ofstream(tmp.file("bad.txt")) << "t1\t0.9\tuh-oh\n";
  CHECK(run_cli({"eval", "--scores", tmp.file("bad.txt"), "--out", tmp.file("r.json")}) ==
        1);
  std::ofstream(tmp.file("single.txt")) << "t1\t0.9\tbonafide\n";
  CHECK(run_cli({"eval", "--scores", tmp.file("single.txt"), "--out",
                 tmp.file("r.json")}) == 1);
  CHECK(run_cli({"eval", "--scores", tmp.file("nope.txt"), "--out", tmp.file("r.json")}) ==
        1);
}

TEST_CASE("end-to-end pipeline with reproducible reports") {
  TempDir tmp;
  REQUIRE(run_cli({"gen", "--n", "200", "--dim", "2", "--sep", "6", "--seed", "11",
                   "--out", tmp.file("train.csv")}) == 0);
  REQUIRE(run_cli({"gen", "--n", "100", "--dim", "2", "--sep", "6", "--seed", "12",
                   "--out", tmp.file("test.csv")}) == 0);
  REQUIRE(run_cli({"train", "--data", tmp.file("train.csv"), "--out",
                   tmp.file("model.json"), "--seed", "1"}) == 0);
  REQUIRE(run_cli({"predict", "--model", tmp.file("model.json"), "--data",
                   tmp.file("test.csv"), "--out", tmp.file("scores.txt")}) == 0);
  REQUIRE(run_cli({"eval", "--scores", tmp.file("scores.txt"), "--out",
                   tmp.file("report.json"), "--plots", tmp.file("plots")}) == 0);

  const auto r = report_at(tmp.file("report.json"));
  CHECK(r["eer"].get<double>() <= 0.03);
  CHECK(r["min_tdcf"].get<double>() <= 0.2);
  CHECK(r.contains("uncertainty_bins"));
  CHECK(r["uncertainty_bins"]["groups"].size() == 10);
  CHECK(r.contains("calibration_one_minus_u"));
  CHECK(r["format_version"].get<int>() == 1);
  CHECK(r["config"]["r_bins"].get<int>() == 10);
  CHECK(fs::exists(tmp.file("plots") + "/calibration_bins.csv"));
  CHECK(fs::exists(tmp.file("plots") + "/uncertainty_bins.csv"));

  // identical inputs give byte-identical reports
  REQUIRE(run_cli({"eval", "--scores", tmp.file("scores.txt"), "--out",
                   tmp.file("report2.json")}) == 0);
  const auto r2 = report_at(tmp.file("report2.json"));
  CHECK(r == r2);
}

TEST_CASE("softmax-head training flows through the same pipeline") {
  TempDir tmp;
  REQUIRE(run_cli({"gen", "--n", "100", "--dim", "2", "--sep", "6", "--seed", "13",
                   "--out", tmp.file("d.csv")}) == 0);
  REQUIRE(run_cli({"train", "--data", tmp.file("d.csv"), "--out", tmp.file("base.json"),
                   "--head", "softmax", "--epochs", "20", "--seed", "2"}) == 0);
  REQUIRE(run_cli({"predict", "--model", tmp.file("base.json"), "--data",
                   tmp.file("d.csv"), "--out", tmp.file("s.txt")}) == 0);
  const auto recs = evid::read_scores(tmp.file("s.txt"));
  CHECK(recs.size() == 200);
  for (const auto& r : recs) CHECK_FALSE(r.uncertainty.has_value());
  // evaluation still works without the uncertainty column
  CHECK(run_cli({"eval", "--scores", tmp.file("s.txt"), "--out", tmp.file("r.json")}) ==
        0);
  const auto rep = report_at(tmp.file("r.json"));
  CHECK_FALSE(rep.contains("uncertainty_bins"));
}
