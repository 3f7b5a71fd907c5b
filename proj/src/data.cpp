#include "evid/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace evid {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::string render(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("failed to render value");
  return std::string(buf, end);
}

double parse_double(std::string_view tok, const std::filesystem::path& path,
                    std::size_t line, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    parse_fail(path, line, std::string("not a numeric ") + what + ": '" +
                               std::string(tok) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// Whole-file atomic write: stream into a sibling temp file, then rename.
void write_atomic(const std::filesystem::path& path, const std::string& payload) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << payload;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

Dataset gen_blobs(int n_per_class, int dim, double separation, double noise_fraction,
                  std::uint64_t seed) {
  if (n_per_class < 1) throw std::invalid_argument("n_per_class must be >= 1");
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (!(separation >= 0.0)) throw std::invalid_argument("separation must be >= 0");
  if (!(noise_fraction >= 0.0 && noise_fraction <= 1.0))
    throw std::invalid_argument("noise_fraction must be in [0, 1]");

  // Base draws and noise draws come from distinct streams so that the
  // noise_fraction knob cannot perturb the underlying clusters.
  std::mt19937_64 base_rng(seed);
  std::mt19937_64 noise_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> wide(0.0, std::sqrt(2.0));

  const int n_noised = static_cast<int>(std::llround(noise_fraction * n_per_class));

  Dataset data;
  data.dim = dim;
  data.samples.reserve(static_cast<std::size_t>(2 * n_per_class));
  for (int label = 0; label <= 1; ++label) {
    const double mean0 = (label == 0 ? 0.5 : -0.5) * separation;
    for (int i = 0; i < n_per_class; ++i) {
      Vector x(dim);
      for (int d = 0; d < dim; ++d) x[d] = unit(base_rng);
      x[0] += mean0;
      data.samples.push_back({std::move(x), label});
    }
  }
  for (int label = 0; label <= 1; ++label) {
    for (int i = 0; i < n_noised; ++i) {
      Vector& x = data.samples[static_cast<std::size_t>(label * n_per_class + i)].features;
      for (int d = 0; d < dim; ++d) x[d] += wide(noise_rng);
    }
  }
  return data;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset: " + path.string());

  Dataset data;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = strip_cr(raw);
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() < 2) parse_fail(path, lineno, "expected features and a label");

    Sample s;
    s.features.resize(static_cast<Index>(cols.size()) - 1);
    for (std::size_t i = 0; i + 1 < cols.size(); ++i)
      s.features[static_cast<Index>(i)] = parse_double(cols[i], path, lineno, "feature");

    const auto lab = cols.back();
    if (lab == "0")
      s.label = 0;
    else if (lab == "1")
      s.label = 1;
    else
      parse_fail(path, lineno, "bad label '" + std::string(lab) + "' (want 0 or 1)");

    if (data.samples.empty())
      data.dim = s.features.size();
    else if (s.features.size() != data.dim)
      parse_fail(path, lineno,
                 "row has " + std::to_string(s.features.size()) + " features, expected " +
                     std::to_string(data.dim));
    data.samples.push_back(std::move(s));
  }
  if (data.samples.empty())
    throw std::runtime_error(path.string() + ": no samples");
  return data;
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::string out;
  out.reserve(data.samples.size() * 32);
  for (const auto& s : data.samples) {
    if (s.features.size() != data.dim)
      throw std::invalid_argument("dataset rows have inconsistent dimension");
    for (Index d = 0; d < s.features.size(); ++d) {
      if (!std::isfinite(s.features[d]))
        throw std::invalid_argument("dataset contains a non-finite feature");
      out += render(s.features[d]);
      out += ',';
    }
    out += (s.label == 0 ? '0' : '1');
    out += '\n';
  }
  write_atomic(path, out);
}

std::vector<ScoreRecord> read_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open score file: " + path.string());

  std::vector<ScoreRecord> records;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = strip_cr(raw);
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 3 && cols.size() != 4)
      parse_fail(path, lineno, "expected 3 or 4 tab-separated fields, got " +
                                   std::to_string(cols.size()));

    ScoreRecord r;
    r.trial_id = std::string(cols[0]);
    if (r.trial_id.empty()) parse_fail(path, lineno, "empty trial id");
    r.score = parse_double(cols[1], path, lineno, "score");
    if (!std::isfinite(r.score)) parse_fail(path, lineno, "score is not finite");
    if (cols.size() == 4) {
      const double u = parse_double(cols[2], path, lineno, "uncertainty");
      if (!(u >= 0.0 && u <= 1.0))
        parse_fail(path, lineno, "uncertainty " + render(u) + " outside [0, 1]");
      r.uncertainty = u;
    }
    const auto key = cols.back();
    if (key == "bonafide")
      r.key = TrialKey::Bonafide;
    else if (key == "spoof")
      r.key = TrialKey::Spoof;
    else
      parse_fail(path, lineno, "bad key token '" + std::string(key) +
                                   "' (want bonafide or spoof)");
    records.push_back(std::move(r));
  }
  if (records.empty()) throw std::runtime_error(path.string() + ": no trials");
  return records;
}

void write_scores(const std::vector<ScoreRecord>& records,
                  const std::filesystem::path& path) {
  std::string out;
  out.reserve(records.size() * 40);
  for (const auto& r : records) {
    if (r.trial_id.empty() || !std::isfinite(r.score))
      throw std::invalid_argument("score record needs a trial id and a finite score");
    if (r.uncertainty && !(*r.uncertainty >= 0.0 && *r.uncertainty <= 1.0))
      throw std::invalid_argument("uncertainty outside [0, 1] for trial '" +
                                  r.trial_id + "'");
    out += r.trial_id;
    out += '\t';
    out += render(r.score);
    out += '\t';
    if (r.uncertainty) {
      out += render(*r.uncertainty);
      out += '\t';
    }
    out += (r.key == TrialKey::Bonafide ? "bonafide" : "spoof");
    out += '\n';
  }
  write_atomic(path, out);
}

}  // namespace evid
