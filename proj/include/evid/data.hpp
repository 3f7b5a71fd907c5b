#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evid/types.hpp"

namespace evid {

/// One feature vector with its class label (0 = bonafide, 1 = spoofed).
struct Sample {
  Vector features;
  int label;
};

struct Dataset {
  std::vector<Sample> samples;
  Index dim = 0;

  Index size() const { return static_cast<Index>(samples.size()); }
};

enum class TrialKey { Bonafide, Spoof };

/// One scored trial. Score polarity: higher = more bonafide.
struct ScoreRecord {
  std::string trial_id;
  double score;
  std::optional<double> uncertainty;  // in [0, 1] when present
  TrialKey key;
};

/// Two isotropic unit-variance Gaussian clusters with means at
/// +separation/2 (bonafide) and -separation/2 (spoofed) along the first
/// axis. The first round(noise_fraction * n_per_class) samples of each
/// class additionally receive N(0, 2 I) noise, drawn from a stream
/// separate from the base draws so datasets generated with the same seed
/// differ only in the noised samples.
Dataset gen_blobs(int n_per_class, int dim, double separation, double noise_fraction,
                  std::uint64_t seed);

/// CSV, one sample per row: features then integer label, no header.
/// Values round-trip exactly (shortest exact decimal rendering).
Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& data, const std::filesystem::path& path);

/// Tab-separated trials: trial_id <TAB> score [<TAB> uncertainty] <TAB> key,
/// key is "bonafide" or "spoof". Round-trips exactly.
std::vector<ScoreRecord> read_scores(const std::filesystem::path& path);
void write_scores(const std::vector<ScoreRecord>& records,
                  const std::filesystem::path& path);

}  // namespace evid
