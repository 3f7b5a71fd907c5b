#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "evid/data.hpp"
#include "evid/loss.hpp"
#include "evid/opinion.hpp"
#include "evid/types.hpp"

namespace evid {

enum class Activation { ReLU, Softplus, Identity };

struct LayerSpec {
  Index in_dim;
  Index out_dim;
  Activation activation;
};

/// Weights and biases for a dense stack. weights[i] is (out_dim x in_dim).
struct NetworkParams {
  std::vector<LayerSpec> specs;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  Index input_dim() const { return specs.front().in_dim; }
  Index output_dim() const { return specs.back().out_dim; }
};

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 0.05;
  int anneal_epochs = 10;  // epochs until the KL weight reaches 1
  std::uint64_t seed = 1;
  double unknown_threshold = 0.5;
};

struct EpochStats {
  int epoch;
  double mean_ace;  // cross-entropy for the softmax head
  double mean_kl;
  double lambda;
};

struct TrainedModel {
  NetworkParams params;
  TrainConfig config;
  std::vector<EpochStats> trace;
};

/// input -> 32 ReLU -> 32 ReLU -> k classes through the given head.
std::vector<LayerSpec> default_architecture(Index in_dim, Index k = 2,
                                            Activation head = Activation::Softplus);

/// Glorot-uniform weights, zero biases, drawn from rng in a fixed order.
NetworkParams init_params(const std::vector<LayerSpec>& specs, std::mt19937_64& rng);
NetworkParams init_params(const std::vector<LayerSpec>& specs, std::uint64_t seed);

// Overflow-safe scalar head helpers.
double softplus(double z);
double sigmoid(double z);

/// Activations cached by forward_batch for the backward pass.
struct BatchTrace {
  std::vector<Matrix> pre;  // pre[i] = W_i act[i] + b_i
  std::vector<Matrix> act;  // act[0] = input batch, act[i+1] = f(pre[i])
};

/// Runs the stack on a batch of column vectors; returns the final
/// activations (out_dim x batch).
Matrix forward_batch(const NetworkParams& params, const Matrix& x,
                     BatchTrace* trace = nullptr);

/// Evidence head: requires the final layer activation to be Softplus.
Evidence forward(const NetworkParams& params, const Vector& x);

struct NetworkGrads {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// Gradients of every weight and bias, summed over the batch, given
/// d(loss)/d(final activation) per column.
NetworkGrads backward_batch(const NetworkParams& params, const BatchTrace& trace,
                            const Matrix& grad_wrt_output);

/// Single-sample convenience: chain rule through alpha = softplus(z) + 1.
/// Performs its own forward pass, so there is no forward state to go stale.
NetworkGrads backward(const NetworkParams& params, const Vector& x,
                      const Vector& grad_wrt_alpha);

/// Mini-batch SGD on the annealed evidential objective. Deterministic for
/// a fixed config: initialization, shuffling and reduction order are all
/// driven by cfg.seed.
TrainedModel train(const Dataset& data, const TrainConfig& cfg);

/// Same stack and optimizer with a softmax head and plain cross-entropy.
TrainedModel train_baseline(const Dataset& data, const TrainConfig& cfg);

/// forward -> evidence_to_alpha -> opinion_from_alpha(cfg.unknown_threshold).
Opinion predict(const TrainedModel& model, const Vector& x);

/// Softmax probabilities for an Identity-headed (baseline) stack.
Vector softmax_probs(const NetworkParams& params, const Vector& x);

/// Checkpoint: JSON with layer specs, flattened weights (row-major),
/// biases, the training config and a format-version field.
void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace evid
