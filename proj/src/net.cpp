#include "evid/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace evid {

namespace {

using nlohmann::json;

constexpr int kCheckpointVersion = 1;

void validate_specs(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("network needs at least one layer");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].in_dim < 1 || specs[i].out_dim < 1)
      throw std::invalid_argument("layer " + std::to_string(i) + " has empty dimension");
    if (i > 0 && specs[i].in_dim != specs[i - 1].out_dim)
      throw std::invalid_argument("layer " + std::to_string(i) +
                                  " input does not chain with previous output");
  }
}

void validate_params(const NetworkParams& p) {
  validate_specs(p.specs);
  if (p.weights.size() != p.specs.size() || p.biases.size() != p.specs.size())
    throw std::invalid_argument("parameter count does not match layer specs");
  for (std::size_t i = 0; i < p.specs.size(); ++i) {
    if (p.weights[i].rows() != p.specs[i].out_dim ||
        p.weights[i].cols() != p.specs[i].in_dim || p.biases[i].size() != p.specs[i].out_dim)
      throw std::invalid_argument("layer " + std::to_string(i) + " parameter shape mismatch");
    if (!p.weights[i].allFinite() || !p.biases[i].allFinite())
      throw std::invalid_argument("layer " + std::to_string(i) + " has non-finite parameters");
  }
}

void apply_activation(Activation a, const Matrix& z, Matrix& out) {
  switch (a) {
    case Activation::ReLU:
      out = z.cwiseMax(0.0);
      return;
    case Activation::Softplus:
      out = z.unaryExpr([](double v) { return softplus(v); });
      return;
    case Activation::Identity:
      out = z;
      return;
  }
}

Matrix activation_slope(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::ReLU:
      return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::Softplus:
      return z.unaryExpr([](double v) { return sigmoid(v); });
    case Activation::Identity:
      return Matrix::Ones(z.rows(), z.cols());
  }
  return Matrix();
}

void validate_training_inputs(const Dataset& data, const TrainConfig& cfg) {
  if (data.samples.empty()) throw std::invalid_argument("training dataset is empty");
  for (const auto& s : data.samples) {
    if (s.features.size() != data.dim)
      throw std::invalid_argument("dataset features are not of uniform dimension");
    if (s.label != 0 && s.label != 1)
      throw std::invalid_argument("labels must be 0 or 1");
  }
  if (cfg.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (cfg.anneal_epochs < 1) throw std::invalid_argument("anneal_epochs must be >= 1");
  if (!(cfg.unknown_threshold >= 0.0 && cfg.unknown_threshold <= 1.0))
    throw std::invalid_argument("unknown_threshold must be in [0, 1]");
}

Vector stable_softmax(const Vector& z) {
  const double m = z.maxCoeff();
  Vector p = (z.array() - m).exp();
  return p / p.sum();
}

// Shared SGD loop. per_batch fills grad_out (d loss / d final activation,
// already scaled for the mean) and returns the per-batch loss sums.
struct BatchLoss {
  double primary = 0.0;  // sum over the batch
  double kl = 0.0;
  double total = 0.0;
};

template <typename BatchFn>
TrainedModel run_sgd(const Dataset& data, const TrainConfig& cfg, Activation head,
                     BatchFn per_batch) {
  validate_training_inputs(data, cfg);

  std::mt19937_64 rng(cfg.seed);
  TrainedModel model;
  model.params = init_params(default_architecture(data.dim, 2, head), rng);
  model.config = cfg;

  const AnnealSchedule schedule(cfg.anneal_epochs);
  const auto n = data.samples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lambda = lambda_at(schedule, epoch);
    std::shuffle(order.begin(), order.end(), rng);

    double primary_sum = 0.0;
    double kl_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const auto b = std::min<std::size_t>(cfg.batch_size, n - start);
      Matrix x(data.dim, b);
      std::vector<int> labels(b);
      for (std::size_t i = 0; i < b; ++i) {
        const auto& s = data.samples[order[start + i]];
        x.col(static_cast<Index>(i)) = s.features;
        labels[i] = s.label;
      }

      BatchTrace trace;
      const Matrix out = forward_batch(model.params, x, &trace);
      if (!out.allFinite())
        throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                                 ": non-finite network output");
      Matrix grad(out.rows(), out.cols());
      const BatchLoss loss = per_batch(out, labels, lambda, grad);
      if (!std::isfinite(loss.total))
        throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                                 ": non-finite loss");
      primary_sum += loss.primary;
      kl_sum += loss.kl;

      const NetworkGrads grads = backward_batch(model.params, trace, grad);
      for (std::size_t l = 0; l < model.params.weights.size(); ++l) {
        model.params.weights[l] -= cfg.learning_rate * grads.weights[l];
        model.params.biases[l] -= cfg.learning_rate * grads.biases[l];
        if (!model.params.weights[l].allFinite() || !model.params.biases[l].allFinite())
          throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                                   ": non-finite parameters");
      }
    }
    model.trace.push_back({epoch, primary_sum / static_cast<double>(n),
                           kl_sum / static_cast<double>(n), lambda});
  }
  return model;
}

json activation_to_json(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Softplus: return "softplus";
    case Activation::Identity: return "identity";
  }
  return "relu";
}

Activation activation_from_json(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "softplus") return Activation::Softplus;
  if (s == "identity") return Activation::Identity;
  throw std::runtime_error("unknown activation '" + s + "' in checkpoint");
}

}  // namespace

std::vector<LayerSpec> default_architecture(Index in_dim, Index k, Activation head) {
  return {{in_dim, 32, Activation::ReLU},
          {32, 32, Activation::ReLU},
          {32, k, head}};
}

NetworkParams init_params(const std::vector<LayerSpec>& specs, std::mt19937_64& rng) {
  validate_specs(specs);
  NetworkParams p;
  p.specs = specs;
  for (const auto& spec : specs) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(spec.in_dim + spec.out_dim));
    std::uniform_real_distribution<double> u(-limit, limit);
    Matrix w(spec.out_dim, spec.in_dim);
    for (Index c = 0; c < w.cols(); ++c)
      for (Index r = 0; r < w.rows(); ++r) w(r, c) = u(rng);
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vector::Zero(spec.out_dim));
  }
  return p;
}

NetworkParams init_params(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return init_params(specs, rng);
}

double softplus(double z) {
  // softplus(z) = max(z, 0) + log1p(exp(-|z|)); tends to z for large z
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

Matrix forward_batch(const NetworkParams& params, const Matrix& x, BatchTrace* trace) {
  validate_params(params);
  if (x.rows() != params.input_dim())
    throw std::invalid_argument("input has dimension " + std::to_string(x.rows()) +
                                ", network expects " +
                                std::to_string(params.input_dim()));
  Matrix act = x;
  if (trace) {
    trace->pre.clear();
    trace->act.clear();
    trace->act.push_back(act);
  }
  for (std::size_t i = 0; i < params.specs.size(); ++i) {
    Matrix z = (params.weights[i] * act).colwise() + params.biases[i];
    apply_activation(params.specs[i].activation, z, act);
    if (trace) {
      trace->pre.push_back(std::move(z));
      trace->act.push_back(act);
    }
  }
  return act;
}

Evidence forward(const NetworkParams& params, const Vector& x) {
  if (params.specs.empty() || params.specs.back().activation != Activation::Softplus)
    throw std::invalid_argument("evidence head requires a softplus final layer");
  return Evidence(forward_batch(params, x));
}

NetworkGrads backward_batch(const NetworkParams& params, const BatchTrace& trace,
                            const Matrix& grad_wrt_output) {
  const auto layers = params.specs.size();
  if (trace.pre.size() != layers || trace.act.size() != layers + 1)
    throw std::invalid_argument("forward trace does not match this network");
  if (grad_wrt_output.rows() != params.output_dim() ||
      grad_wrt_output.cols() != trace.pre.back().cols())
    throw std::invalid_argument("output gradient shape mismatch");

  NetworkGrads grads;
  grads.weights.resize(layers);
  grads.biases.resize(layers);

  Matrix delta = grad_wrt_output.cwiseProduct(
      activation_slope(params.specs.back().activation, trace.pre.back()));
  for (std::size_t i = layers; i-- > 0;) {
    grads.weights[i].noalias() = delta * trace.act[i].transpose();
    grads.biases[i] = delta.rowwise().sum();
    if (i > 0)
      delta = (params.weights[i].transpose() * delta)
                  .cwiseProduct(activation_slope(params.specs[i - 1].activation,
                                                 trace.pre[i - 1]));
  }
  return grads;
}

NetworkGrads backward(const NetworkParams& params, const Vector& x,
                      const Vector& grad_wrt_alpha) {
  if (params.specs.empty() || params.specs.back().activation != Activation::Softplus)
    throw std::invalid_argument("alpha gradients require a softplus final layer");
  if (grad_wrt_alpha.size() != params.output_dim())
    throw std::invalid_argument("gradient has dimension " +
                                std::to_string(grad_wrt_alpha.size()) +
                                ", network outputs " +
                                std::to_string(params.output_dim()));
  BatchTrace trace;
  forward_batch(params, x, &trace);
  // alpha = softplus(z) + 1, so d alpha / d evidence = 1 and the softplus
  // slope is applied inside backward_batch.
  return backward_batch(params, trace, grad_wrt_alpha);
}

TrainedModel train(const Dataset& data, const TrainConfig& cfg) {
  return run_sgd(data, cfg, Activation::Softplus,
                 [](const Matrix& evidence, const std::vector<int>& labels, double lambda,
                    Matrix& grad) {
                   BatchLoss loss;
                   const double scale = 1.0 / static_cast<double>(labels.size());
                   for (std::size_t i = 0; i < labels.size(); ++i) {
                     const auto c = static_cast<Index>(i);
                     const DirichletParams alpha(evidence.col(c).array() + 1.0);
                     const Vector y = one_hot(alpha.classes(), labels[i]);
                     const LossBreakdown b = total_loss(alpha, y, lambda);
                     loss.primary += b.ace;
                     loss.kl += b.kl;
                     loss.total += b.total;
                     grad.col(c) = scale * total_loss_grad(alpha, y, lambda);
                   }
                   return loss;
                 });
}

TrainedModel train_baseline(const Dataset& data, const TrainConfig& cfg) {
  return run_sgd(data, cfg, Activation::Identity,
                 [](const Matrix& logits, const std::vector<int>& labels,
                    double /*lambda*/, Matrix& grad) {
                   BatchLoss loss;
                   const double scale = 1.0 / static_cast<double>(labels.size());
                   for (std::size_t i = 0; i < labels.size(); ++i) {
                     const auto c = static_cast<Index>(i);
                     const Vector p = stable_softmax(logits.col(c));
                     const double ce =
                         -std::log(std::max(p[labels[i]], 1e-300));
                     loss.primary += ce;
                     loss.total += ce;
                     Vector g = p;
                     g[labels[i]] -= 1.0;
                     grad.col(c) = scale * g;
                   }
                   return loss;
                 });
}

Opinion predict(const TrainedModel& model, const Vector& x) {
  return opinion_from_alpha(evidence_to_alpha(forward(model.params, x)),
                            model.config.unknown_threshold);
}

Vector softmax_probs(const NetworkParams& params, const Vector& x) {
  if (params.specs.empty() || params.specs.back().activation != Activation::Identity)
    throw std::invalid_argument("softmax head requires an identity final layer");
  return stable_softmax(forward_batch(params, x));
}

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path) {
  validate_params(model.params);
  json j;
  j["format_version"] = kCheckpointVersion;
  j["kind"] = "evid-checkpoint";

  json layers = json::array();
  for (const auto& spec : model.params.specs)
    layers.push_back({{"in_dim", spec.in_dim},
                      {"out_dim", spec.out_dim},
                      {"activation", activation_to_json(spec.activation)}});
  j["layers"] = layers;

  json weights = json::array();
  for (const auto& w : model.params.weights) {
    json flat = json::array();
    for (Index r = 0; r < w.rows(); ++r)
      for (Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    weights.push_back(std::move(flat));
  }
  j["weights"] = weights;

  json biases = json::array();
  for (const auto& b : model.params.biases)
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  j["biases"] = biases;

  j["train_config"] = {{"epochs", model.config.epochs},
                       {"batch_size", model.config.batch_size},
                       {"learning_rate", model.config.learning_rate},
                       {"anneal_epochs", model.config.anneal_epochs},
                       {"seed", model.config.seed},
                       {"unknown_threshold", model.config.unknown_threshold}};

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << j.dump(2) << '\n';
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": not a valid checkpoint: " + e.what());
  }
  if (!j.contains("format_version") || j["format_version"].get<int>() != kCheckpointVersion)
    throw std::runtime_error(path.string() + ": unsupported checkpoint version");

  TrainedModel model;
  for (const auto& layer : j.at("layers"))
    model.params.specs.push_back(
        {layer.at("in_dim").get<Index>(), layer.at("out_dim").get<Index>(),
         activation_from_json(layer.at("activation").get<std::string>())});

  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (weights.size() != model.params.specs.size() ||
      biases.size() != model.params.specs.size())
    throw std::runtime_error(path.string() + ": parameter arrays do not match layers");
  for (std::size_t i = 0; i < model.params.specs.size(); ++i) {
    const auto& spec = model.params.specs[i];
    const auto flat = weights[i].get<std::vector<double>>();
    if (static_cast<Index>(flat.size()) != spec.in_dim * spec.out_dim)
      throw std::runtime_error(path.string() + ": weight count mismatch in layer " +
                               std::to_string(i));
    Matrix w(spec.out_dim, spec.in_dim);
    for (Index r = 0; r < w.rows(); ++r)
      for (Index c = 0; c < w.cols(); ++c)
        w(r, c) = flat[static_cast<std::size_t>(r * spec.in_dim + c)];
    model.params.weights.push_back(std::move(w));

    const auto b = biases[i].get<std::vector<double>>();
    if (static_cast<Index>(b.size()) != spec.out_dim)
      throw std::runtime_error(path.string() + ": bias count mismatch in layer " +
                               std::to_string(i));
    model.params.biases.push_back(
        Eigen::Map<const Vector>(b.data(), static_cast<Index>(b.size())));
  }

  const auto& cfg = j.at("train_config");
  model.config.epochs = cfg.at("epochs").get<int>();
  model.config.batch_size = cfg.at("batch_size").get<int>();
  model.config.learning_rate = cfg.at("learning_rate").get<double>();
  model.config.anneal_epochs = cfg.at("anneal_epochs").get<int>();
  model.config.seed = cfg.at("seed").get<std::uint64_t>();
  model.config.unknown_threshold = cfg.at("unknown_threshold").get<double>();

  validate_params(model.params);
  return model;
}

}  // namespace evid
