#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "matrix.hpp"
#include "rng.hpp"

namespace zinn {

enum class Activation { ReLU, ELU, Identity, Logistic };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

double activate(Activation a, double z);
// Derivative with respect to the pre-activation.
double activate_grad(Activation a, double z);

struct NetworkSpec {
    std::size_t input = 1;
    std::vector<std::size_t> hidden;
    Activation hidden_activation = Activation::ReLU;
    Activation output_activation = Activation::Identity;
    double dropout = 0.0;  // per hidden unit, training only
    double l2 = 0.0;       // on weights, not biases

    // Throws InvalidArgument.
    void validate() const;
    std::size_t layer_count() const { return hidden.size() + 1; }
    std::size_t fan_in(std::size_t layer) const { return layer == 0 ? input : hidden[layer - 1]; }
    std::size_t fan_out(std::size_t layer) const { return layer < hidden.size() ? hidden[layer] : 1; }
    std::size_t parameter_count() const;
    // e.g. "relu[67,45]"; used for tie-breaking and reports.
    std::string architecture() const;
    bool operator==(const NetworkSpec&) const = default;
};

// All weights and biases in one vector: per layer, the out x in weight
// matrix (row-major) followed by the bias vector.
struct NetworkParams {
    std::vector<double> values;

    bool operator==(const NetworkParams&) const = default;
};

struct LayerOffsets {
    std::size_t weights;
    std::size_t biases;
};
std::vector<LayerOffsets> layer_offsets(const NetworkSpec& spec);

// Uniform in +-sqrt(6 / fan_in), biases zero.
NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed);

enum class Mode { Train, Eval };

struct ForwardCache {
    std::vector<std::vector<double>> pre;   // per layer
    std::vector<std::vector<double>> post;  // post[0] = input; post[l + 1] after activation and dropout
    std::vector<std::vector<double>> mask;  // per hidden layer; 0 or 1 / (1 - p)
    double output() const { return post.back()[0]; }
};

// Train mode draws dropout masks from rng (required when dropout > 0).
double forward(const NetworkParams& params, const NetworkSpec& spec, std::span<const double> input, Mode mode,
               Rng* rng, ForwardCache& cache);
double predict(const NetworkParams& params, const NetworkSpec& spec, std::span<const double> input);
std::vector<double> predict(const NetworkParams& params, const NetworkSpec& spec, const Matrix& inputs);

enum class LossKind { MseTransformed, BinaryCrossEntropy };

constexpr double kBceEpsilon = 1e-12;

// BCE clamps the prediction to [eps, 1 - eps] and sets *clamped.
double loss_value(LossKind kind, double prediction, double target, bool* clamped = nullptr);
double loss_grad(LossKind kind, double prediction, double target);

// Accumulates into grads (sized like params) the gradient of
// loss + l2 * sum(w^2) for one sample, given d loss / d prediction.
void backward(const NetworkParams& params, const NetworkSpec& spec, const ForwardCache& cache, double loss_gradient,
              std::vector<double>& grads);

// Gradient pieces used by the training loop.
void backward_from_output_delta(const NetworkParams& params, const NetworkSpec& spec, const ForwardCache& cache,
                                double output_delta, double scale, std::vector<double>& grads);
void add_l2_grad(const NetworkParams& params, const NetworkSpec& spec, std::vector<double>& grads);
double l2_penalty(const NetworkParams& params, const NetworkSpec& spec);

enum class OptimizerKind { AdaGrad, Adam };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::AdaGrad;
    double learning_rate = 0.01;
    double epsilon = 1e-10;
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::vector<double> first;   // AdaGrad: squared-gradient sums; Adam: first moment
    std::vector<double> second;  // Adam second moment
    std::uint64_t step = 0;
};

OptimizerState make_optimizer(OptimizerKind kind, std::size_t parameter_count, double learning_rate);
void adagrad_step(OptimizerState& state, std::vector<double>& params, std::span<const double> grads);
void adam_step(OptimizerState& state, std::vector<double>& params, std::span<const double> grads);
void optimizer_step(OptimizerState& state, std::vector<double>& params, std::span<const double> grads);

struct TrainConfig {
    std::size_t batch_size = 50;
    std::size_t epochs = 200;
    double learning_rate = 0.01;
    double lr_decay = 1.0;  // learning rate multiplier applied after each epoch
    std::uint64_t seed = 1;
    LossKind loss = LossKind::MseTransformed;
    OptimizerKind optimizer = OptimizerKind::AdaGrad;
    bool shuffle = true;

    void validate() const;
};

struct TrainResult {
    NetworkParams params;
    std::vector<double> history;  // mean mini-batch objective per epoch
};

// Mini-batch training. Throws NonFiniteLoss naming the epoch and batch.
TrainResult train(const NetworkSpec& spec, NetworkParams params, const Matrix& x, std::span<const double> y,
                  const TrainConfig& config);

void write_loss_history(const std::filesystem::path& path, std::span<const double> history);

// ---------------------------------------------------------------------------
// Architecture families

// h1 = round(2/3 n), h_{k+1} = round(2/3 h_k), raised to 4, ending at 4;
// every prefix of the chain.
std::vector<std::vector<std::size_t>> descending_architectures(std::size_t n_inputs);
// Two hidden layers of each width.
std::vector<std::vector<std::size_t>> wide_architectures(std::span<const std::size_t> widths);
// floor(n / 2) units per layer, one architecture per depth.
std::vector<std::vector<std::size_t>> deep_architectures(std::size_t n_inputs, std::span<const std::size_t> depths);

}  // namespace zinn
