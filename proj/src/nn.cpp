#include "nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "csv.hpp"
#include "error.hpp"

namespace zinn {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::ReLU: return "relu";
        case Activation::ELU: return "elu";
        case Activation::Identity: return "identity";
        case Activation::Logistic: return "logistic";
    }
    return "relu";
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::ReLU;
    if (s == "elu") return Activation::ELU;
    if (s == "identity") return Activation::Identity;
    if (s == "logistic") return Activation::Logistic;
    fail(ErrorCode::InvalidArgument, "unknown activation '" + s + "'");
}

double activate(Activation a, double z) {
    switch (a) {
        case Activation::ReLU: return z > 0.0 ? z : 0.0;
        case Activation::ELU: return z >= 0.0 ? z : std::expm1(z);
        case Activation::Identity: return z;
        case Activation::Logistic:
            if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
            else {
                const double e = std::exp(z);
                return e / (1.0 + e);
            }
    }
    return z;
}

double activate_grad(Activation a, double z) {
    switch (a) {
        case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
        case Activation::ELU: return z >= 0.0 ? 1.0 : std::exp(z);
        case Activation::Identity: return 1.0;
        case Activation::Logistic: {
            const double s = activate(a, z);
            return s * (1.0 - s);
        }
    }
    return 1.0;
}

void NetworkSpec::validate() const {
    if (input < 1) fail(ErrorCode::InvalidArgument, "network input width must be >= 1");
    for (auto h : hidden) {
        if (h < 1) fail(ErrorCode::InvalidArgument, "hidden widths must be >= 1");
    }
    if (hidden_activation != Activation::ReLU && hidden_activation != Activation::ELU) {
        fail(ErrorCode::InvalidArgument, "hidden activation must be relu or elu");
    }
    if (output_activation != Activation::Identity && output_activation != Activation::Logistic) {
        fail(ErrorCode::InvalidArgument, "output activation must be identity or logistic");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) fail(ErrorCode::InvalidArgument, "dropout must be in [0, 1)");
    if (!(l2 >= 0.0) || !std::isfinite(l2)) fail(ErrorCode::InvalidArgument, "l2 must be finite and >= 0");
}

std::size_t NetworkSpec::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) n += fan_out(l) * (fan_in(l) + 1);
    return n;
}

std::string NetworkSpec::architecture() const {
    std::string s = to_string(hidden_activation) + "[";
    for (std::size_t i = 0; i < hidden.size(); ++i) s += (i ? "," : "") + std::to_string(hidden[i]);
    return s + "]";
}

std::vector<LayerOffsets> layer_offsets(const NetworkSpec& spec) {
    std::vector<LayerOffsets> out;
    std::size_t at = 0;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        const auto w = spec.fan_out(l) * spec.fan_in(l);
        out.push_back({at, at + w});
        at += w + spec.fan_out(l);
    }
    return out;
}

NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    NetworkParams p;
    p.values.assign(spec.parameter_count(), 0.0);
    Rng rng(seed);
    const auto offsets = layer_offsets(spec);
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        const double bound = std::sqrt(6.0 / static_cast<double>(spec.fan_in(l)));
        for (std::size_t k = 0; k < spec.fan_out(l) * spec.fan_in(l); ++k) {
            p.values[offsets[l].weights + k] = rng.uniform(-bound, bound);
        }
    }
    return p;
}

double forward(const NetworkParams& params, const NetworkSpec& spec, std::span<const double> input, Mode mode,
               Rng* rng, ForwardCache& cache) {
    if (input.size() != spec.input) {
        fail(ErrorCode::ShapeMismatch, "input has " + std::to_string(input.size()) + " values, network expects " +
                                           std::to_string(spec.input));
    }
    if (params.values.size() != spec.parameter_count()) {
        fail(ErrorCode::ShapeMismatch, "parameter vector does not match network spec");
    }
    const bool drop = mode == Mode::Train && spec.dropout > 0.0;
    if (drop && rng == nullptr) fail(ErrorCode::InvalidArgument, "training-mode dropout needs a random generator");

    const auto layers = spec.layer_count();
    cache.pre.resize(layers);
    cache.post.resize(layers + 1);
    cache.mask.resize(spec.hidden.size());
    cache.post[0].assign(input.begin(), input.end());

    const double keep_scale = 1.0 / (1.0 - spec.dropout);
    std::size_t at = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        const auto in = spec.fan_in(l);
        const auto out = spec.fan_out(l);
        const double* w = params.values.data() + at;
        const double* b = w + out * in;
        at += out * (in + 1);
        const auto& a = cache.post[l];
        auto& z = cache.pre[l];
        auto& h = cache.post[l + 1];
        z.resize(out);
        h.resize(out);
        const bool hidden = l + 1 < layers;
        const auto act = hidden ? spec.hidden_activation : spec.output_activation;
        for (std::size_t i = 0; i < out; ++i) {
            double s = b[i];
            const double* row = w + i * in;
            for (std::size_t j = 0; j < in; ++j) s += row[j] * a[j];
            z[i] = s;
            h[i] = activate(act, s);
        }
        if (hidden) {
            auto& m = cache.mask[l];
            m.assign(out, 1.0);
            if (drop) {
                for (std::size_t i = 0; i < out; ++i) {
                    m[i] = rng->bernoulli(1.0 - spec.dropout) ? keep_scale : 0.0;
                    h[i] *= m[i];
                }
            }
        }
    }
    return cache.output();
}

double predict(const NetworkParams& params, const NetworkSpec& spec, std::span<const double> input) {
    ForwardCache cache;
    return forward(params, spec, input, Mode::Eval, nullptr, cache);
}

std::vector<double> predict(const NetworkParams& params, const NetworkSpec& spec, const Matrix& inputs) {
    std::vector<double> out;
    out.reserve(inputs.rows());
    ForwardCache cache;
    for (std::size_t r = 0; r < inputs.rows(); ++r) {
        out.push_back(forward(params, spec, inputs.row(r), Mode::Eval, nullptr, cache));
    }
    return out;
}

double loss_value(LossKind kind, double prediction, double target, bool* clamped) {
    if (kind == LossKind::MseTransformed) {
        const double d = prediction - target;
        return d * d;
    }
    double p = prediction;
    if (p < kBceEpsilon || p > 1.0 - kBceEpsilon) {
        p = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
        if (clamped) *clamped = true;
    }
    return -(target * std::log(p) + (1.0 - target) * std::log1p(-p));
}

double loss_grad(LossKind kind, double prediction, double target) {
    if (kind == LossKind::MseTransformed) return 2.0 * (prediction - target);
    const double p = std::clamp(prediction, kBceEpsilon, 1.0 - kBceEpsilon);
    return (p - target) / (p * (1.0 - p));
}

void backward_from_output_delta(const NetworkParams& params, const NetworkSpec& spec, const ForwardCache& cache,
                                double output_delta, double scale, std::vector<double>& grads) {
    if (grads.size() != params.values.size() || cache.pre.size() != spec.layer_count()) {
        fail(ErrorCode::ShapeMismatch, "gradient buffer or cache does not match network spec");
    }
    const auto offsets = layer_offsets(spec);
    std::vector<double> delta{output_delta * scale};
    std::vector<double> below;
    for (std::size_t l = spec.layer_count(); l-- > 0;) {
        const auto in = spec.fan_in(l);
        const auto out = spec.fan_out(l);
        const double* w = params.values.data() + offsets[l].weights;
        double* gw = grads.data() + offsets[l].weights;
        double* gb = grads.data() + offsets[l].biases;
        const auto& a = cache.post[l];
        for (std::size_t i = 0; i < out; ++i) {
            const double d = delta[i];
            if (d == 0.0) continue;
            gb[i] += d;
            double* row = gw + i * in;
            for (std::size_t j = 0; j < in; ++j) row[j] += d * a[j];
        }
        if (l == 0) break;
        below.assign(in, 0.0);
        for (std::size_t i = 0; i < out; ++i) {
            const double d = delta[i];
            if (d == 0.0) continue;
            const double* row = w + i * in;
            for (std::size_t j = 0; j < in; ++j) below[j] += row[j] * d;
        }
        const auto& z = cache.pre[l - 1];
        const auto& m = cache.mask[l - 1];
        for (std::size_t j = 0; j < in; ++j) below[j] *= m[j] * activate_grad(spec.hidden_activation, z[j]);
        delta.swap(below);
    }
}

void add_l2_grad(const NetworkParams& params, const NetworkSpec& spec, std::vector<double>& grads) {
    if (spec.l2 == 0.0) return;
    const auto offsets = layer_offsets(spec);
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        for (std::size_t k = offsets[l].weights; k < offsets[l].biases; ++k) grads[k] += 2.0 * spec.l2 * params.values[k];
    }
}

double l2_penalty(const NetworkParams& params, const NetworkSpec& spec) {
    if (spec.l2 == 0.0) return 0.0;
    double s = 0.0;
    for (const auto& o : layer_offsets(spec)) {
        for (std::size_t k = o.weights; k < o.biases; ++k) s += params.values[k] * params.values[k];
    }
    return spec.l2 * s;
}

void backward(const NetworkParams& params, const NetworkSpec& spec, const ForwardCache& cache, double loss_gradient,
              std::vector<double>& grads) {
    const double z_out = cache.pre.back()[0];
    backward_from_output_delta(params, spec, cache, loss_gradient * activate_grad(spec.output_activation, z_out), 1.0,
                               grads);
    add_l2_grad(params, spec, grads);
}

// ---------------------------------------------------------------------------

std::string to_string(OptimizerKind k) { return k == OptimizerKind::AdaGrad ? "adagrad" : "adam"; }

OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "adagrad") return OptimizerKind::AdaGrad;
    if (s == "adam") return OptimizerKind::Adam;
    fail(ErrorCode::InvalidArgument, "unknown optimizer '" + s + "'");
}

OptimizerState make_optimizer(OptimizerKind kind, std::size_t parameter_count, double learning_rate) {
    OptimizerState s;
    s.kind = kind;
    s.learning_rate = learning_rate;
    s.epsilon = kind == OptimizerKind::AdaGrad ? 1e-10 : 1e-8;
    s.first.assign(parameter_count, 0.0);
    if (kind == OptimizerKind::Adam) s.second.assign(parameter_count, 0.0);
    return s;
}

void adagrad_step(OptimizerState& state, std::vector<double>& params, std::span<const double> grads) {
    if (grads.size() != params.size() || state.first.size() != params.size()) {
        fail(ErrorCode::ShapeMismatch, "optimizer state does not match parameters");
    }
    ++state.step;
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double g = grads[k];
        if (g == 0.0) continue;
        state.first[k] += g * g;
        params[k] -= state.learning_rate * g / (std::sqrt(state.first[k]) + state.epsilon);
    }
}

void adam_step(OptimizerState& state, std::vector<double>& params, std::span<const double> grads) {
    if (grads.size() != params.size() || state.first.size() != params.size() ||
        state.second.size() != params.size()) {
        fail(ErrorCode::ShapeMismatch, "optimizer state does not match parameters");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double g = grads[k];
        state.first[k] = state.beta1 * state.first[k] + (1.0 - state.beta1) * g;
        state.second[k] = state.beta2 * state.second[k] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.first[k] / c1;
        const double v_hat = state.second[k] / c2;
        params[k] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

void optimizer_step(OptimizerState& state, std::vector<double>& params, std::span<const double> grads) {
    if (state.kind == OptimizerKind::AdaGrad) adagrad_step(state, params, grads);
    else adam_step(state, params, grads);
}

void TrainConfig::validate() const {
    if (batch_size < 1) fail(ErrorCode::InvalidArgument, "batch size must be >= 1");
    if (epochs < 1) fail(ErrorCode::InvalidArgument, "epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        fail(ErrorCode::InvalidArgument, "learning rate must be positive");
    }
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) fail(ErrorCode::InvalidArgument, "lr decay must be in (0, 1]");
}

TrainResult train(const NetworkSpec& spec, NetworkParams params, const Matrix& x, std::span<const double> y,
                  const TrainConfig& config) {
    spec.validate();
    config.validate();
    if (x.rows() == 0) fail(ErrorCode::InvalidArgument, "no training rows");
    if (x.rows() != y.size()) fail(ErrorCode::ShapeMismatch, "feature rows and targets differ in length");
    if (x.cols() != spec.input) fail(ErrorCode::ShapeMismatch, "feature width does not match network input");
    if (params.values.size() != spec.parameter_count()) {
        fail(ErrorCode::ShapeMismatch, "parameter vector does not match network spec");
    }

    // With a logistic output and BCE the output delta simplifies to p - y.
    const bool fused = config.loss == LossKind::BinaryCrossEntropy && spec.output_activation == Activation::Logistic;

    Rng rng(config.seed);
    auto state = make_optimizer(config.optimizer, params.values.size(), config.learning_rate);
    auto order = iota_indices(x.rows());
    std::vector<double> grads(params.values.size());
    ForwardCache cache;
    TrainResult result;
    result.history.reserve(config.epochs);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const auto end = std::min(order.size(), start + config.batch_size);
            const double scale = 1.0 / static_cast<double>(end - start);
            std::fill(grads.begin(), grads.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const auto r = order[k];
                const double pred = forward(params, spec, x.row(r), Mode::Train, &rng, cache);
                batch_loss += loss_value(config.loss, pred, y[r]);
                double delta;
                if (fused) {
                    delta = pred - y[r];
                } else {
                    delta = loss_grad(config.loss, pred, y[r]) *
                            activate_grad(spec.output_activation, cache.pre.back()[0]);
                }
                backward_from_output_delta(params, spec, cache, delta, scale, grads);
            }
            batch_loss = batch_loss * scale + l2_penalty(params, spec);
            if (!std::isfinite(batch_loss)) {
                fail(ErrorCode::NonFiniteLoss, "non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                                                   std::to_string(batches + 1));
            }
            add_l2_grad(params, spec, grads);
            optimizer_step(state, params.values, grads);
            epoch_loss += batch_loss;
            ++batches;
        }
        result.history.push_back(epoch_loss / static_cast<double>(batches));
        state.learning_rate *= config.lr_decay;
    }
    result.params = std::move(params);
    return result;
}

void write_loss_history(const std::filesystem::path& path, std::span<const double> history) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << "epoch,train_loss\n";
    for (std::size_t i = 0; i < history.size(); ++i) out << i + 1 << ',' << csv::format_number(history[i]) << '\n';
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> descending_architectures(std::size_t n_inputs) {
    if (n_inputs < 1) fail(ErrorCode::InvalidArgument, "need at least one input");
    std::vector<std::size_t> chain;
    double prev = static_cast<double>(n_inputs);
    while (true) {
        auto h = static_cast<std::size_t>(std::round(2.0 * prev / 3.0));
        h = std::max<std::size_t>(h, 4);
        chain.push_back(h);
        if (h == 4) break;
        prev = static_cast<double>(h);
    }
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t k = 1; k <= chain.size(); ++k) out.emplace_back(chain.begin(), chain.begin() + k);
    return out;
}

std::vector<std::vector<std::size_t>> wide_architectures(std::span<const std::size_t> widths) {
    if (widths.empty()) fail(ErrorCode::InvalidArgument, "no widths given");
    std::vector<std::vector<std::size_t>> out;
    for (auto w : widths) {
        if (w < 1) fail(ErrorCode::InvalidArgument, "widths must be >= 1");
        out.push_back({w, w});
    }
    return out;
}

std::vector<std::vector<std::size_t>> deep_architectures(std::size_t n_inputs, std::span<const std::size_t> depths) {
    if (depths.empty()) fail(ErrorCode::InvalidArgument, "no depths given");
    const auto width = std::max<std::size_t>(1, n_inputs / 2);
    std::vector<std::vector<std::size_t>> out;
    for (auto d : depths) {
        if (d < 1) fail(ErrorCode::InvalidArgument, "depths must be >= 1");
        out.emplace_back(d, width);
    }
    return out;
}

}  // namespace zinn
