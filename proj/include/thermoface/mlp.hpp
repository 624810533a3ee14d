#pragma once

// Five-layer tan-sigmoid perceptron [D, 100, 50, 10, C] trained by full-batch
// gradient descent with momentum on a sum-of-squares loss.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "thermoface/error.hpp"
#include "thermoface/random.hpp"

namespace thermoface {

inline constexpr std::size_t hidden_sizes[3] = {100, 50, 10};

/// Fully connected layer; weights are fan_out x fan_in, row-major.
struct DenseLayer {
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    std::vector<double> weights;
    std::vector<double> bias;
    std::vector<double> weight_step; // previous update, for momentum
    std::vector<double> bias_step;

    double& w(std::size_t out, std::size_t in) { return weights[out * fan_in + in]; }
    double w(std::size_t out, std::size_t in) const { return weights[out * fan_in + in]; }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct MlpModel {
    std::vector<std::size_t> layer_sizes; // D, 100, 50, 10, C
    std::vector<DenseLayer> layers;

    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t num_classes() const { return layer_sizes.back(); }

    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

struct TrainConfig {
    double learning_rate = 0.05;
    double momentum = 0.9; // mc in [0, 1]
    int max_epochs = 5000;
    double target_loss = 1e-3;
    std::uint64_t seed = 42;
};

struct Example {
    std::vector<double> input;
    std::size_t target = 0; // class index
};

struct TrainResult {
    MlpModel model;
    std::vector<double> loss_history; // loss at the start of each epoch
};

namespace detail {

inline void check_topology(std::size_t feature_dim, std::size_t num_classes)
{
    if (feature_dim < 1 || num_classes < 2)
        throw Error(ErrorCode::InvalidTopology, "need feature_dim >= 1 and num_classes >= 2");
}

} // namespace detail

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases and momentum.
inline MlpModel init_model(std::size_t feature_dim, std::size_t num_classes, std::uint64_t seed)
{
    detail::check_topology(feature_dim, num_classes);
    MlpModel m;
    m.layer_sizes = {feature_dim, hidden_sizes[0], hidden_sizes[1], hidden_sizes[2], num_classes};
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        DenseLayer layer;
        layer.fan_in = m.layer_sizes[l];
        layer.fan_out = m.layer_sizes[l + 1];
        const double limit = 1.0 / std::sqrt(static_cast<double>(layer.fan_in));
        layer.weights.resize(layer.fan_in * layer.fan_out);
        for (auto& v : layer.weights)
            v = (2.0 * detail::unit_uniform(rng) - 1.0) * limit;
        layer.bias.assign(layer.fan_out, 0.0);
        layer.weight_step.assign(layer.weights.size(), 0.0);
        layer.bias_step.assign(layer.fan_out, 0.0);
        m.layers.push_back(std::move(layer));
    }
    return m;
}

namespace detail {

inline void check_input(const MlpModel& model, std::span<const double> x)
{
    if (x.size() != model.input_size())
        throw Error(ErrorCode::ShapeMismatch, "input length " + std::to_string(x.size()) + " != " +
                                                  std::to_string(model.input_size()));
}

// Activations of every layer, input included.
inline std::vector<std::vector<double>> forward_all(const MlpModel& model, std::span<const double> x)
{
    std::vector<std::vector<double>> acts;
    acts.reserve(model.layers.size() + 1);
    acts.emplace_back(x.begin(), x.end());

    // Count features are mostly zero; the first layer only visits nonzero inputs.
    std::vector<std::size_t> nonzero;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] != 0.0)
            nonzero.push_back(j);

    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        const auto& in = acts.back();
        std::vector<double> out(layer.fan_out);
        for (std::size_t i = 0; i < layer.fan_out; ++i) {
            const double* row = &layer.weights[i * layer.fan_in];
            double z = layer.bias[i];
            if (l == 0)
                for (auto j : nonzero)
                    z += row[j] * in[j];
            else
                for (std::size_t j = 0; j < layer.fan_in; ++j)
                    z += row[j] * in[j];
            out[i] = std::tanh(z);
        }
        acts.push_back(std::move(out));
    }
    return acts;
}

inline double target_value(std::size_t k, std::size_t cls) { return k == cls ? 1.0 : -1.0; }

} // namespace detail

/// Output-layer activations, each in (-1, 1).
inline std::vector<double> forward(const MlpModel& model, std::span<const double> x)
{
    detail::check_input(model, x);
    return detail::forward_all(model, x).back();
}

/// Index of the largest score; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> scores)
{
    return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

inline std::size_t predict(const MlpModel& model, std::span<const double> x)
{
    const auto scores = forward(model, x);
    return argmax(scores);
}

/// Per-parameter gradients, laid out like the model's layers.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;

    explicit Gradients(const MlpModel& m)
    {
        for (const auto& layer : m.layers) {
            weights.emplace_back(layer.weights.size(), 0.0);
            bias.emplace_back(layer.bias.size(), 0.0);
        }
    }
};

/// Squared-error loss 0.5 * sum_k (t_k - y_k)^2 with targets +1 for the
/// true class and -1 elsewhere.
inline double sample_loss(const MlpModel& model, std::span<const double> x, std::size_t target)
{
    const auto y = forward(model, x);
    double loss = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double e = detail::target_value(k, target) - y[k];
        loss += 0.5 * e * e;
    }
    return loss;
}

/// Adds the gradient of one sample's loss into `grad`; returns that loss.
inline double accumulate_gradient(const MlpModel& model, std::span<const double> x, std::size_t target,
                                  Gradients& grad)
{
    detail::check_input(model, x);
    if (target >= model.num_classes())
        throw Error(ErrorCode::InvalidClass, "target " + std::to_string(target) + " out of range");
    const auto acts = detail::forward_all(model, x);
    const auto& y = acts.back();

    double loss = 0.0;
    std::vector<double> delta(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double e = y[k] - detail::target_value(k, target);
        loss += 0.5 * e * e;
        delta[k] = e * (1.0 - y[k] * y[k]);
    }

    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const auto& layer = model.layers[l];
        const auto& in = acts[l];
        auto& gw = grad.weights[l];
        auto& gb = grad.bias[l];
        for (std::size_t i = 0; i < layer.fan_out; ++i) {
            const double d = delta[i];
            gb[i] += d;
            if (d == 0.0)
                continue;
            double* row = &gw[i * layer.fan_in];
            for (std::size_t j = 0; j < layer.fan_in; ++j)
                if (in[j] != 0.0)
                    row[j] += d * in[j];
        }
        if (l == 0)
            break;
        std::vector<double> back(layer.fan_in, 0.0);
        for (std::size_t i = 0; i < layer.fan_out; ++i) {
            const double d = delta[i];
            const double* row = &layer.weights[i * layer.fan_in];
            for (std::size_t j = 0; j < layer.fan_in; ++j)
                back[j] += row[j] * d;
        }
        for (std::size_t j = 0; j < layer.fan_in; ++j)
            back[j] *= 1.0 - in[j] * in[j];
        delta = std::move(back);
    }
    return loss;
}

/// Applies one momentum step from a summed gradient:
/// step = mc * previous_step - (1 - mc) * lr * grad, then w += step.
/// mc = 0 is plain gradient descent; mc = 1 repeats the previous step.
inline void apply_update(MlpModel& model, const Gradients& grad, double learning_rate, double momentum)
{
    const double scale = (1.0 - momentum) * learning_rate;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            layer.weight_step[i] = momentum * layer.weight_step[i] - scale * grad.weights[l][i];
            layer.weights[i] += layer.weight_step[i];
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
            layer.bias_step[i] = momentum * layer.bias_step[i] - scale * grad.bias[l][i];
            layer.bias[i] += layer.bias_step[i];
        }
    }
}

inline void validate(const TrainConfig& cfg)
{
    if (!(cfg.learning_rate > 0.0))
        throw Error(ErrorCode::InvalidConfig, "learning_rate must be positive");
    if (!(cfg.momentum >= 0.0 && cfg.momentum <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "momentum must lie in [0, 1]");
    if (cfg.max_epochs < 1)
        throw Error(ErrorCode::InvalidConfig, "max_epochs must be positive");
    if (!(cfg.target_loss >= 0.0))
        throw Error(ErrorCode::InvalidConfig, "target_loss must be non-negative");
}

/// Full-batch training: every epoch sums the gradient over all examples,
/// then updates once. Stops after max_epochs or once the loss reaches
/// target_loss.
inline TrainResult train_batch(MlpModel model, std::span<const Example> data, const TrainConfig& cfg)
{
    validate(cfg);
    if (data.empty())
        throw Error(ErrorCode::EmptyDataset, "no training examples");
    TrainResult result;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        Gradients grad(model);
        double loss = 0.0;
        for (const auto& ex : data)
            loss += accumulate_gradient(model, ex.input, ex.target, grad);
        result.loss_history.push_back(loss);
        if (loss <= cfg.target_loss)
            break;
        apply_update(model, grad, cfg.learning_rate, cfg.momentum);
    }
    result.model = std::move(model);
    return result;
}

inline constexpr double finite_difference_step = 1e-5;

/// Largest disagreement between backprop and central differences over every
/// weight and bias, measured as |a - n| / max(|a|, |n|, 1e-4).
inline double gradient_check(const MlpModel& model, std::span<const double> x, std::size_t target)
{
    Gradients analytic(model);
    accumulate_gradient(model, x, target, analytic);

    MlpModel probe = model;
    const double h = finite_difference_step;
    double worst = 0.0;
    auto compare = [&](double& param, double a) {
        const double saved = param;
        param = saved + h;
        const double up = sample_loss(probe, x, target);
        param = saved - h;
        const double down = sample_loss(probe, x, target);
        param = saved;
        const double n = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(a), std::abs(n), 1e-4});
        worst = std::max(worst, std::abs(a - n) / denom);
    };
    for (std::size_t l = 0; l < probe.layers.size(); ++l) {
        auto& layer = probe.layers[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i)
            compare(layer.weights[i], analytic.weights[l][i]);
        for (std::size_t i = 0; i < layer.bias.size(); ++i)
            compare(layer.bias[i], analytic.bias[l][i]);
    }
    return worst;
}

/// "MLPv1", then layer sizes, then per layer each weight row on its own line
/// followed by the bias line. Values use 17 significant digits.
inline void write_model(std::ostream& out, const MlpModel& model)
{
    out << "MLPv1\n";
    for (std::size_t i = 0; i < model.layer_sizes.size(); ++i)
        out << (i ? " " : "") << model.layer_sizes[i];
    out << '\n';
    char buf[32];
    auto put_row = [&](const double* v, std::size_t n) {
        for (std::size_t j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", v[j]);
            out << (j ? " " : "") << buf;
        }
        out << '\n';
    };
    for (const auto& layer : model.layers) {
        for (std::size_t i = 0; i < layer.fan_out; ++i)
            put_row(&layer.weights[i * layer.fan_in], layer.fan_in);
        put_row(layer.bias.data(), layer.fan_out);
    }
}

inline MlpModel read_model(std::istream& in)
{
    std::string magic;
    if (!std::getline(in, magic) || magic != "MLPv1")
        throw Error(ErrorCode::FormatError, "model file must start with MLPv1");
    std::string sizes_line;
    std::getline(in, sizes_line);
    std::vector<std::size_t> sizes;
    {
        std::size_t pos = 0;
        while (pos < sizes_line.size()) {
            std::size_t used = 0;
            sizes.push_back(std::stoul(sizes_line.substr(pos), &used));
            pos += used;
            while (pos < sizes_line.size() && sizes_line[pos] == ' ')
                ++pos;
        }
    }
    if (sizes.size() != 5 || sizes[1] != hidden_sizes[0] || sizes[2] != hidden_sizes[1] ||
        sizes[3] != hidden_sizes[2])
        throw Error(ErrorCode::InvalidTopology, "expected layer sizes D 100 50 10 C");
    MlpModel m = init_model(sizes.front(), sizes.back(), 0);
    auto read_value = [&in]() {
        std::string token;
        if (!(in >> token))
            throw Error(ErrorCode::FormatError, "truncated model file");
        try {
            return std::stod(token);
        } catch (const std::exception&) {
            throw Error(ErrorCode::FormatError, "bad number '" + token + "'");
        }
    };
    for (auto& layer : m.layers) {
        for (auto& w : layer.weights)
            w = read_value();
        for (auto& b : layer.bias)
            b = read_value();
    }
    return m;
}

} // namespace thermoface
