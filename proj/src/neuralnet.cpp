// Copyright 2026 The qtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qst/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qst/error.hpp"
#include "qst/text_io.hpp"

namespace qst {

std::string to_string(Activation a) {
    switch (a) {
    case Activation::Relu:
        return "relu";
    case Activation::Tanh:
        return "tanh";
    case Activation::Identity:
        return "identity";
    }
    return "?";
}

Activation activation_from_string(const std::string &s) {
    if (s == "relu") {
        return Activation::Relu;
    }
    if (s == "tanh") {
        return Activation::Tanh;
    }
    if (s == "identity") {
        return Activation::Identity;
    }
    fail(ErrorKind::Parse, "unknown activation '" + s + "'");
}

std::string to_string(HeadKind h) {
    return h == HeadKind::Bloch ? "bloch" : "cholesky";
}

HeadKind head_from_string(const std::string &s) {
    if (s == "bloch") {
        return HeadKind::Bloch;
    }
    if (s == "cholesky") {
        return HeadKind::Cholesky;
    }
    fail(ErrorKind::Parse, "unknown model head '" + s + "' (expected bloch or cholesky)");
}

std::vector<LayerSpec> make_architecture(const std::vector<int> &hidden, int output_width) {
    std::vector<LayerSpec> arch;
    for (int w : hidden) {
        arch.push_back({w, Activation::Relu});
    }
    arch.push_back({output_width, Activation::Tanh});
    return arch;
}

std::vector<LayerSpec> default_architecture(int d) {
    return make_architecture({200, 180, 180, 160, 160, 160, 160, 100}, d * d);
}

namespace {

void apply_activation(Activation a, RealMatrix &y) {
    switch (a) {
    case Activation::Relu:
        y = y.cwiseMax(0.0);
        break;
    case Activation::Tanh:
        y = y.array().tanh();
        break;
    case Activation::Identity:
        break;
    }
}

} // namespace

Mlp::Mlp(int input_width, std::vector<LayerSpec> layers) : input_(input_width), layers_(std::move(layers)) {
    if (input_ < 1 || layers_.empty()) {
        fail(ErrorKind::InvalidArgument, "Mlp: need a positive input width and at least one layer");
    }
    std::size_t offset = 0;
    int fan_in = input_;
    for (const auto &l : layers_) {
        if (l.width < 1) {
            fail(ErrorKind::InvalidArgument, "Mlp: layer width must be >= 1");
        }
        offsets_.push_back(offset);
        offset += static_cast<std::size_t>(l.width) * fan_in + l.width;
        fan_in = l.width;
    }
    params_.assign(offset, 0.0);
}

Mlp Mlp::initialized(int input_width, std::vector<LayerSpec> layers, Rng &rng) {
    Mlp net(input_width, std::move(layers));
    for (int k = 0; k < net.layer_count(); ++k) {
        const int fan_in = net.layer_input_width(k);
        const int fan_out = net.layers_[k].width;
        const double limit = net.layers_[k].activation == Activation::Relu
                                 ? std::sqrt(6.0 / fan_in)
                                 : std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        auto w = net.weights(k);
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            w.data()[i] = u(rng);
        }
    }
    return net;
}

Eigen::Map<RealMatrix> Mlp::weights(int k) {
    return {params_.data() + offsets_[k], layers_[k].width, layer_input_width(k)};
}

Eigen::Map<const RealMatrix> Mlp::weights(int k) const {
    return {params_.data() + offsets_[k], layers_[k].width, layer_input_width(k)};
}

Eigen::Map<RealVector> Mlp::bias(int k) {
    return {params_.data() + offsets_[k] + static_cast<std::size_t>(layers_[k].width) * layer_input_width(k),
            layers_[k].width};
}

Eigen::Map<const RealVector> Mlp::bias(int k) const {
    return {params_.data() + offsets_[k] + static_cast<std::size_t>(layers_[k].width) * layer_input_width(k),
            layers_[k].width};
}

RealVector Mlp::forward(const RealVector &input) const {
    if (input.size() != input_) {
        fail(ErrorKind::Dimension, "Mlp::forward: input has width " + std::to_string(input.size()) +
                                       ", network expects " + std::to_string(input_));
    }
    RealVector z = input;
    for (int k = 0; k < layer_count(); ++k) {
        RealMatrix y = weights(k) * z + bias(k);
        apply_activation(layers_[k].activation, y);
        z = y.col(0);
    }
    return z;
}

RealMatrix Mlp::forward_batch(const RealMatrix &inputs) const {
    if (inputs.rows() != input_) {
        fail(ErrorKind::Dimension, "Mlp::forward_batch: input width mismatch");
    }
    RealMatrix z = inputs;
    for (int k = 0; k < layer_count(); ++k) {
        RealMatrix y = weights(k) * z;
        y.colwise() += bias(k);
        apply_activation(layers_[k].activation, y);
        z = std::move(y);
    }
    return z;
}

RealVector forward(const Mlp &net, const FrequencyVector &input) {
    return net.forward(input.values);
}

double mse_loss(const RealVector &pred, const RealVector &target) {
    if (pred.size() != target.size()) {
        fail(ErrorKind::Dimension, "mse_loss: length mismatch");
    }
    return (target - pred).squaredNorm();
}

double mse_loss(const RealMatrix &pred, const RealMatrix &target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        fail(ErrorKind::Dimension, "mse_loss: shape mismatch");
    }
    if (pred.cols() == 0) {
        fail(ErrorKind::InvalidArgument, "mse_loss: empty batch");
    }
    return (target - pred).squaredNorm() / double(pred.cols());
}

Gradient backward(const Mlp &net, const RealMatrix &inputs, const RealMatrix &targets) {
    if (inputs.rows() != net.input_width() || targets.rows() != net.output_width() ||
        inputs.cols() != targets.cols() || inputs.cols() == 0) {
        fail(ErrorKind::Dimension, "backward: batch shapes do not match the network");
    }
    const int layers = net.layer_count();
    const double batch = double(inputs.cols());

    // pre[k] = W_k z_{k-1} + b_k, post[k] = activation(pre[k]); post[-1] = inputs
    std::vector<RealMatrix> pre(layers);
    std::vector<RealMatrix> post(layers);
    for (int k = 0; k < layers; ++k) {
        const RealMatrix &z = k == 0 ? inputs : post[k - 1];
        pre[k] = net.weights(k) * z;
        pre[k].colwise() += net.bias(k);
        post[k] = pre[k];
        apply_activation(net.layers()[k].activation, post[k]);
    }

    Gradient g;
    g.values.assign(net.parameter_count(), 0.0);
    g.loss = (targets - post.back()).squaredNorm() / batch;

    RealMatrix delta = (2.0 / batch) * (post.back() - targets);
    for (int k = layers - 1; k >= 0; --k) {
        switch (net.layers()[k].activation) {
        case Activation::Relu:
            delta = (pre[k].array() > 0.0).select(delta, 0.0);
            break;
        case Activation::Tanh:
            delta.array() *= 1.0 - post[k].array().square();
            break;
        case Activation::Identity:
            break;
        }
        const RealMatrix &z = k == 0 ? inputs : post[k - 1];
        const int out = net.layers()[k].width;
        const int in = net.layer_input_width(k);
        double *base = g.values.data() + net.weight_offset(k);
        Eigen::Map<RealMatrix>(base, out, in).noalias() = delta * z.transpose();
        Eigen::Map<RealVector>(base + static_cast<std::size_t>(out) * in, out) = delta.rowwise().sum();
        if (k > 0) {
            delta = net.weights(k).transpose() * delta;
        }
    }
    return g;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) {
        fail(ErrorKind::InvalidArgument, "TrainConfig: learning rate must be positive");
    }
    if (!(mu >= 0.0 && mu < 1.0) || !(nu >= 0.0 && nu < 1.0)) {
        fail(ErrorKind::InvalidArgument, "TrainConfig: decay rates must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) {
        fail(ErrorKind::InvalidArgument, "TrainConfig: epsilon must be positive");
    }
    if (batches_per_epoch < 1 || max_epochs < 1 || patience < 1) {
        fail(ErrorKind::InvalidArgument, "TrainConfig: batches, epochs and patience must be >= 1");
    }
}

void nadam_step(std::vector<double> &params, const std::vector<double> &grads, NadamState &state,
                const TrainConfig &config) {
    if (grads.size() != params.size()) {
        fail(ErrorKind::Dimension, "nadam_step: gradient and parameter sizes differ");
    }
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0);
        state.n.assign(params.size(), 0.0);
    }
    state.t += 1;
    state.mu_product *= config.mu;
    const double mu = config.mu;
    const double nu = config.nu;
    const double g_scale = 1.0 - state.mu_product;
    const double m_scale = 1.0 - state.mu_product * mu;
    const double n_scale = 1.0 - std::pow(nu, double(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        const double g_hat = g / g_scale;
        state.m[i] = mu * state.m[i] + (1.0 - mu) * g;
        const double m_hat = state.m[i] / m_scale;
        state.n[i] = nu * state.n[i] + (1.0 - nu) * g * g;
        const double n_hat = state.n[i] / n_scale;
        const double m_bar = (1.0 - mu) * g_hat + mu * m_hat;
        params[i] -= config.learning_rate * m_bar / (std::sqrt(n_hat) + config.epsilon);
    }
}

bool EarlyStopping::update(int epoch, double loss) {
    if (best_epoch_ < 0 || loss < best_loss_) {
        best_epoch_ = epoch;
        best_loss_ = loss;
        since_best_ = 0;
        improved_last_ = true;
        return false;
    }
    improved_last_ = false;
    ++since_best_;
    return since_best_ >= patience_;
}

namespace {

RealMatrix gather_columns(const RealMatrix &m, const std::vector<Eigen::Index> &idx, std::size_t begin,
                          std::size_t end) {
    RealMatrix out(m.rows(), static_cast<Eigen::Index>(end - begin));
    for (std::size_t i = begin; i < end; ++i) {
        out.col(static_cast<Eigen::Index>(i - begin)) = m.col(idx[i]);
    }
    return out;
}

void check_dataset(const Dataset &ds, const Mlp &net, const char *which) {
    if (ds.inputs.cols() != ds.targets.cols()) {
        fail(ErrorKind::Dimension, std::string("train: ") + which + " inputs and targets differ in count");
    }
    if (ds.size() > 0 && (ds.inputs.rows() != net.input_width() || ds.targets.rows() != net.output_width())) {
        fail(ErrorKind::Dimension, std::string("train: ") + which + " widths do not match the architecture");
    }
}

} // namespace

TrainResult train(const std::vector<LayerSpec> &architecture, const Dataset &training,
                  const Dataset &validation, const TrainConfig &config) {
    Rng init_rng(derive_seed(config.seed, 0, 1));
    return train(Mlp::initialized(static_cast<int>(training.inputs.rows()), architecture, init_rng),
                 training, validation, config);
}

TrainResult train(Mlp initial, const Dataset &training, const Dataset &validation,
                  const TrainConfig &config) {
    config.validate();
    if (training.size() == 0) {
        fail(ErrorKind::InvalidArgument, "train: empty training set");
    }
    check_dataset(training, initial, "training");
    check_dataset(validation, initial, "validation");

    TrainResult result{std::move(initial), {}};
    Mlp &net = result.model;
    TrainingHistory &hist = result.history;
    const bool has_validation = validation.size() > 0;
    const Dataset &monitored = has_validation ? validation : training;

    hist.initial_validation_loss = mse_loss(net.forward_batch(monitored.inputs), monitored.targets);

    Rng shuffle_rng(derive_seed(config.seed, 0, 2));
    NadamState state(net.parameter_count());
    EarlyStopping stopper(config.patience);
    std::vector<double> best = net.parameters();

    const auto n = static_cast<std::size_t>(training.size());
    const std::size_t batches = std::min<std::size_t>(static_cast<std::size_t>(config.batches_per_epoch), n);
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t begin = b * n / batches;
            const std::size_t end = (b + 1) * n / batches;
            const RealMatrix x = gather_columns(training.inputs, order, begin, end);
            const RealMatrix y = gather_columns(training.targets, order, begin, end);
            const Gradient g = backward(net, x, y);
            if (!std::isfinite(g.loss)) {
                fail(ErrorKind::Numeric, "train: loss became non-finite in epoch " + std::to_string(epoch) +
                                             ", batch " + std::to_string(b));
            }
            epoch_loss += g.loss * double(end - begin);
            nadam_step(net.parameters(), g.values, state, config);
        }
        hist.train_loss.push_back(epoch_loss / double(n));

        const double monitored_loss =
            has_validation ? mse_loss(net.forward_batch(validation.inputs), validation.targets)
                           : mse_loss(net.forward_batch(training.inputs), training.targets);
        if (!std::isfinite(monitored_loss)) {
            fail(ErrorKind::Numeric, "train: validation loss became non-finite in epoch " + std::to_string(epoch));
        }
        hist.validation_loss.push_back(monitored_loss);
        const bool stop = stopper.update(epoch, monitored_loss);
        if (stopper.improved_last()) {
            best = net.parameters();
        }
        if (stop) {
            hist.stopped_early = true;
            break;
        }
    }
    hist.best_epoch = stopper.best_epoch();
    net.parameters() = std::move(best);
    return result;
}

HermitianMatrix predict_state_bloch(const Mlp &net, const OperatorBasis &basis, const FrequencyVector &f) {
    if (net.output_width() != basis.size()) {
        fail(ErrorKind::Dimension, "predict_state_bloch: network output width does not match d^2");
    }
    return from_bloch({basis.dim(), net.forward(f.values)}, basis);
}

CholeskyPrediction predict_state_cholesky(const Mlp &net, int d, const FrequencyVector &f) {
    if (net.output_width() != d * d) {
        fail(ErrorKind::Dimension, "predict_state_cholesky: network output width does not match d^2");
    }
    const CholeskyFactor a = CholeskyFactor::from_real(d, net.forward(f.values));
    if (a.matrix().squaredNorm() == 0.0) {
        return {DensityMatrix(ComplexMatrix::Identity(d, d) / double(d), trusted), true};
    }
    return {cholesky_to_state(a), false};
}

void save_model(const Model &model, const std::string &path) {
    KeyValueFile header;
    header.set("format_version", std::to_string(kModelFormatVersion));
    header.set("head", to_string(model.head));
    header.set("dim", std::to_string(model.dim));
    header.set("basis", model.basis);
    header.set("seed", std::to_string(model.seed));
    header.set("input", std::to_string(model.net.input_width()));
    std::string layers;
    for (const auto &l : model.net.layers()) {
        if (!layers.empty()) {
            layers += ',';
        }
        layers += std::to_string(l.width) + ":" + to_string(l.activation);
    }
    header.set("layers", layers);
    header.set("parameters", std::to_string(model.net.parameter_count()));

    std::string out = "# qtomo model\n" + header.serialize() + "---\n";
    for (double v : model.net.parameters()) {
        out += format_double(v);
        out += '\n';
    }
    write_file(path, out);
}

Model load_model(const std::string &path) {
    const std::string text = read_file(path);
    const auto sep = text.find("\n---\n");
    if (sep == std::string::npos) {
        fail(ErrorKind::Parse, path + ": missing '---' header terminator");
    }
    const KeyValueFile header = KeyValueFile::parse(text.substr(0, sep + 1), path);
    const auto version = parse_int(header.get("format_version"), path + ": format_version");
    if (version != kModelFormatVersion) {
        fail(ErrorKind::Parse, path + ": unsupported model format version " + std::to_string(version));
    }

    Model model;
    model.head = head_from_string(header.get("head"));
    model.dim = static_cast<int>(parse_int(header.get("dim"), path + ": dim"));
    model.basis = header.get("basis");
    model.seed = parse_uint(header.get("seed"), path + ": seed");
    const int input = static_cast<int>(parse_int(header.get("input"), path + ": input"));
    std::vector<LayerSpec> layers;
    for (auto token : split_fields(header.get("layers"), ',')) {
        const auto colon = token.find(':');
        if (colon == std::string_view::npos) {
            fail(ErrorKind::Parse, path + ": malformed layer '" + std::string(token) + "'");
        }
        layers.push_back({static_cast<int>(parse_int(token.substr(0, colon), path + ": layer width")),
                          activation_from_string(std::string(token.substr(colon + 1)))});
    }
    model.net = Mlp(input, std::move(layers));
    if (model.dim < 2 || model.net.output_width() != model.dim * model.dim) {
        fail(ErrorKind::Parse, path + ": output width does not equal dim^2");
    }
    const auto count = parse_uint(header.get("parameters"), path + ": parameters");
    if (count != model.net.parameter_count()) {
        fail(ErrorKind::Parse, path + ": parameter count does not match the architecture");
    }

    std::istringstream body(text.substr(sep + 5));
    std::string line;
    auto &params = model.net.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!std::getline(body, line)) {
            fail(ErrorKind::Parse, path + ": truncated after parameter " + std::to_string(i));
        }
        params[i] = parse_double(line, path + ": parameter " + std::to_string(i));
    }
    return model;
}

} // namespace qst
