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

/**
 * @file
 * Feed-forward network estimator: a dense multilayer perceptron trained on
 * (frequencies -> Bloch vector | Cholesky factor) pairs with mean squared
 * error and the Nadam optimizer.
 *
 * Parameters are kept in one flat buffer. Layer k stores its weight matrix
 * (out x in, column-major) followed by its bias vector, so optimizer state
 * and serialization work on plain vectors.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qst/measurement.hpp"

namespace qst {

enum class Activation { Relu, Tanh, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string &s);

struct LayerSpec {
    int width = 0;
    Activation activation = Activation::Relu;
};

/// Hidden widths (200, 180, 180, 160, 160, 160, 160, 100) with ReLU and a
/// tanh output of width d^2.
std::vector<LayerSpec> default_architecture(int d);

/// ReLU hidden layers of the given widths followed by a tanh output layer.
std::vector<LayerSpec> make_architecture(const std::vector<int> &hidden, int output_width);

class Mlp {
  public:
    Mlp() = default;
    /// All parameters zero.
    Mlp(int input_width, std::vector<LayerSpec> layers);

    /// He-uniform weights for ReLU layers, Xavier-uniform otherwise; zero biases.
    static Mlp initialized(int input_width, std::vector<LayerSpec> layers, Rng &rng);

    [[nodiscard]] int input_width() const noexcept { return input_; }
    [[nodiscard]] int output_width() const noexcept { return layers_.empty() ? input_ : layers_.back().width; }
    [[nodiscard]] int layer_count() const noexcept { return static_cast<int>(layers_.size()); }
    [[nodiscard]] const std::vector<LayerSpec> &layers() const noexcept { return layers_; }
    [[nodiscard]] int layer_input_width(int k) const { return k == 0 ? input_ : layers_[k - 1].width; }

    [[nodiscard]] std::size_t parameter_count() const noexcept { return params_.size(); }
    [[nodiscard]] std::vector<double> &parameters() noexcept { return params_; }
    [[nodiscard]] const std::vector<double> &parameters() const noexcept { return params_; }

    [[nodiscard]] Eigen::Map<RealMatrix> weights(int k);
    [[nodiscard]] Eigen::Map<const RealMatrix> weights(int k) const;
    [[nodiscard]] Eigen::Map<RealVector> bias(int k);
    [[nodiscard]] Eigen::Map<const RealVector> bias(int k) const;

    /// Offset of layer k's weights in the flat buffer; bias follows.
    [[nodiscard]] std::size_t weight_offset(int k) const { return offsets_[k]; }

    [[nodiscard]] RealVector forward(const RealVector &input) const;
    /// Columns are samples.
    [[nodiscard]] RealMatrix forward_batch(const RealMatrix &inputs) const;

  private:
    int input_ = 0;
    std::vector<LayerSpec> layers_;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

RealVector forward(const Mlp &net, const FrequencyVector &input);

/// sum_k |target_k - pred_k|^2 for a single sample.
double mse_loss(const RealVector &pred, const RealVector &target);
/// Mean over columns of the per-sample squared error.
double mse_loss(const RealMatrix &pred, const RealMatrix &target);

struct Gradient {
    std::vector<double> values; ///< same layout as Mlp::parameters()
    double loss = 0.0;
};

/// Exact gradient of mse_loss(forward_batch(inputs), targets). The ReLU
/// derivative at 0 is taken as 0.
Gradient backward(const Mlp &net, const RealMatrix &inputs, const RealMatrix &targets);

struct TrainConfig {
    double learning_rate = 0.001;
    double mu = 0.9;
    double nu = 0.999;
    double epsilon = 1e-7;
    int batches_per_epoch = 100;
    int max_epochs = 500;
    int patience = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

struct NadamState {
    std::vector<double> m;
    std::vector<double> n;
    std::int64_t t = 0;
    double mu_product = 1.0; ///< prod_{j<=t} mu_j

    explicit NadamState(std::size_t size = 0) : m(size, 0.0), n(size, 0.0) {}
};

/**
 * One Nadam update with a constant momentum schedule mu_j = mu:
 *   g_hat = g / (1 - prod_{j<=t} mu_j)
 *   m     = mu m + (1 - mu) g,      m_hat = m / (1 - prod_{j<=t+1} mu_j)
 *   n     = nu n + (1 - nu) g^2,    n_hat = n / (1 - nu^t)
 *   m_bar = (1 - mu) g_hat + mu m_hat
 *   w    -= eta m_bar / (sqrt(n_hat) + eps)
 * The step counter is incremented before use.
 */
void nadam_step(std::vector<double> &params, const std::vector<double> &grads, NadamState &state,
                const TrainConfig &config);

struct Dataset {
    RealMatrix inputs;  ///< one sample per column
    RealMatrix targets; ///< one sample per column

    [[nodiscard]] Eigen::Index size() const noexcept { return inputs.cols(); }
};

struct TrainingHistory {
    std::vector<double> train_loss;
    std::vector<double> validation_loss;
    double initial_validation_loss = 0.0;
    int best_epoch = -1;
    bool stopped_early = false;
};

/// Patience-based stopping rule on a per-epoch monitored loss.
class EarlyStopping {
  public:
    explicit EarlyStopping(int patience) : patience_(patience) {}

    /// Records the loss of `epoch`; returns true when training should stop.
    bool update(int epoch, double loss);
    [[nodiscard]] int best_epoch() const noexcept { return best_epoch_; }
    [[nodiscard]] double best_loss() const noexcept { return best_loss_; }
    [[nodiscard]] bool improved_last() const noexcept { return improved_last_; }

  private:
    int patience_;
    int best_epoch_ = -1;
    double best_loss_ = 0.0;
    int since_best_ = 0;
    bool improved_last_ = false;
};

struct TrainResult {
    Mlp model;
    TrainingHistory history;
};

/// Mini-batch Nadam training with per-epoch seeded shuffling; parameters of
/// the best validation epoch are restored. An empty validation set falls back
/// to monitoring the training loss.
TrainResult train(const std::vector<LayerSpec> &architecture, const Dataset &training,
                  const Dataset &validation, const TrainConfig &config);

/// Same, starting from given parameters instead of a fresh initialization.
TrainResult train(Mlp initial, const Dataset &training, const Dataset &validation,
                  const TrainConfig &config);

enum class HeadKind { Bloch, Cholesky };

std::string to_string(HeadKind h);
HeadKind head_from_string(const std::string &s);

HermitianMatrix predict_state_bloch(const Mlp &net, const OperatorBasis &basis,
                                    const FrequencyVector &f);

struct CholeskyPrediction {
    DensityMatrix state;
    bool fallback = false; ///< the network produced an all-zero factor
};

CholeskyPrediction predict_state_cholesky(const Mlp &net, int d, const FrequencyVector &f);

/// A trained network plus the metadata needed to use it.
struct Model {
    Mlp net;
    HeadKind head = HeadKind::Bloch;
    int dim = 0;
    std::string basis = "gell-mann-orthonormal";
    std::uint64_t seed = 0;
};

inline constexpr int kModelFormatVersion = 1;

void save_model(const Model &model, const std::string &path);
Model load_model(const std::string &path);

} // namespace qst
