#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "modnet/dataset.hpp"
#include "modnet/rng.hpp"

namespace modnet {

enum class Activation { ReLU, Sigmoid };

std::string_view to_string(Activation activation);
Activation parse_activation(std::string_view text);

struct MlpArchitecture {
    std::vector<std::size_t> layer_widths;  // input, hidden..., output
    Activation activation = Activation::ReLU;
    double dropout_rate = 0.0;              // applied to hidden layers only

    /// 784-256-256-256-256-10 with the given activation and dropout 0.5 or 0.
    static MlpArchitecture standard(Activation activation, bool dropout);

    void validate() const;
    std::size_t layer_count() const { return layer_widths.size(); }
    std::size_t neuron_count() const;
    std::size_t input_width() const { return layer_widths.front(); }
    std::size_t output_width() const { return layer_widths.back(); }
};

struct MlpModel {
    MlpArchitecture arch;
    std::vector<Eigen::MatrixXd> weights;  // weights[t] is width[t+1] x width[t]
    std::vector<Eigen::VectorXd> biases;   // biases[t] has width[t+1] entries

    /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    static MlpModel initialize(const MlpArchitecture& arch, std::uint64_t seed);
    static MlpModel zeros(const MlpArchitecture& arch);

    std::size_t parameter_count() const;
    bool all_finite() const;
};

enum class Mode { Train, Eval };

/// Inverted-dropout masks, one (batch x width) matrix per hidden layer with
/// entries 0 or 1 / (1 - p).
struct DropoutMasks {
    std::vector<Eigen::MatrixXd> hidden;
};

DropoutMasks sample_dropout_masks(const MlpArchitecture& arch, Eigen::Index batch_size, Rng& rng);

struct ForwardResult {
    Eigen::MatrixXd logits;                   // batch x classes
    std::vector<Eigen::MatrixXd> activations; // per layer when recorded: input, hidden (post-nonlinearity), logits
};

/// Forward pass over a batch with one example per row. Train mode needs `rng`
/// to sample dropout masks when the architecture uses dropout; Eval mode is
/// deterministic and never drops units.
ForwardResult forward(const MlpModel& model, const Eigen::MatrixXd& batch, Mode mode, Rng* rng = nullptr,
                      bool record = false);

/// Forward pass with explicit masks (nullptr means no dropout).
ForwardResult forward_masked(const MlpModel& model, const Eigen::MatrixXd& batch, const DropoutMasks* masks,
                             bool record = false);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

struct LossAndGradients {
    double loss = 0.0;
    Gradients gradients;
};

/// Mean softmax cross-entropy over the batch and its exact gradients for the given masks.
LossAndGradients loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& batch, std::span<const int> labels,
                                    const DropoutMasks* masks);

LossAndGradients loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& batch, std::span<const int> labels,
                                    Mode mode, Rng* rng);

/// Mean softmax cross-entropy of logits against integer labels.
double softmax_cross_entropy(const Eigen::MatrixXd& logits, std::span<const int> labels);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One bias-corrected Adam update of `param` in place; t is the 1-based step index.
void adam_update(Eigen::Ref<Eigen::ArrayXd> param, const Eigen::Ref<const Eigen::ArrayXd>& grad,
                 Eigen::Ref<Eigen::ArrayXd> m, Eigen::Ref<Eigen::ArrayXd> v, std::size_t t, const AdamConfig& cfg);

/// First and second moment buffers for every parameter of a model.
class AdamState {
public:
    AdamState(const MlpModel& model, AdamConfig cfg);

    /// Applies one update to `model` and advances the step counter.
    void step(MlpModel& model, const Gradients& gradients);
    std::size_t steps_taken() const { return t_; }

private:
    AdamConfig cfg_;
    std::size_t t_ = 0;
    std::vector<Eigen::MatrixXd> m_w_, v_w_;
    std::vector<Eigen::VectorXd> m_b_, v_b_;
};

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 128;
    AdamConfig adam;
    std::uint64_t rng_seed = 0;
    bool shuffle_each_epoch = true;

    void validate() const;
};

struct TrainProgress {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
};

struct TrainResult {
    MlpModel model;
    double test_accuracy = 0.0;  // fraction in [0, 1]
    std::vector<double> epoch_losses;
};

/// Trains from a Glorot initialization with minibatch Adam. Deterministic for
/// a given cfg.rng_seed. A non-finite loss or weight aborts with a Numerical
/// error naming the epoch and step.
TrainResult train(const DatasetSplits& data, const MlpArchitecture& arch, const TrainConfig& cfg,
                  const std::function<void(const TrainProgress&)>& on_epoch = {});

/// Fraction of examples whose argmax logit equals the label.
double accuracy(const MlpModel& model, const LabeledImageSet& set);

/// Per-neuron activations over a set of inputs (m x N, one column per neuron in
/// global order): input columns hold the pixels, hidden columns the
/// post-nonlinearity outputs, output columns the logits. Eval mode.
struct ActivationTable {
    Eigen::MatrixXd values;

    std::size_t m() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t n() const { return static_cast<std::size_t>(values.cols()); }
};

ActivationTable record_activations(const MlpModel& model, const ImageMatrix& images);

}  // namespace modnet
