#include "modnet/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "modnet/error.hpp"

namespace modnet {

std::string_view to_string(Activation activation) {
    return activation == Activation::ReLU ? "relu" : "sigmoid";
}

Activation parse_activation(std::string_view text) {
    if (text == "relu") return Activation::ReLU;
    if (text == "sigmoid") return Activation::Sigmoid;
    throw usage_error("unknown activation '" + std::string(text) + "' (expected relu or sigmoid)");
}

MlpArchitecture MlpArchitecture::standard(Activation activation, bool dropout) {
    return {{kPixelsPerImage, 256, 256, 256, 256, kClassCount}, activation, dropout ? 0.5 : 0.0};
}

void MlpArchitecture::validate() const {
    if (layer_widths.size() < 2) throw usage_error("an MLP needs at least an input and an output layer");
    for (std::size_t t = 0; t < layer_widths.size(); ++t) {
        if (layer_widths[t] == 0) throw usage_error("layer " + std::to_string(t) + " has width 0");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw usage_error("dropout rate must lie in [0, 1), got " + std::to_string(dropout_rate));
    }
}

std::size_t MlpArchitecture::neuron_count() const {
    return std::accumulate(layer_widths.begin(), layer_widths.end(), std::size_t{0});
}

MlpModel MlpModel::zeros(const MlpArchitecture& arch) {
    arch.validate();
    MlpModel model;
    model.arch = arch;
    for (std::size_t t = 0; t + 1 < arch.layer_count(); ++t) {
        const auto in = static_cast<Eigen::Index>(arch.layer_widths[t]);
        const auto out = static_cast<Eigen::Index>(arch.layer_widths[t + 1]);
        model.weights.push_back(Eigen::MatrixXd::Zero(out, in));
        model.biases.push_back(Eigen::VectorXd::Zero(out));
    }
    return model;
}

MlpModel MlpModel::initialize(const MlpArchitecture& arch, std::uint64_t seed) {
    MlpModel model = zeros(arch);
    Rng rng(seed);
    for (auto& w : model.weights) {
        const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
        }
    }
    return model;
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
    for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
    return n;
}

bool MlpModel::all_finite() const {
    return std::all_of(weights.begin(), weights.end(), [](const auto& w) { return w.allFinite(); }) &&
           std::all_of(biases.begin(), biases.end(), [](const auto& b) { return b.allFinite(); });
}

DropoutMasks sample_dropout_masks(const MlpArchitecture& arch, Eigen::Index batch_size, Rng& rng) {
    DropoutMasks masks;
    const double p = arch.dropout_rate;
    const double keep_scale = 1.0 / (1.0 - p);
    for (std::size_t t = 1; t + 1 < arch.layer_count(); ++t) {
        Eigen::MatrixXd m(batch_size, static_cast<Eigen::Index>(arch.layer_widths[t]));
        // column-major fill order; part of the reproducibility contract
        for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform() < p ? 0.0 : keep_scale;
        masks.hidden.push_back(std::move(m));
    }
    return masks;
}

namespace {

void apply_activation(Activation act, Eigen::MatrixXd& z) {
    if (act == Activation::ReLU) {
        z = z.cwiseMax(0.0);
    } else {
        z = (1.0 + (-z.array()).exp()).inverse().matrix();
    }
}

// Derivative of the nonlinearity expressed through its output h = f(z).
Eigen::ArrayXXd activation_slope(Activation act, const Eigen::MatrixXd& h) {
    if (act == Activation::ReLU) return (h.array() > 0.0).cast<double>();
    return h.array() * (1.0 - h.array());
}

void check_batch(const MlpModel& model, const Eigen::MatrixXd& batch) {
    if (static_cast<std::size_t>(batch.cols()) != model.arch.input_width()) {
        throw data_error("batch has " + std::to_string(batch.cols()) + " features, model expects " +
                         std::to_string(model.arch.input_width()));
    }
    if (batch.hasNaN()) throw data_error("input batch contains NaN");
}

void check_masks(const MlpModel& model, const DropoutMasks& masks, Eigen::Index rows) {
    const std::size_t hidden = model.arch.layer_count() - 2;
    if (masks.hidden.size() != hidden) {
        throw usage_error("got " + std::to_string(masks.hidden.size()) + " dropout masks for " +
                          std::to_string(hidden) + " hidden layers");
    }
    for (std::size_t t = 0; t < hidden; ++t) {
        const auto& m = masks.hidden[t];
        if (m.rows() != rows || static_cast<std::size_t>(m.cols()) != model.arch.layer_widths[t + 1]) {
            throw usage_error("dropout mask " + std::to_string(t) + " has the wrong shape");
        }
    }
}

struct Trace {
    std::vector<Eigen::MatrixXd> inputs;    // input to each weight layer (after mask)
    std::vector<Eigen::MatrixXd> unmasked;  // hidden outputs before masking
    Eigen::MatrixXd logits;
};

Trace run_forward(const MlpModel& model, const Eigen::MatrixXd& batch, const DropoutMasks* masks) {
    check_batch(model, batch);
    if (masks) check_masks(model, *masks, batch.rows());
    const std::size_t layers = model.weights.size();
    Trace trace;
    trace.inputs.reserve(layers);
    trace.inputs.push_back(batch);
    for (std::size_t t = 0; t < layers; ++t) {
        Eigen::MatrixXd z = trace.inputs.back() * model.weights[t].transpose();
        z.rowwise() += model.biases[t].transpose();
        if (t + 1 == layers) {
            trace.logits = std::move(z);
            break;
        }
        apply_activation(model.arch.activation, z);
        trace.unmasked.push_back(z);
        if (masks) z.array() *= masks->hidden[t].array();
        trace.inputs.push_back(std::move(z));
    }
    return trace;
}

void check_labels(const MlpModel& model, std::span<const int> labels, Eigen::Index rows) {
    if (static_cast<Eigen::Index>(labels.size()) != rows) {
        throw data_error("got " + std::to_string(labels.size()) + " labels for a batch of " + std::to_string(rows));
    }
    const auto classes = static_cast<int>(model.arch.output_width());
    for (int y : labels) {
        if (y < 0 || y >= classes) throw data_error("label " + std::to_string(y) + " outside 0.." + std::to_string(classes - 1));
    }
}

}  // namespace

ForwardResult forward_masked(const MlpModel& model, const Eigen::MatrixXd& batch, const DropoutMasks* masks,
                             bool record) {
    Trace trace = run_forward(model, batch, masks);
    ForwardResult out;
    if (record) {
        out.activations = std::move(trace.inputs);
        out.activations.push_back(trace.logits);
    }
    out.logits = std::move(trace.logits);
    return out;
}

ForwardResult forward(const MlpModel& model, const Eigen::MatrixXd& batch, Mode mode, Rng* rng, bool record) {
    if (mode == Mode::Train && model.arch.dropout_rate > 0.0) {
        if (!rng) throw usage_error("train-mode forward with dropout needs a random generator");
        const DropoutMasks masks = sample_dropout_masks(model.arch, batch.rows(), *rng);
        return forward_masked(model, batch, &masks, record);
    }
    return forward_masked(model, batch, nullptr, record);
}

double softmax_cross_entropy(const Eigen::MatrixXd& logits, std::span<const int> labels) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double mx = logits.row(r).maxCoeff();
        const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
        total += lse - logits(r, labels[static_cast<std::size_t>(r)]);
    }
    return total / static_cast<double>(logits.rows());
}

LossAndGradients loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& batch, std::span<const int> labels,
                                    const DropoutMasks* masks) {
    check_labels(model, labels, batch.rows());
    const Trace trace = run_forward(model, batch, masks);
    const Eigen::Index rows = batch.rows();

    LossAndGradients out;
    out.loss = softmax_cross_entropy(trace.logits, labels);

    // d loss / d logits = (softmax - onehot) / rows
    Eigen::MatrixXd grad = trace.logits;
    for (Eigen::Index r = 0; r < rows; ++r) {
        grad.row(r).array() -= grad.row(r).maxCoeff();
        grad.row(r) = grad.row(r).array().exp().matrix();
        grad.row(r) /= grad.row(r).sum();
        grad(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
    }
    grad /= static_cast<double>(rows);

    const std::size_t layers = model.weights.size();
    out.gradients.weights.resize(layers);
    out.gradients.biases.resize(layers);
    for (std::size_t t = layers; t-- > 0;) {
        out.gradients.weights[t].noalias() = grad.transpose() * trace.inputs[t];
        out.gradients.biases[t] = grad.colwise().sum().transpose();
        if (t == 0) break;
        Eigen::MatrixXd upstream = grad * model.weights[t];
        if (masks) upstream.array() *= masks->hidden[t - 1].array();
        upstream.array() *= activation_slope(model.arch.activation, trace.unmasked[t - 1]);
        grad = std::move(upstream);
    }
    return out;
}

LossAndGradients loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& batch, std::span<const int> labels,
                                    Mode mode, Rng* rng) {
    if (mode == Mode::Train && model.arch.dropout_rate > 0.0) {
        if (!rng) throw usage_error("train-mode gradients with dropout need a random generator");
        const DropoutMasks masks = sample_dropout_masks(model.arch, batch.rows(), *rng);
        return loss_and_gradients(model, batch, labels, &masks);
    }
    return loss_and_gradients(model, batch, labels, nullptr);
}

void adam_update(Eigen::Ref<Eigen::ArrayXd> param, const Eigen::Ref<const Eigen::ArrayXd>& grad,
                 Eigen::Ref<Eigen::ArrayXd> m, Eigen::Ref<Eigen::ArrayXd> v, std::size_t t, const AdamConfig& cfg) {
    if (t == 0) throw usage_error("Adam step index starts at 1");
    if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
        throw usage_error("Adam state shape does not match the parameter");
    }
    const double step = static_cast<double>(t);
    const double c1 = 1.0 - std::pow(cfg.beta1, step);
    const double c2 = 1.0 - std::pow(cfg.beta2, step);
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.square();
    param -= cfg.lr * (m / c1) / ((v / c2).sqrt() + cfg.eps);
}

AdamState::AdamState(const MlpModel& model, AdamConfig cfg) : cfg_(cfg) {
    for (const auto& w : model.weights) {
        m_w_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        v_w_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : model.biases) {
        m_b_.push_back(Eigen::VectorXd::Zero(b.size()));
        v_b_.push_back(Eigen::VectorXd::Zero(b.size()));
    }
}

void AdamState::step(MlpModel& model, const Gradients& gradients) {
    if (gradients.weights.size() != model.weights.size() || gradients.biases.size() != model.biases.size() ||
        model.weights.size() != m_w_.size()) {
        throw usage_error("gradient layer count does not match the model");
    }
    ++t_;
    auto flat = [](auto& x) { return Eigen::Map<Eigen::ArrayXd>(x.data(), x.size()); };
    auto cflat = [](const auto& x) { return Eigen::Map<const Eigen::ArrayXd>(x.data(), x.size()); };
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        if (gradients.weights[l].rows() != model.weights[l].rows() ||
            gradients.weights[l].cols() != model.weights[l].cols() ||
            gradients.biases[l].size() != model.biases[l].size()) {
            throw usage_error("gradient shape mismatch at layer " + std::to_string(l));
        }
        adam_update(flat(model.weights[l]), cflat(gradients.weights[l]), flat(m_w_[l]), flat(v_w_[l]), t_, cfg_);
        adam_update(flat(model.biases[l]), cflat(gradients.biases[l]), flat(m_b_[l]), flat(v_b_[l]), t_, cfg_);
    }
}

void TrainConfig::validate() const {
    if (epochs < 1) throw usage_error("epochs must be >= 1");
    if (batch_size < 1) throw usage_error("batch size must be >= 1");
    if (!(adam.lr > 0.0)) throw usage_error("learning rate must be positive");
    if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0) || !(adam.beta2 > 0.0 && adam.beta2 < 1.0)) {
        throw usage_error("Adam betas must lie in (0, 1)");
    }
    if (!(adam.eps > 0.0)) throw usage_error("Adam epsilon must be positive");
}

namespace {

constexpr Eigen::Index kEvalChunk = 1000;

Eigen::MatrixXd gather_rows(const ImageMatrix& images, std::span<const std::size_t> rows) {
    Eigen::MatrixXd batch(static_cast<Eigen::Index>(rows.size()), images.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        batch.row(static_cast<Eigen::Index>(r)) = images.row(static_cast<Eigen::Index>(rows[r]));
    }
    return batch;
}

}  // namespace

double accuracy(const MlpModel& model, const LabeledImageSet& set) {
    if (set.size() == 0) throw data_error("accuracy of an empty set is undefined");
    std::size_t correct = 0;
    const auto m = static_cast<Eigen::Index>(set.size());
    for (Eigen::Index start = 0; start < m; start += kEvalChunk) {
        const Eigen::Index len = std::min(kEvalChunk, m - start);
        const Eigen::MatrixXd batch = set.images.middleRows(start, len);
        const auto logits = forward(model, batch, Mode::Eval).logits;
        for (Eigen::Index r = 0; r < len; ++r) {
            Eigen::Index arg = 0;
            logits.row(r).maxCoeff(&arg);
            if (arg == set.labels[static_cast<std::size_t>(start + r)]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(set.size());
}

TrainResult train(const DatasetSplits& data, const MlpArchitecture& arch, const TrainConfig& cfg,
                  const std::function<void(const TrainProgress&)>& on_epoch) {
    arch.validate();
    cfg.validate();
    const auto& set = data.train;
    if (set.size() == 0) throw data_error("training split is empty");
    if (static_cast<std::size_t>(set.images.cols()) != arch.input_width()) {
        throw data_error("training images have " + std::to_string(set.images.cols()) + " features, architecture expects " +
                         std::to_string(arch.input_width()));
    }

    TrainResult result{MlpModel::initialize(arch, derive_seed(cfg.rng_seed, 0)), 0.0, {}};
    MlpModel& model = result.model;
    Rng order_rng(derive_seed(cfg.rng_seed, 1));
    Rng dropout_rng(derive_seed(cfg.rng_seed, 2));
    AdamState adam(model, cfg.adam);

    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<int> batch_labels;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (cfg.shuffle_each_epoch) order_rng.shuffle(order.begin(), order.end());
        double loss_sum = 0.0;
        std::size_t steps = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, order.size() - start);
            const std::span<const std::size_t> rows(order.data() + start, len);
            const Eigen::MatrixXd batch = gather_rows(set.images, rows);
            batch_labels.resize(len);
            for (std::size_t r = 0; r < len; ++r) batch_labels[r] = set.labels[rows[r]];

            const auto lg = loss_and_gradients(model, batch, batch_labels, Mode::Train, &dropout_rng);
            ++steps;
            if (!std::isfinite(lg.loss)) {
                throw numerical_error("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                                      std::to_string(steps));
            }
            adam.step(model, lg.gradients);
            if (!model.all_finite()) {
                throw numerical_error("training diverged: non-finite weights after epoch " + std::to_string(epoch) +
                                      ", step " + std::to_string(steps));
            }
            loss_sum += lg.loss;
        }
        result.epoch_losses.push_back(loss_sum / static_cast<double>(steps));
        if (on_epoch) on_epoch({epoch, result.epoch_losses.back()});
    }
    result.test_accuracy = accuracy(model, data.test);
    return result;
}

ActivationTable record_activations(const MlpModel& model, const ImageMatrix& images) {
    const auto m = images.rows();
    ActivationTable table;
    table.values.resize(m, static_cast<Eigen::Index>(model.arch.neuron_count()));
    for (Eigen::Index start = 0; start < m; start += kEvalChunk) {
        const Eigen::Index len = std::min(kEvalChunk, m - start);
        const Eigen::MatrixXd batch = images.middleRows(start, len);
        const auto result = forward(model, batch, Mode::Eval, nullptr, true);
        Eigen::Index col = 0;
        for (const auto& layer : result.activations) {
            table.values.block(start, col, len, layer.cols()) = layer;
            col += layer.cols();
        }
    }
    return table;
}

}  // namespace modnet
