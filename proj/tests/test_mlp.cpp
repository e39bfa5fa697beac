#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "modnet/error.hpp"
#include "modnet/mlp.hpp"
#include "test_support.hpp"

using namespace modnet;

namespace {

MlpArchitecture toy_arch(Activation act, double dropout) { return {{6, 4, 3}, act, dropout}; }

Eigen::MatrixXd random_batch(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(gen);
    return x;
}

// Central differences over every weight and bias, with fixed masks.
void expect_gradients_match(const MlpModel& base, const Eigen::MatrixXd& x, const std::vector<int>& y,
                            const DropoutMasks* masks) {
    const auto analytic = loss_and_gradients(base, x, y, masks).gradients;
    const double h = 1e-5;
    auto loss_at = [&](const MlpModel& m) { return loss_and_gradients(m, x, y, masks).loss; };
    std::size_t checked = 0;
    for (std::size_t l = 0; l < base.weights.size(); ++l) {
        for (Eigen::Index i = 0; i < base.weights[l].size(); ++i) {
            MlpModel plus = base, minus = base;
            plus.weights[l].data()[i] += h;
            minus.weights[l].data()[i] -= h;
            const double numeric = (loss_at(plus) - loss_at(minus)) / (2 * h);
            const double a = analytic.weights[l].data()[i];
            EXPECT_LE(std::abs(a - numeric), 1e-4 * std::max(std::abs(a), std::abs(numeric)) + 1e-10)
                << "weight layer " << l << " index " << i << " analytic " << a << " numeric " << numeric;
            ++checked;
        }
        for (Eigen::Index i = 0; i < base.biases[l].size(); ++i) {
            MlpModel plus = base, minus = base;
            plus.biases[l](i) += h;
            minus.biases[l](i) -= h;
            const double numeric = (loss_at(plus) - loss_at(minus)) / (2 * h);
            const double a = analytic.biases[l](i);
            EXPECT_LE(std::abs(a - numeric), 1e-4 * std::max(std::abs(a), std::abs(numeric)) + 1e-10)
                << "bias layer " << l << " index " << i;
            ++checked;
        }
    }
    EXPECT_EQ(checked, base.parameter_count());
}

// Glorot weights plus random biases, so no pre-activation sits exactly on the ReLU kink.
MlpModel gradient_model(const MlpArchitecture& arch, std::uint64_t seed) {
    auto model = MlpModel::initialize(arch, seed);
    std::mt19937_64 gen(seed ^ 0xb1a5);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (auto& b : model.biases)
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = u(gen);
    return model;
}

}  // namespace

TEST(Forward, ZeroModelGivesZeroLogits) {
    const auto model = MlpModel::zeros(toy_arch(Activation::ReLU, 0.0));
    const auto out = forward(model, random_batch(5, 6, 1), Mode::Eval);
    EXPECT_TRUE(out.logits.isZero(0.0));
}

TEST(Forward, SingleLinearLayerByHand) {
    auto model = MlpModel::zeros({{1, 1}, Activation::ReLU, 0.0});
    model.weights[0](0, 0) = 2.0;
    model.biases[0](0) = 1.0;
    Eigen::MatrixXd x(1, 1);
    x << -5.0;
    EXPECT_DOUBLE_EQ(forward(model, x, Mode::Eval).logits(0, 0), -9.0);
}

TEST(Forward, DropoutIsIdentityInEvalMode) {
    const auto with = MlpModel::initialize(toy_arch(Activation::Sigmoid, 0.5), 3);
    auto without = with;
    without.arch.dropout_rate = 0.0;
    const auto x = random_batch(7, 6, 2);
    EXPECT_EQ(forward(with, x, Mode::Eval).logits, forward(without, x, Mode::Eval).logits);
}

TEST(Forward, TrainModeDropoutNeedsRng) {
    const auto model = MlpModel::initialize(toy_arch(Activation::ReLU, 0.5), 3);
    EXPECT_THROW(forward(model, random_batch(2, 6, 1), Mode::Train), Error);
}

TEST(Forward, RejectsShapeMismatchAndNaN) {
    const auto model = MlpModel::initialize(toy_arch(Activation::ReLU, 0.0), 3);
    EXPECT_THROW(forward(model, random_batch(2, 5, 1), Mode::Eval), Error);
    auto x = random_batch(2, 6, 1);
    x(1, 3) = std::nan("");
    EXPECT_THROW(forward(model, x, Mode::Eval), Error);
}

TEST(Forward, InvertedDropoutScalesKeptUnits) {
    Rng rng(11);
    const auto masks = sample_dropout_masks(toy_arch(Activation::ReLU, 0.5), 50, rng);
    ASSERT_EQ(masks.hidden.size(), 1u);
    int kept = 0;
    for (Eigen::Index i = 0; i < masks.hidden[0].size(); ++i) {
        const double v = masks.hidden[0].data()[i];
        EXPECT_TRUE(v == 0.0 || v == 2.0);
        kept += v != 0.0;
    }
    EXPECT_GT(kept, 60);   // 200 draws at keep-probability 0.5
    EXPECT_LT(kept, 140);
}

TEST(Forward, ActivationRangesOverRandomBatches) {
    for (auto act : {Activation::ReLU, Activation::Sigmoid}) {
        const auto model = MlpModel::initialize({{6, 8, 8, 3}, act, 0.0}, 5);
        const auto out = forward(model, random_batch(40, 6, 9) * 4.0, Mode::Eval, nullptr, true);
        ASSERT_EQ(out.activations.size(), 4u);
        for (std::size_t l = 1; l <= 2; ++l) {
            const auto& h = out.activations[l];
            if (act == Activation::ReLU) {
                EXPECT_GE(h.minCoeff(), 0.0);
            } else {
                EXPECT_GT(h.minCoeff(), 0.0);
                EXPECT_LT(h.maxCoeff(), 1.0);
            }
        }
    }
}

TEST(Loss, UniformLogitsGiveLogClassCount) {
    Eigen::MatrixXd logits = Eigen::MatrixXd::Constant(4, 10, 0.3);
    const std::vector<int> y = {0, 3, 9, 5};
    EXPECT_NEAR(softmax_cross_entropy(logits, y), std::log(10.0), 1e-12);
    EXPECT_NEAR(softmax_cross_entropy(logits, y), 2.302585, 1e-6);
}

TEST(Loss, ConfidentCorrectPredictionApproachesZero) {
    Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(2, 3);
    logits(0, 1) = 60.0;
    logits(1, 2) = 60.0;
    const std::vector<int> y = {1, 2};
    EXPECT_LT(softmax_cross_entropy(logits, y), 1e-20);
}

TEST(Loss, RejectsBadLabels) {
    const auto model = MlpModel::initialize(toy_arch(Activation::ReLU, 0.0), 1);
    const std::vector<int> y = {0, 3};
    EXPECT_THROW(loss_and_gradients(model, random_batch(2, 6, 1), y, nullptr), Error);
    const std::vector<int> short_y = {0};
    EXPECT_THROW(loss_and_gradients(model, random_batch(2, 6, 1), short_y, nullptr), Error);
}

class GradientCheck : public ::testing::TestWithParam<std::tuple<Activation, bool>> {};

TEST_P(GradientCheck, MatchesCentralDifferences) {
    const auto [act, masked] = GetParam();
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto arch = toy_arch(act, masked ? 0.5 : 0.0);
        const auto model = gradient_model(arch, seed);
        const auto x = random_batch(5, 6, seed + 100);
        const std::vector<int> y = {0, 2, 1, 1, 2};
        if (masked) {
            Rng rng(seed);
            const auto masks = sample_dropout_masks(arch, 5, rng);
            expect_gradients_match(model, x, y, &masks);
        } else {
            expect_gradients_match(model, x, y, nullptr);
        }
    }
}

INSTANTIATE_TEST_SUITE_P(AllVariants, GradientCheck,
                         ::testing::Combine(::testing::Values(Activation::ReLU, Activation::Sigmoid),
                                            ::testing::Bool()));

TEST(GradientCheck, DeeperModelBothActivations) {
    for (auto act : {Activation::ReLU, Activation::Sigmoid}) {
        const MlpArchitecture arch{{5, 6, 6, 4}, act, 0.5};
        const auto model = gradient_model(arch, 21);
        ASSERT_LE(model.parameter_count(), 200u);
        Rng rng(4);
        const auto masks = sample_dropout_masks(arch, 6, rng);
        const std::vector<int> y = {0, 1, 2, 3, 0, 1};
        SCOPED_TRACE(std::string(to_string(act)));
        expect_gradients_match(model, random_batch(6, 5, 8), y, &masks);
        expect_gradients_match(model, random_batch(6, 5, 8), y, nullptr);
    }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
    Eigen::ArrayXd p(3), g = Eigen::ArrayXd::Zero(3), m = Eigen::ArrayXd::Zero(3), v = Eigen::ArrayXd::Zero(3);
    p << 1.0, -2.0, 0.5;
    const Eigen::ArrayXd before = p;
    for (std::size_t t = 1; t <= 50; ++t) adam_update(p, g, m, v, t, {});
    EXPECT_TRUE((p == before).all());
}

TEST(Adam, FirstStepMovesByLearningRate) {
    Eigen::ArrayXd p = Eigen::ArrayXd::Constant(1, 3.0), g = Eigen::ArrayXd::Ones(1);
    Eigen::ArrayXd m = Eigen::ArrayXd::Zero(1), v = Eigen::ArrayXd::Zero(1);
    const AdamConfig cfg;
    adam_update(p, g, m, v, 1, cfg);
    // bias correction gives m_hat = v_hat = 1, so the step is lr / (1 + eps)
    EXPECT_NEAR(p(0), 3.0 - cfg.lr / (1.0 + cfg.eps), 1e-15);
}

TEST(Adam, DescendsOnQuadratic) {
    Eigen::ArrayXd x = Eigen::ArrayXd::Ones(1), m = Eigen::ArrayXd::Zero(1), v = Eigen::ArrayXd::Zero(1);
    double f = x(0) * x(0);
    for (std::size_t t = 1; t <= 100; ++t) {
        const Eigen::ArrayXd g = 2.0 * x;
        adam_update(x, g, m, v, t, {});
        const double next = x(0) * x(0);
        EXPECT_LT(next, f) << "step " << t;
        f = next;
    }
}

TEST(Adam, RejectsStepZero) {
    Eigen::ArrayXd p = Eigen::ArrayXd::Ones(1), m = Eigen::ArrayXd::Zero(1), v = Eigen::ArrayXd::Zero(1);
    EXPECT_THROW(adam_update(p, p, m, v, 0, {}), Error);
}

namespace {

// Two Gaussian blobs in 2-D, separated along x; labels 0 / 1.
DatasetSplits separable_toy(std::size_t m, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, 0.3);
    LabeledImageSet set;
    set.images.resize(static_cast<Eigen::Index>(m), 2);
    for (std::size_t i = 0; i < m; ++i) {
        const int label = static_cast<int>(i % 2);
        set.images(static_cast<Eigen::Index>(i), 0) = (label ? 2.0 : -2.0) + n(gen);
        set.images(static_cast<Eigen::Index>(i), 1) = n(gen);
        set.labels.push_back(label);
    }
    DatasetSplits splits{set, set};
    splits.test.split = Split::Test;
    return splits;
}

}  // namespace

TEST(Train, SeparableToyReachesNearPerfectAccuracy) {
    const auto data = separable_toy(400, 3);
    for (auto act : {Activation::ReLU, Activation::Sigmoid}) {
        TrainConfig cfg;
        cfg.epochs = 5;
        cfg.batch_size = 16;
        cfg.rng_seed = 9;
        const auto result = train(data, {{2, 8, 2}, act, 0.0}, cfg);
        EXPECT_GE(result.test_accuracy, 0.99) << to_string(act);
        EXPECT_EQ(result.epoch_losses.size(), 5u);
    }
}

TEST(Train, SameSeedGivesBitIdenticalWeights) {
    const auto data = separable_toy(200, 4);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 32;
    cfg.rng_seed = 17;
    const MlpArchitecture arch{{2, 8, 8, 2}, Activation::ReLU, 0.5};
    const auto a = train(data, arch, cfg);
    const auto b = train(data, arch, cfg);
    for (std::size_t l = 0; l < a.model.weights.size(); ++l) {
        EXPECT_EQ(a.model.weights[l], b.model.weights[l]);
        EXPECT_EQ(a.model.biases[l], b.model.biases[l]);
    }
    cfg.rng_seed = 18;
    const auto c = train(data, arch, cfg);
    EXPECT_NE(a.model.weights[0], c.model.weights[0]);
}

TEST(Train, DivergenceIsReportedWithEpochAndStep) {
    auto data = separable_toy(64, 5);
    data.train.images *= 1e305;
    TrainConfig cfg;
    cfg.epochs = 1;
    try {
        train(data, {{2, 4, 2}, Activation::ReLU, 0.0}, cfg);
        FAIL() << "expected divergence";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Numerical);
        EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
    }
}

TEST(Train, ConfigValidation) {
    TrainConfig cfg;
    cfg.epochs = 0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.adam.beta2 = 1.0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.adam.lr = 0.0;
    EXPECT_THROW(cfg.validate(), Error);
}

TEST(RecordActivations, LayoutFollowsConventions) {
    const auto model = MlpModel::initialize({{6, 5, 5, 3}, Activation::ReLU, 0.5}, 2);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ImageMatrix images(30, 6);
    for (Eigen::Index i = 0; i < images.size(); ++i) images.data()[i] = u(gen);
    images.col(4).setZero();

    const auto table = record_activations(model, images);
    ASSERT_EQ(table.m(), 30u);
    ASSERT_EQ(table.n(), 19u);
    EXPECT_EQ(Eigen::MatrixXd(table.values.leftCols(6)), Eigen::MatrixXd(images));
    EXPECT_GE(table.values.middleCols(6, 10).minCoeff(), 0.0);
    EXPECT_TRUE(table.values.col(4).isZero(0.0));
    const Eigen::MatrixXd logits = forward(model, Eigen::MatrixXd(images), Mode::Eval).logits;
    EXPECT_EQ(Eigen::MatrixXd(table.values.rightCols(3)), logits);
    EXPECT_EQ(record_activations(model, images).values, table.values);
}

TEST(Architecture, StandardShapeAndValidation) {
    const auto arch = MlpArchitecture::standard(Activation::Sigmoid, true);
    EXPECT_EQ(arch.layer_widths, (std::vector<std::size_t>{784, 256, 256, 256, 256, 10}));
    EXPECT_EQ(arch.neuron_count(), 1818u);
    EXPECT_DOUBLE_EQ(arch.dropout_rate, 0.5);
    EXPECT_THROW((MlpArchitecture{{5}, Activation::ReLU, 0.0}.validate()), Error);
    EXPECT_THROW((MlpArchitecture{{5, 0, 2}, Activation::ReLU, 0.0}.validate()), Error);
    EXPECT_THROW((MlpArchitecture{{5, 2}, Activation::ReLU, 1.0}.validate()), Error);
}

TEST(Initialize, GlorotBoundsAndZeroBiases) {
    const auto model = MlpModel::initialize({{30, 20, 10}, Activation::ReLU, 0.0}, 7);
    EXPECT_LE(model.weights[0].cwiseAbs().maxCoeff(), std::sqrt(6.0 / 50.0));
    EXPECT_LE(model.weights[1].cwiseAbs().maxCoeff(), std::sqrt(6.0 / 30.0));
    EXPECT_TRUE(model.biases[0].isZero(0.0));
    EXPECT_TRUE(model.all_finite());
}
