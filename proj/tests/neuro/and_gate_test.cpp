#include <gtest/gtest.h>
#include <cmath>

#include "nvmflow/neuro/and_gate.hpp"

using namespace nvmflow::neuro;

TEST(AndGate, SoftwareBaselineLearns)
{
    const auto r = train_and_software();
    EXPECT_EQ(r.initial_correct, 3);
    EXPECT_TRUE(r.success);
    EXPECT_LE(r.epochs, 200);
    EXPECT_GT(r.ideal_weights[0], 0);
    EXPECT_GT(r.ideal_weights[1], 0);
    EXPECT_LT(r.ideal_weights[2], 0);
}

TEST(AndGate, SoftwareBaselineOtherActivations)
{
    for (auto a : {Activation::tanh, Activation::relu}) {
        TrainConfig c;
        c.activation = a;
        c.learning_rate = 0.5;
        const auto r = train_and_software(c);
        EXPECT_TRUE(r.success) << static_cast<int>(a);
    }
}

TEST(AndGate, ConfigValidated)
{
    TrainConfig c;
    c.learning_rate = 0;
    EXPECT_THROW(train_and_software(c), std::invalid_argument);
    c = {};
    c.epochs = 0;
    EXPECT_THROW(train_and_gate(CrossbarSpec{}, c), std::invalid_argument);
    EXPECT_THROW(train_and_gate(CrossbarSpec{.n_inputs = 2}), std::invalid_argument);
}

TEST(AndGate, DeviceLoopLearns)
{
    const auto r = train_and_gate(CrossbarSpec{});
    ASSERT_FALSE(r.history.empty());
    for (double w : r.history.front().weights) EXPECT_EQ(w, 0.0);
    EXPECT_EQ(r.initial_correct, 3);
    EXPECT_TRUE(r.success);
    EXPECT_LE(r.epochs, 200);
    EXPECT_TRUE(r.conductances_in_range);
    EXPECT_TRUE(r.ideal_correct == 4);
    double dot = 0, na = 0, nb = 0;
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(r.device_weights[i] > 0, r.ideal_weights[i] > 0) << i;
        dot += r.device_weights[i] * r.ideal_weights[i];
        na += r.device_weights[i] * r.device_weights[i];
        nb += r.ideal_weights[i] * r.ideal_weights[i];
    }
    EXPECT_GT(dot / std::sqrt(na * nb), 0.95);
}

TEST(AndGate, Deterministic)
{
    const auto a = train_and_gate(CrossbarSpec{});
    const auto b = train_and_gate(CrossbarSpec{});
    ASSERT_EQ(a.history.size(), b.history.size());
    for (size_t k = 0; k < a.history.size(); ++k) EXPECT_EQ(a.history[k].weights, b.history[k].weights);
}
