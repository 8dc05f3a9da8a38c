#pragma once

#include <array>
#include <vector>

#include "nvmflow/neuro/crossbar.hpp"

namespace nvmflow::neuro {

enum class Activation { sigmoid, tanh, relu };

/// Offline training of a 3x1 differential crossbar to compute AND.
/// Logic 1 = v_read on a word line, logic 0 = 0 V; word line 2 is a bias held
/// at v_read. The output current maps to the activation input as
/// z = gain * I / ((G_on - G_off) v_read), so a synapse weight
/// W = gain (G+ - G-) / (G_on - G_off) spans [-gain, gain].
struct TrainConfig {
    double learning_rate = 1.0;
    int epochs = 200; // upper bound; training stops at 4/4
    Activation activation = Activation::sigmoid;
    double gain = 8.0;
    WriteVerifyConfig verify{.tolerance = 1e-6};
};

struct EpochRecord {
    int epoch = 0;
    int correct = 0;
    double loss = 0;
    std::array<double, 3> weights{};
};

struct AndResult {
    bool success = false;
    int initial_correct = 0;
    int correct = 0;
    int epochs = 0; // weight updates applied
    std::vector<EpochRecord> history;
    std::array<double, 3> device_weights{}; // from measured conductances
    std::array<double, 3> ideal_weights{};  // software baseline, same algorithm
    int ideal_correct = 0;
    int ideal_epochs = 0;
    int total_pulses = 0;
    bool conductances_in_range = true; // every device stayed within [G_off, G_on]
};

/// Classification threshold: sigmoid/relu outputs above 0.5 are logic 1,
/// tanh outputs above 0. A zero-weight network therefore classifies every
/// pattern as 0 and starts at 3/4.
AndResult train_and_gate(const CrossbarSpec& spec, const TrainConfig& cfg = {});

/// The software baseline alone: ideal real-valued weights from zero.
AndResult train_and_software(const TrainConfig& cfg = {});

} // namespace nvmflow::neuro
