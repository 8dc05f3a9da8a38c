#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nvmflow/neuro/mnist.hpp"

namespace nvmflow::neuro {

/// Device-constrained MLP trainer. Every weight and bias is the difference of
/// two conductances, each restricted to `levels` evenly spaced values, so a
/// layer's parameters live on a grid of 2*levels - 1 points spanning
/// +-range_sigmas * sqrt(2 / fan_in). levels = 0 means continuous weights.
struct MacromodelConfig {
    std::vector<int> layers{784, 64, 10};
    int levels = 0;
    double range_sigmas = 2.5;
    int batch_size = 32;
    int epochs = 5;
    double learning_rate = 0.1;
    std::uint64_t seed = 42;
    int jobs = 1; // worker threads; results do not depend on it

    void validate() const;
    bool continuous() const { return levels == 0; }
};

/// ReLU hidden layers, softmax output, mean cross-entropy.
class Mlp {
public:
    Mlp(std::vector<int> layers, std::uint64_t seed); // He-normal weights, zero biases

    int depth() const { return static_cast<int>(w_.size()); }
    const std::vector<int>& layers() const { return layers_; }
    Eigen::MatrixXd& weights(int l) { return w_[l]; } // out x in
    Eigen::VectorXd& biases(int l) { return b_[l]; }
    const Eigen::MatrixXd& weights(int l) const { return w_[l]; }
    const Eigen::VectorXd& biases(int l) const { return b_[l]; }

    /// Columns of X are samples; returns class probabilities, one column per sample.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;
    double loss(const Eigen::MatrixXd& X, const std::vector<int>& y) const;

    struct Gradient {
        std::vector<Eigen::MatrixXd> w;
        std::vector<Eigen::VectorXd> b;
        double loss_sum = 0;
    };
    /// Gradient of the summed (not mean) loss over the columns of X.
    Gradient gradient(const Eigen::MatrixXd& X, const std::vector<int>& y) const;

    /// Grid step of layer l for a level count (0 -> continuous).
    double step(int l, int levels, double range_sigmas) const;
    /// Rounds every parameter to the nearest representable level and clamps to the range.
    void quantize(int levels, double range_sigmas);

private:
    std::vector<int> layers_;
    std::vector<Eigen::MatrixXd> w_;
    std::vector<Eigen::VectorXd> b_;
};

struct EpochStats {
    int epoch = 0;
    double loss = 0;
    double train_accuracy = 0;
    double test_accuracy = 0;
};

struct MacromodelReport {
    MacromodelConfig config;
    std::vector<EpochStats> history;
    std::vector<std::vector<long>> confusion; // [true][predicted] on the test set
    double test_accuracy = 0;
    // continuous run on the same seed, filled by train_macromodel when requested
    bool has_baseline = false;
    double baseline_test_accuracy = 0;
    double gap() const { return baseline_test_accuracy - test_accuracy; }

    /// Columns epoch,train_acc,test_acc,loss after the metadata block.
    void write_csv(std::ostream& os, const std::vector<std::string>& metadata = {}) const;
};

struct SynapseAudit {
    long long weights = 0;
    long long biases = 0;
    long long parameters() const { return weights + biases; }
    long long devices() const { return 2 * parameters(); }
};
SynapseAudit audit_synapses(const std::vector<int>& layers);

double accuracy(const Mlp& net, const Dataset& d, std::vector<std::vector<long>>* confusion = nullptr);

/// Minibatch SGD over `train`, evaluated on `test` after each epoch. When the
/// config is quantized and `with_baseline` is set, a continuous run with the
/// same seed is trained as well and reported as the baseline.
MacromodelReport train_macromodel(const MacromodelConfig& cfg, const Dataset& train, const Dataset& test,
                                  bool with_baseline = true);

} // namespace nvmflow::neuro
