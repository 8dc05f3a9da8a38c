#include "nvmflow/neuro/and_gate.hpp"

#include <cmath>
#include <stdexcept>

namespace nvmflow::neuro {

namespace {

constexpr double kPatterns[4][3] = {{0, 0, 1}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1}};
constexpr double kTargets[4] = {0, 0, 0, 1};

struct Act {
    Activation kind;

    double target(double t) const { return kind == Activation::tanh ? 2 * t - 1 : t; }
    double operator()(double z) const
    {
        switch (kind) {
        case Activation::sigmoid: return 1 / (1 + std::exp(-z));
        case Activation::tanh: return std::tanh(z);
        case Activation::relu: return z > 0 ? z : 0.0;
        }
        return 0;
    }
    bool decide(double y) const { return kind == Activation::tanh ? y > 0 : y > 0.5; }
    // loss and dL/dz: cross-entropy for sigmoid, squared error otherwise
    double loss(double y, double t) const
    {
        if (kind == Activation::sigmoid) {
            const double e = 1e-15;
            return -(t * std::log(y + e) + (1 - t) * std::log(1 - y + e));
        }
        return 0.5 * (y - t) * (y - t);
    }
    double delta(double z, double y, double t) const
    {
        switch (kind) {
        case Activation::sigmoid: return y - t;
        case Activation::tanh: return (y - t) * (1 - y * y);
        case Activation::relu: return z >= 0 ? y - t : 0.0; // active at 0 so zero weights can learn
        }
        return 0;
    }
};

struct Step {
    int correct = 0;
    double loss = 0;
    std::array<double, 3> grad{};
};

Step evaluate(const Act& act, const std::array<double, 4>& z)
{
    Step s;
    for (int p = 0; p < 4; ++p) {
        const double y = act(z[p]);
        const double t = act.target(kTargets[p]);
        s.correct += act.decide(y) == (kTargets[p] > 0.5);
        s.loss += act.loss(y, t) / 4;
        const double d = act.delta(z[p], y, t);
        for (int i = 0; i < 3; ++i) s.grad[i] += d * kPatterns[p][i] / 4;
    }
    return s;
}

void check(const TrainConfig& cfg)
{
    if (!(cfg.learning_rate > 0)) throw std::invalid_argument("train: learning rate must be > 0");
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
}

} // namespace

AndResult train_and_software(const TrainConfig& cfg)
{
    check(cfg);
    const Act act{cfg.activation};
    AndResult r;
    std::array<double, 3> w{};
    for (int epoch = 0;; ++epoch) {
        std::array<double, 4> z{};
        for (int p = 0; p < 4; ++p)
            for (int i = 0; i < 3; ++i) z[p] += w[i] * kPatterns[p][i];
        const Step s = evaluate(act, z);
        r.history.push_back({epoch, s.correct, s.loss, w});
        if (epoch == 0) r.initial_correct = s.correct;
        r.correct = s.correct;
        if (s.correct == 4 || epoch == cfg.epochs) break;
        for (int i = 0; i < 3; ++i) w[i] -= cfg.learning_rate * s.grad[i];
        r.epochs = epoch + 1;
    }
    r.success = r.correct == 4;
    r.ideal_weights = w;
    r.device_weights = w;
    r.ideal_correct = r.correct;
    r.ideal_epochs = r.epochs;
    return r;
}

AndResult train_and_gate(const CrossbarSpec& spec_in, const TrainConfig& cfg)
{
    check(cfg);
    if (spec_in.n_inputs != 3 || spec_in.n_outputs != 1)
        throw std::invalid_argument("train_and_gate: needs a 3x1 crossbar");
    const auto& dev = spec_in.device;
    const double range = dev.G_on - dev.G_off;
    Crossbar xb(spec_in, 0.5 * (dev.G_on + dev.G_off));
    const double v = xb.spec().v_read;
    const double scale = cfg.gain / (range * v);
    const Act act{cfg.activation};

    AndResult r;
    auto weights = [&] {
        std::array<double, 3> w{};
        for (int i = 0; i < 3; ++i)
            w[i] = cfg.gain * (xb.conductance({i, 0, true}) - xb.conductance({i, 0, false})) / range;
        return w;
    };
    auto in_range = [&] {
        for (int i = 0; i < 3; ++i)
            for (bool plus : {true, false}) {
                const double g = xb.conductance({i, 0, plus});
                if (g < dev.G_off || g > dev.G_on) r.conductances_in_range = false;
            }
    };

    for (int epoch = 0;; ++epoch) {
        std::array<double, 4> z{};
        for (int p = 0; p < 4; ++p)
            z[p] = scale * xb.read_outputs({kPatterns[p][0] * v, kPatterns[p][1] * v, kPatterns[p][2] * v})[0];
        const Step s = evaluate(act, z);
        r.history.push_back({epoch, s.correct, s.loss, weights()});
        if (epoch == 0) r.initial_correct = s.correct;
        r.correct = s.correct;
        if (s.correct == 4 || epoch == cfg.epochs) break;

        // desired weight change -> conductance targets on one side of each pair
        std::vector<std::pair<Synapse, double>> targets;
        for (int i = 0; i < 3; ++i) {
            const double dg = -cfg.learning_rate * s.grad[i] * range / cfg.gain;
            if (std::abs(dg) < cfg.verify.tolerance) continue;
            const Synapse up{i, 0, dg > 0}, down{i, 0, dg < 0};
            const double g_up = xb.measure(up), g_down = xb.measure(down);
            const double headroom = dev.G_on - g_up;
            const double mag = std::abs(dg);
            if (mag <= headroom) {
                targets.push_back({up, g_up + mag});
            } else {
                if (headroom > cfg.verify.tolerance) targets.push_back({up, dev.G_on - 0.5 * cfg.verify.tolerance});
                const double rest = std::min(mag - std::max(headroom, 0.0), g_down - dev.G_off);
                if (rest > cfg.verify.tolerance) targets.push_back({down, g_down - rest});
            }
        }
        const auto rep = xb.program_weights(targets, cfg.verify);
        r.total_pulses += rep.total_pulses();
        in_range();
        r.epochs = epoch + 1;
    }
    r.success = r.correct == 4;
    r.device_weights = weights();

    const AndResult ideal = train_and_software(cfg);
    r.ideal_weights = ideal.ideal_weights;
    r.ideal_correct = ideal.ideal_correct;
    r.ideal_epochs = ideal.ideal_epochs;
    return r;
}

} // namespace nvmflow::neuro
