#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nvmflow::rram {

/// Bipolar filamentary RRAM. The normalized filament state X lives on a circuit
/// node, never inside the model.
struct RramParams {
    double G_on = 1e-3;    // S
    double G_off = 1e-5;   // S
    double V0 = 0.25;      // conduction nonlinearity, V
    double k_set = 1e6;    // 1/s
    double k_reset = 1e6;  // 1/s
    double Vc_set = 0.15;  // V
    double Vc_reset = 0.15;
    double p = 2.0;        // window exponent
    double X_init = 0.0;

    bool operator==(const RramParams&) const = default;

    void validate() const;
    /// Keys: gon goff v0 kset kreset vcset vcreset p xinit.
    void set(std::string_view key, double value);
};

std::vector<std::pair<std::string, double>> to_pairs(const RramParams& p);

/// G_off (G_on/G_off)^X, X clamped to [0, 1].
double conductance(const RramParams& p, double x);
/// Inverse of conductance(); clamps to [0, 1].
double state_for_conductance(const RramParams& p, double g);

double rram_current(const RramParams& p, double v, double x);
double state_rate(const RramParams& p, double v, double x);

struct RramEval {
    double I = 0, dI_dV = 0, dI_dX = 0;
    double rate = 0, drate_dV = 0, drate_dX = 0;
};

RramEval evaluate(const RramParams& p, double v, double x);

} // namespace nvmflow::rram
