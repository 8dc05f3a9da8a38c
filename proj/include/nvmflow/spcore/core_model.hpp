#pragma once

#include <stdexcept>
#include <string>

#include "nvmflow/spcore/model_params.hpp"

namespace nvmflow::spcore {

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Solver { reference, householder };

/// Inversion charge and surface potential at both channel ends.
struct ChargeSolution {
    double Q_is = 0;   // C/m^2
    double Q_id = 0;
    double psi_ss = 0; // V
    double psi_sd = 0;
    double residual = 0; // worst |F| of the two ends, V
};

struct EffectFactors {
    double mu_eff = 0;   // m^2/Vs
    double vsat_div = 1; // I is divided by this; 1 when velocity saturation is off
};

/// Drain current and its partial derivatives with respect to the three
/// terminal voltages. Positive current flows drain -> source inside the device.
struct TerminalCurrent {
    double I = 0;
    double dI_dVg = 0;
    double dI_dVd = 0;
    double dI_dVs = 0;
};

/// Ward-Dutton terminal charges, coulombs. Q_g + Q_s + Q_d + Q_bulk = 0.
struct TerminalCharges {
    double Q_s = 0;
    double Q_d = 0;
    double Q_g = 0;
    double Q_bulk = 0;
};

struct DeviceEvaluation {
    TerminalCurrent current;
    TerminalCharges charges;
};

/// Long-channel surface-potential core for a symmetric common multi-gate
/// device. All methods are const and thread-safe.
///
/// The core unknown is the inversion charge density Q_i, solving
///   F(Q_i) = V_g - V_fb - V_ch - (Q_i + Q_B)/C_ox
///            - V_t ln[Q_i (Q_i + Q_c) / Q_ref^2] = 0,   Q_c = Q_B + 5 V_t C_si,
/// whose -dV_ch/dQ_i integrates to the closed-form current bracket
///   B(Q) = Q^2/(2 C_ox) + 2 V_t Q - V_t Q_c ln(Q + Q_c).
class CoreModel {
public:
    explicit CoreModel(ModelParams params = {});

    const ModelParams& params() const { return params_; }
    const DerivedConstants& derived() const { return d_; }

    double implicit_residual(double q_i, double v_g, double v_ch) const;
    /// dF/dQ_i, always negative.
    double implicit_slope(double q_i) const;
    double surface_potential(double q_i, double v_g) const;

    /// Bracketing on ln Q_i followed by safeguarded Newton; |F| < 1e-12 V.
    double solve_charge_reference(double v_g, double v_ch) const;
    /// Closed-form seed plus two fixed Householder corrections.
    double solve_charge_householder(double v_g, double v_ch) const;
    double solve_charge(double v_g, double v_ch, Solver s) const;

    ChargeSolution solve_ends(double v_g, double v_ds, Solver s = Solver::householder) const;

    double current_bracket(double q_i) const;
    /// B(q_a) - B(q_b) without cancellation; exactly antisymmetric in its arguments.
    double bracket_difference(double q_a, double q_b) const;

    EffectFactors effect_wrappers(double q_s, double q_d, double v_ds) const;

    /// Source-referenced drain current, A.
    double drain_current(double v_g, double v_ds, Solver s = Solver::householder) const;
    /// Terminal-voltage form used by the circuit engine and the Gummel test.
    TerminalCurrent evaluate(double v_g, double v_d, double v_s, Solver s = Solver::householder) const;

    /// Current, its derivatives and the terminal charges from one pair of charge solves.
    DeviceEvaluation evaluate_full(double v_g, double v_d, double v_s, Solver s = Solver::householder) const;

    TerminalCharges terminal_charges(double v_g, double v_ds, Solver s = Solver::householder) const;
    /// Ward-Dutton partition for given end charges (source end first).
    TerminalCharges partition(double q_s, double q_d) const;

private:
    double solve_overdrive(double overdrive, Solver s) const;
    double solve_reference_overdrive(double overdrive) const;
    double solve_householder_overdrive(double overdrive) const;
    TerminalCurrent current_from_ends(double q_s, double q_d, double v_ds) const;
    double overdrive(double v_g, double v_ch) const { return v_g - params_.V_fb - v_ch; }

    // Bias-independent pieces of the explicit seed.
    struct SeedConstants {
        double ln_scale_low = 0, shift_low = 0;
        double ln_scale_high = 0, shift_high = 0;
    };

    ModelParams params_;
    DerivedConstants d_;
    SeedConstants seed_;
};

} // namespace nvmflow::spcore
