#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nvmflow/physics.hpp"

namespace nvmflow::spcore {

/// Physical and geometric parameters of the common multi-gate core model.
/// Everything is strict SI. Defaults describe a single 10 nm fin.
struct ModelParams {
    double L = 30e-9;       // channel length, m
    double W = 40e-9;       // channel width, m
    double T_si = 10e-9;    // fin thickness, m
    double EOT = 1e-9;      // equivalent oxide thickness, m
    double N_A = 1e23;      // body doping, m^-3
    double n_i = 1.45e16;   // intrinsic carrier density, m^-3
    double mu0 = 0.03;      // low-field mobility, m^2/Vs
    double V_fb = -0.5;     // flat-band voltage, V
    double T = 300.0;       // temperature, K
    double eps_si = physics::eps_si_rel * physics::eps0;
    double eps_ox = physics::eps_ox_rel * physics::eps0;

    bool mobility_degradation = false;
    double E_mob = 1e8;     // critical vertical field, V/m
    bool velocity_saturation = false;
    double v_sat = 1e5;     // m/s

    bool operator==(const ModelParams&) const = default;

    /// Throws std::invalid_argument naming the first offending field.
    void validate() const;

    /// Set one field by its text key (case-insensitive, see to_text for the
    /// key list). Throws std::invalid_argument on unknown keys.
    void set(std::string_view key, double value);
};

/// Quantities derived from ModelParams. Recomputed from scratch on every call.
struct DerivedConstants {
    double V_t;      // kT/q, V
    double C_ox;     // F/m^2
    double C_si;     // F/m^2
    double Q_B;      // q N_A T_si / 2, C/m^2
    double phi_B;    // V_t ln(N_A/n_i), V
    double Q_c;      // Q_B + 5 V_t C_si, C/m^2
    double ln_qref2; // ln(q n_i^2/N_A T_si Q_c)
};

DerivedConstants derive(const ModelParams& p);

/// key=value text, one per line, '#' comments, SI units.
ModelParams parse_params(std::string_view text, ModelParams base = {});
ModelParams load_params_file(const std::string& path, ModelParams base = {});
/// Every settable field as (key, value), in a fixed order.
std::vector<std::pair<std::string, double>> to_pairs(const ModelParams& p);
std::string to_text(const ModelParams& p);

} // namespace nvmflow::spcore
