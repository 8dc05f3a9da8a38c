#pragma once

#include <string>
#include <vector>

#include "nvmflow/engine/simulator.hpp"
#include "nvmflow/rram/rram_model.hpp"
#include "nvmflow/spcore/model_params.hpp"

namespace nvmflow::neuro {

enum class AccessScheme { crossbar, one_t_one_r };

/// Differential RRAM array: word line i drives device (i, j, +) onto bit line
/// "blp<j>" and device (i, j, -) onto "blm<j>". Bit lines sit at virtual ground.
struct CrossbarSpec {
    int n_inputs = 3;
    int n_outputs = 1;
    rram::RramParams device;
    spcore::ModelParams access;  // series transistor, 1T1R only
    double v_read = 0.1;
    double v_gate_read = 1.5;    // 1T1R select-line level during reads
    AccessScheme scheme = AccessScheme::crossbar;

    void validate() const;
};

struct Synapse {
    int input = 0;
    int output = 0;
    bool plus = true;
    bool operator==(const Synapse&) const = default;
};

/// Netlist for the array. Devices are named xr<i>p<j> / xr<i>m<j>; word-line
/// sources vwl<i>; bit-line sources vblp<j> / vblm<j>; in 1T1R each row also
/// has a select line vsl<i> driving the gates of its access transistors.
engine::Circuit build_crossbar(const CrossbarSpec& spec, double x_init);
std::string device_name(const Synapse& s);

struct WriteVerifyConfig {
    double tolerance = 1e-5;  // |G - G_target| accepted, S
    int max_iterations = 40;
    // crossbar scheme: V/3 biasing, pulse width set from the model's rate at the
    // in-circuit device voltage
    double v_set = 1.5;
    double v_reset = 1.5;
    double width_factor = 0.7; // fraction of the predicted width actually applied
    double min_width = 1e-15;
    double max_width = 1e-6;
    // 1T1R scheme: fixed-width SET at v_pos, strength set by the gate voltage
    double v_pos = 1.0;
    double set_width = 1e-6;
    double gate_start = 0.3;
    double gate_step = 0.05;
    double gate_max = 1.5;
    double reset_gate = 1.5;
};

struct DeviceReport {
    Synapse synapse;
    double target = 0;
    double achieved = 0;
    int pulses = 0;
    bool converged = false;
    std::vector<double> error_trace; // |G - G_target| after each read
};

struct ProgramReport {
    std::vector<DeviceReport> devices;
    bool all_converged() const;
    int total_pulses() const;
};

class Crossbar {
public:
    /// Every device starts at conductance g_init.
    Crossbar(CrossbarSpec spec, double g_init);

    const CrossbarSpec& spec() const { return spec_; }
    engine::Simulator& simulator() { return sim_; }

    /// Applies the inputs to the word lines and returns I_plus - I_minus per
    /// output from a DC solve (device states frozen).
    std::vector<double> read_outputs(const std::vector<double>& inputs);
    /// In-circuit read of one device: its word line alone at v_read, the
    /// bit-line current converted back through the sinh conduction law.
    double measure(const Synapse& s);
    /// Conductance implied by the held state, no simulation.
    double conductance(const Synapse& s) const;
    void set_conductance(const Synapse& s, double g);

    /// One programming pulse on the selected device. Crossbar: V/3 scheme with
    /// amplitude v on the selected pair and v/3, 2v/3 on the others. 1T1R:
    /// selected row enabled with `gate`, unselected rows and columns isolated.
    void pulse(const Synapse& s, bool set, double amplitude, double width, double gate = 0.0);
    int pulse_count() const { return pulses_; }

    /// Closed-loop write-verify for each (synapse, target conductance) in order.
    /// Throws std::invalid_argument before any pulse if a target is outside [G_off, G_on].
    ProgramReport program_weights(const std::vector<std::pair<Synapse, double>>& targets,
                                  const WriteVerifyConfig& cfg = {});

private:
    void idle_bias();
    std::vector<std::pair<std::string, double>> levels(const Synapse& s, bool set, double amplitude, double gate) const;
    double device_voltage(const Synapse& s, bool set, double amplitude, double gate);
    double predicted_width(const Synapse& s, double g, double target, double amplitude, double gate,
                           const WriteVerifyConfig& cfg);
    DeviceReport write_verify(const Synapse& s, double target, const WriteVerifyConfig& cfg);

    CrossbarSpec spec_;
    engine::Simulator sim_;
    int pulses_ = 0;
};

/// Time for the state to move from x0 to x1 under a constant device voltage v
/// (sign of v must match the direction), from the closed-form window integral.
double switching_time(const rram::RramParams& p, double x0, double x1, double v);

} // namespace nvmflow::neuro
