#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nvmflow/engine/circuit.hpp"
#include "nvmflow/spcore/core_model.hpp"

namespace nvmflow::engine {

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimOptions {
    double reltol = 1e-6;
    double vabstol = 1e-9;  // V (also used for the dimensionless RRAM state)
    double iabstol = 1e-12; // A
    double qabstol = 1e-21; // C, floating-gate charge rows in DC
    int max_iterations = 100;
    double gmin = 1e-12;          // permanent, on transistor source/drain and RRAM terminals
    double max_voltage_step = 0.3; // per Newton iteration on nonlinear-device nodes
    int max_step_halvings = 10;    // transient step may shrink to tstep / 2^10
    spcore::Solver mos_solver = spcore::Solver::householder;
};

/// Rectangular result: one row per sweep point or accepted timepoint.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    /// Throws std::out_of_range for an unknown column.
    size_t index(std::string_view column) const;
    std::vector<double> column(std::string_view name) const;
    /// Metadata lines are written first, each prefixed with "# ".
    void write_csv(std::ostream& os, const std::vector<std::string>& metadata = {}) const;
};

struct SimStats {
    long newton_iterations = 0;
    int gmin_stepping = 0;   // DC solves that needed gmin stepping
    int source_stepping = 0; // DC solves that needed source stepping
    int rejected_steps = 0;
};

/// Modified nodal analysis over a Circuit. Device memory (RRAM filament state,
/// floating-gate charge) persists across analyses on the same instance.
///
/// Unknowns: every non-ground node voltage (netlist nodes, then one internal
/// state node per RRAM named "<dev>.x" and one floating node per floating-gate
/// device named "<dev>.fg"), then one branch current per voltage source.
class Simulator {
public:
    explicit Simulator(Circuit circuit, SimOptions options = {});
    ~Simulator();
    Simulator(Simulator&&) noexcept;
    Simulator& operator=(Simulator&&) noexcept;

    const Circuit& circuit() const;
    const SimOptions& options() const;

    /// DC operating point with device memory held. Seeds Newton from the
    /// previous solution of this instance when there is one.
    Eigen::VectorXd op();
    Table dc_sweep(const DcSweep& sweep);
    Table transient(const Transient& spec);
    Table run(const Analysis& analysis);

    int unknown_count() const;
    const std::vector<std::string>& unknown_names() const;
    /// Output columns after the leading time/sweep column.
    std::vector<std::string> output_columns() const;
    std::vector<double> output_row(const Eigen::VectorXd& x) const;

    double voltage(const Eigen::VectorXd& x, std::string_view node) const;
    /// Voltage sources: current into the + terminal. MOSFETs and floating-gate
    /// devices: channel current drain to source. RRAM: current n+ to n-.
    double current(const Eigen::VectorXd& x, std::string_view element) const;

    double rram_state(std::string_view device) const;
    void set_rram_state(std::string_view device, double x);
    double fg_charge(std::string_view device) const;
    void set_fg_charge(std::string_view device, double q);

    void set_source(std::string_view name, SourceWave wave);
    void set_source_dc(std::string_view name, double value);

    /// Static KCL sums (sum of currents leaving each netlist node) at x, DC rules.
    Eigen::VectorXd kcl_residuals(const Eigen::VectorXd& x) const;
    /// Conductance and capacitance contributions of the linear elements alone.
    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linear_stamps() const;

    const SimStats& stats() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace nvmflow::engine
