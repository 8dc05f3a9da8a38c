#pragma once

#include <iosfwd>
#include <vector>

#include "nvmflow/engine/simulator.hpp"
#include "nvmflow/spcore/core_model.hpp"

namespace nvmflow::cli {

/// Runs one subcommand. Exit status: 0 success, 1 simulation failure,
/// 2 usage or parse error. Diagnostics go to `err`; CSV goes to --out or `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct BenchConfig {
    long evaluations = 100000; // per repetition, >= 1
    int repetitions = 5;
    spcore::ModelParams params;
};

struct BenchVariant {
    spcore::Solver solver{};
    std::vector<double> seconds; // one per repetition
    double median_seconds = 0;
    double evals_per_second = 0; // from the median
};

struct BenchReport {
    long evaluations = 0;
    BenchVariant reference, householder;
    double speedup() const { return householder.evals_per_second / reference.evals_per_second; }
};

/// Bias points of the benchmark grid: V_g over [-0.5, 1.5] x V_ds over [0, 1],
/// 100 gate values per drain value, exactly `n` points.
std::vector<std::pair<double, double>> bench_grid(long n);

/// Times complete device evaluations (charge solves, current, terminal
/// charges) on the grid for both solver variants. Setup is outside the
/// timed region. Throws std::invalid_argument for n < 1 or repetitions < 1.
BenchReport bench_model_eval(const BenchConfig& cfg);

/// I(V_x) with V_d = +V_x/2, V_s = -V_x/2 over [-vx_max, vx_max] in `step`
/// increments, plus five-point central differences of orders 1..3 with h = step.
/// Columns: vx, i, d1, d2, d3.
engine::Table gummel_table(const spcore::ModelParams& p, double v_g, double vx_max, double step);

} // namespace nvmflow::cli
