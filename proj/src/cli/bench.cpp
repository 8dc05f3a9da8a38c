#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "nvmflow/cli/cli.hpp"

namespace nvmflow::cli {

std::vector<std::pair<double, double>> bench_grid(long n)
{
    if (n < 1) throw std::invalid_argument("bench: need at least one evaluation");
    const long per_row = std::min<long>(n, 100);
    const long rows = (n + per_row - 1) / per_row;
    std::vector<std::pair<double, double>> g;
    g.reserve(n);
    for (long k = 0; k < n; ++k) {
        const long i = k % per_row, j = k / per_row;
        const double vg = per_row > 1 ? -0.5 + 2.0 * i / (per_row - 1) : 0.5;
        const double vd = rows > 1 ? 1.0 * j / (rows - 1) : 0.5;
        g.push_back({vg, vd});
    }
    return g;
}

namespace {

BenchVariant time_variant(const spcore::CoreModel& m, const std::vector<std::pair<double, double>>& grid,
                          spcore::Solver s, int reps)
{
    BenchVariant v;
    v.solver = s;
    volatile double sink = 0;
    for (int r = 0; r < reps; ++r) {
        double acc = 0;
        const auto t0 = std::chrono::steady_clock::now();
        for (const auto& [vg, vd] : grid) {
            const auto e = m.evaluate_full(vg, vd, 0.0, s);
            acc += e.current.I + e.charges.Q_g;
        }
        const auto t1 = std::chrono::steady_clock::now();
        sink = sink + acc;
        v.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    auto sorted = v.seconds;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    v.median_seconds = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    v.evals_per_second = grid.size() / v.median_seconds;
    return v;
}

} // namespace

BenchReport bench_model_eval(const BenchConfig& cfg)
{
    if (cfg.repetitions < 1) throw std::invalid_argument("bench: need at least one repetition");
    const auto grid = bench_grid(cfg.evaluations);
    const spcore::CoreModel m(cfg.params);
    BenchReport r;
    r.evaluations = cfg.evaluations;
    r.reference = time_variant(m, grid, spcore::Solver::reference, cfg.repetitions);
    r.householder = time_variant(m, grid, spcore::Solver::householder, cfg.repetitions);
    return r;
}

engine::Table gummel_table(const spcore::ModelParams& p, double v_g, double vx_max, double step)
{
    if (!(step > 0) || !(vx_max >= 0)) throw std::invalid_argument("gummel: step must be > 0 and range >= 0");
    const spcore::CoreModel m(p);
    auto current = [&](double vx) { return m.evaluate(v_g, 0.5 * vx, -0.5 * vx).I; };
    engine::Table t;
    t.columns = {"vx", "i", "d1", "d2", "d3"};
    const long n = std::lround(vx_max / step);
    for (long k = -n; k <= n; ++k) {
        const double x = k * step, h = step;
        const double fm2 = current(x - 2 * h), fm1 = current(x - h), f0 = current(x), fp1 = current(x + h),
                     fp2 = current(x + 2 * h);
        t.rows.push_back({x, f0, (fp1 - fm1) / (2 * h), (fp1 - 2 * f0 + fm1) / (h * h),
                          (fp2 - 2 * fp1 + 2 * fm1 - fm2) / (2 * h * h * h)});
    }
    return t;
}

} // namespace nvmflow::cli
