#include "nvmflow/cli/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "nvmflow/engine/netlist.hpp"
#include "nvmflow/floatgate/harness.hpp"
#include "nvmflow/neuro/and_gate.hpp"
#include "nvmflow/neuro/macromodel.hpp"
#include "nvmflow/rram/harness.hpp"
#include "nvmflow/util/text.hpp"

#ifndef NVMFLOW_VERSION
#define NVMFLOW_VERSION "0.0.0"
#endif
#ifndef NVMFLOW_DATA_DIR
#define NVMFLOW_DATA_DIR "data"
#endif

namespace nvmflow::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string params_file;
    std::string out = "-";
    std::vector<std::string> sets;
    std::uint64_t seed = 42;
    int jobs = 1;
    std::string command_line;
};

// key=value assignments from --params then --set, applied through P::set
template <class P>
std::vector<std::pair<std::string, double>> assignments(const Common& c)
{
    std::vector<std::pair<std::string, double>> kv;
    if (!c.params_file.empty()) {
        std::string text;
        try {
            text = util::read_file(c.params_file);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
        for (const auto& line : util::parse_key_value_lines(text)) {
            const auto v = util::parse_number(line.value);
            if (!v)
                throw UsageError(c.params_file + ":" + std::to_string(line.line) + ": bad number '" + line.value + "'");
            kv.push_back({line.key, *v});
        }
    }
    for (const auto& s : c.sets) {
        const auto a = util::split_assignment(s);
        if (!a) throw UsageError("--set expects key=value, got '" + s + "'");
        const auto v = util::parse_number(a->second);
        if (!v) throw UsageError("--set " + a->first + ": bad number '" + a->second + "'");
        kv.push_back({util::to_lower(a->first), *v});
    }
    return kv;
}

template <class P>
P load(const Common& c, P p = {}, const char* prefix = nullptr)
{
    for (const auto& [k, v] : assignments<P>(c)) {
        std::string key = k;
        if (prefix) {
            if (!key.starts_with(prefix)) continue;
            key = key.substr(std::string(prefix).size());
        }
        try {
            p.set(key, v);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return p;
}

// same as load() but ignores keys meant for another parameter set
template <class P>
P load_excluding(const Common& c, const char* other_prefix)
{
    P p;
    for (const auto& [k, v] : assignments<P>(c)) {
        if (k.starts_with(other_prefix)) continue;
        try {
            p.set(k, v);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    p.validate();
    return p;
}

template <class P>
void describe(std::vector<std::string>& meta, const P& p, const std::string& prefix = "")
{
    for (const auto& [k, v] : to_pairs(p)) meta.push_back("param " + prefix + k + "=" + util::format_double(v));
}

std::vector<std::string> header(const Common& c, const std::string& sub)
{
    return {"nvmflow " NVMFLOW_VERSION, "command: " + c.command_line, "subcommand: " + sub,
            "seed: " + std::to_string(c.seed), "jobs: " + std::to_string(c.jobs)};
}

// every parameter as --set, so the file alone is enough to reproduce it
std::string rerun_line(const std::string& sub, const std::vector<std::string>& meta, const std::string& extra)
{
    std::string s = "rerun: nvmflow " + sub;
    for (const auto& m : meta)
        if (m.starts_with("param ")) s += " --set " + m.substr(6);
    return s + extra;
}

void emit(const Common& c, std::ostream& out, const engine::Table& t, std::vector<std::string> meta,
          const std::string& path_override = "")
{
    const std::string path = path_override.empty() ? c.out : path_override;
    if (path == "-") {
        t.write_csv(out, meta);
        return;
    }
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write " + path);
    t.write_csv(f, meta);
}

template <class F>
void parallel_for(int n, int jobs, F f)
{
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(jobs, n); ++t)
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < n; i += jobs) f(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<double> range(double a, double b, double step)
{
    if (!(step > 0)) throw UsageError("sweep step must be > 0");
    std::vector<double> v;
    const long n = std::lround(std::floor((b - a) / step + 1e-9));
    for (long k = 0; k <= n; ++k) v.push_back(a + k * step);
    return v;
}

std::string fmt(double v) { return util::format_double(v); }

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Compact device models, circuit simulation and neuromorphic experiments"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", NVMFLOW_VERSION);

    Common c;
    for (int i = 0; i < argc; ++i) c.command_line += (i ? " " : "") + std::string(argv[i]);
    auto common = [&](CLI::App* s) {
        s->add_option("--params", c.params_file, "key=value parameter file")->check(CLI::ExistingFile);
        s->add_option("--out,-o", c.out, "output CSV ('-' = stdout)");
        s->add_option("--set", c.sets, "parameter override key=value (repeatable)");
        s->add_option("--seed", c.seed, "random seed");
        s->add_option("--jobs,-j", c.jobs, "worker threads")->check(CLI::PositiveNumber);
        return s;
    };

    // idvg / idvd
    double vg_min = -0.5, vg_max = 1.5, vg_step = 0.01, vd_min = 0.0, vd_max = 1.5, vd_step = 0.01;
    std::vector<double> vds_list{0.05, 1.0}, vgs_list{0.5, 1.0, 1.5};
    bool reference = false;
    auto* idvg = common(app.add_subcommand("idvg", "drain current vs gate voltage"));
    idvg->add_option("--vg-min", vg_min);
    idvg->add_option("--vg-max", vg_max);
    idvg->add_option("--vg-step", vg_step);
    idvg->add_option("--vds", vds_list, "drain biases");
    idvg->add_flag("--reference", reference, "use the iterative charge solver");
    auto* idvd = common(app.add_subcommand("idvd", "drain current vs drain voltage"));
    idvd->add_option("--vd-min", vd_min);
    idvd->add_option("--vd-max", vd_max);
    idvd->add_option("--vd-step", vd_step);
    idvd->add_option("--vgs", vgs_list, "gate biases");
    idvd->add_flag("--reference", reference, "use the iterative charge solver");

    double cv_vds = 0.0;
    auto* cv = common(app.add_subcommand("cv", "terminal charges and gate capacitance vs gate voltage"));
    cv->add_option("--vg-min", vg_min);
    cv->add_option("--vg-max", vg_max);
    cv->add_option("--vg-step", vg_step);
    cv->add_option("--vds", cv_vds);

    double gummel_vg = 0.6, gummel_range = 0.1, gummel_step = 1e-3;
    auto* gummel = common(app.add_subcommand("gummel", "source/drain symmetry sweep with numerical derivatives"));
    gummel->add_option("--vg", gummel_vg);
    gummel->add_option("--vx-max", gummel_range);
    gummel->add_option("--vx-step", gummel_step);

    double iv_vmax = 1.0, iv_period = 1e-3, iv_tstep = 1e-6, iv_x0 = 0.0;
    auto* rram_iv = common(app.add_subcommand("rram-iv", "RRAM hysteresis under a triangular sweep"));
    rram_iv->add_option("--vmax", iv_vmax);
    rram_iv->add_option("--period", iv_period);
    rram_iv->add_option("--tstep", iv_tstep);
    rram_iv->add_option("--x0", iv_x0);

    double pgm_min = 0.2, pgm_max = 1.0, pgm_step = 0.05;
    rram::TuneSettings tune;
    auto* rram_tune = common(app.add_subcommand("rram-tune", "1T1R conductance vs programming gate voltage"));
    rram_tune->add_option("--vpgm-min", pgm_min);
    rram_tune->add_option("--vpgm-max", pgm_max);
    rram_tune->add_option("--vpgm-step", pgm_step);
    rram_tune->add_option("--vpos", tune.v_pos);
    rram_tune->add_option("--width", tune.width);
    rram_tune->add_option("--vread", tune.v_read);
    rram_tune->footer("--set keys apply to the RRAM; prefix with mos. for the access transistor");

    int fg_pulses = 5;
    double fg_amp = 10.0, fg_width = 100e-6;
    auto* fg = common(app.add_subcommand("fg-pulse", "floating-gate read current under program pulses"));
    fg->add_option("--pulses", fg_pulses, "pfb pulses, then as many nfb pulses")->check(CLI::NonNegativeNumber);
    fg->add_option("--amplitude", fg_amp);
    fg->add_option("--width", fg_width);

    neuro::TrainConfig and_cfg;
    auto* xand = common(app.add_subcommand("crossbar-and", "train a 3x1 RRAM crossbar on AND"));
    xand->add_option("--lr", and_cfg.learning_rate);
    xand->add_option("--epochs", and_cfg.epochs);
    xand->add_option("--activation", and_cfg.activation)
        ->transform(CLI::CheckedTransformer(std::map<std::string, neuro::Activation>{
            {"sigmoid", neuro::Activation::sigmoid}, {"tanh", neuro::Activation::tanh}, {"relu", neuro::Activation::relu}}));
    xand->add_option("--tolerance", and_cfg.verify.tolerance, "write-verify tolerance, S");

    neuro::MacromodelConfig mm;
    std::string data_dir;
    bool no_baseline = false, audit = false;
    auto* mnist = common(app.add_subcommand("mnist-train", "device-constrained MLP on MNIST"));
    mnist->add_option("--data", data_dir, "directory with the four IDX files (raw or .gz)");
    mnist->add_option("--layers", mm.layers)->delimiter(',');
    mnist->add_option("--levels", mm.levels, "conductance levels per device (0 = continuous)");
    mnist->add_option("--epochs", mm.epochs);
    mnist->add_option("--batch", mm.batch_size);
    mnist->add_option("--lr", mm.learning_rate);
    mnist->add_option("--range", mm.range_sigmas, "weight range in He-init standard deviations");
    mnist->add_flag("--no-baseline", no_baseline, "skip the continuous reference run");
    mnist->add_flag("--audit", audit, "print the synapse count for the layer list and exit");

    std::string netlist_path;
    auto* run = common(app.add_subcommand("run", "simulate a netlist"));
    run->add_option("netlist", netlist_path)->required();
    run->footer("Each analysis writes one CSV; with --out, analyses after the first go to <stem>.<k><ext>");

    long bench_n = 100000;
    int bench_reps = 5;
    auto* bench = common(app.add_subcommand("bench", "model evaluation throughput, reference vs explicit solver"));
    bench->add_option("--n", bench_n, "evaluations per repetition");
    bench->add_option("--reps", bench_reps, "repetitions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        const std::string sub = app.get_subcommands().front()->get_name();
        auto meta = header(c, sub);

        if (sub == "idvg" || sub == "idvd") {
            const auto p = load<spcore::ModelParams>(c);
            describe(meta, p);
            const spcore::CoreModel m(p);
            const auto solver = reference ? spcore::Solver::reference : spcore::Solver::householder;
            meta.push_back(std::string("solver: ") + (reference ? "reference" : "householder"));
            const bool vg_sweep = sub == "idvg";
            const auto outer = vg_sweep ? vds_list : vgs_list;
            const auto inner = vg_sweep ? range(vg_min, vg_max, vg_step) : range(vd_min, vd_max, vd_step);
            engine::Table t;
            t.columns = vg_sweep ? std::vector<std::string>{"vds", "vg", "id"} : std::vector<std::string>{"vg", "vds", "id"};
            t.rows.resize(outer.size() * inner.size());
            parallel_for(static_cast<int>(t.rows.size()), c.jobs, [&](int k) {
                const double a = outer[k / inner.size()], b = inner[k % inner.size()];
                const double id = vg_sweep ? m.drain_current(b, a, solver) : m.drain_current(a, b, solver);
                t.rows[k] = {a, b, id};
            });
            std::string extra;
            if (vg_sweep) {
                extra = " --vg-min " + fmt(vg_min) + " --vg-max " + fmt(vg_max) + " --vg-step " + fmt(vg_step);
                for (double v : vds_list) extra += " --vds " + fmt(v);
            } else {
                extra = " --vd-min " + fmt(vd_min) + " --vd-max " + fmt(vd_max) + " --vd-step " + fmt(vd_step);
                for (double v : vgs_list) extra += " --vgs " + fmt(v);
            }
            if (reference) extra += " --reference";
            meta.push_back(rerun_line(sub, meta, extra));
            emit(c, out, t, meta);
        } else if (sub == "cv") {
            const auto p = load<spcore::ModelParams>(c);
            describe(meta, p);
            const spcore::CoreModel m(p);
            const auto vg = range(vg_min, vg_max, vg_step);
            engine::Table t;
            t.columns = {"vg", "qg", "qs", "qd", "qb", "cgg"};
            t.rows.resize(vg.size());
            const double h = 1e-4;
            meta.push_back("cgg: central difference of qg, h = " + fmt(h) + " V");
            parallel_for(static_cast<int>(vg.size()), c.jobs, [&](int k) {
                const auto q = m.terminal_charges(vg[k], cv_vds);
                const double cgg =
                    (m.terminal_charges(vg[k] + h, cv_vds).Q_g - m.terminal_charges(vg[k] - h, cv_vds).Q_g) / (2 * h);
                t.rows[k] = {vg[k], q.Q_g, q.Q_s, q.Q_d, q.Q_bulk, cgg};
            });
            meta.push_back(rerun_line(sub, meta,
                                      " --vg-min " + fmt(vg_min) + " --vg-max " + fmt(vg_max) + " --vg-step " +
                                          fmt(vg_step) + " --vds " + fmt(cv_vds)));
            emit(c, out, t, meta);
        } else if (sub == "gummel") {
            const auto p = load<spcore::ModelParams>(c);
            describe(meta, p);
            const auto t = gummel_table(p, gummel_vg, gummel_range, gummel_step);
            meta.push_back(rerun_line(sub, meta,
                                      " --vg " + fmt(gummel_vg) + " --vx-max " + fmt(gummel_range) + " --vx-step " +
                                          fmt(gummel_step)));
            emit(c, out, t, meta);
        } else if (sub == "rram-iv") {
            const auto p = load<rram::RramParams>(c);
            describe(meta, p);
            const auto t = rram::hysteresis_sweep(p, iv_vmax, iv_period, iv_tstep, iv_x0);
            meta.push_back(rerun_line(sub, meta,
                                      " --vmax " + fmt(iv_vmax) + " --period " + fmt(iv_period) + " --tstep " +
                                          fmt(iv_tstep) + " --x0 " + fmt(iv_x0)));
            emit(c, out, t, meta);
        } else if (sub == "rram-tune") {
            const auto p = load_excluding<rram::RramParams>(c, "mos.");
            const auto mos = load<spcore::ModelParams>(c, {}, "mos.");
            describe(meta, p);
            describe(meta, mos, "mos.");
            const auto v = range(pgm_min, pgm_max, pgm_step);
            std::vector<rram::TunePoint> pts(v.size());
            parallel_for(static_cast<int>(v.size()), c.jobs,
                         [&](int k) { pts[k] = rram::tune_1t1r(p, mos, {v[k]}, tune).front(); });
            engine::Table t;
            t.columns = {"v_pgm", "x", "i_read"};
            std::vector<double> levels;
            for (const auto& q : pts) {
                t.rows.push_back({q.v_pgm, q.x, q.i_read});
                levels.push_back(q.i_read);
            }
            meta.push_back("distinguishable levels (5% relative gap): " +
                           std::to_string(rram::distinguishable_levels(levels, 0.05)));
            meta.push_back(rerun_line(sub, meta,
                                      " --vpgm-min " + fmt(pgm_min) + " --vpgm-max " + fmt(pgm_max) + " --vpgm-step " +
                                          fmt(pgm_step) + " --vpos " + fmt(tune.v_pos) + " --width " +
                                          fmt(tune.width) + " --vread " + fmt(tune.v_read)));
            emit(c, out, t, meta);
        } else if (sub == "fg-pulse") {
            const auto p = load<floatgate::FloatingGateParams>(c);
            describe(meta, p);
            floatgate::Cell cell(p);
            engine::Table t;
            t.columns = {"pulse", "v_pfb", "v_nfb", "width", "i_read", "q_fg", "v_fg"};
            t.rows.push_back({0, 0, 0, 0, cell.read(), cell.charge(), cell.floating_gate_voltage()});
            for (int k = 1; k <= 2 * fg_pulses; ++k) {
                const bool pfb = k <= fg_pulses;
                cell.program_pulse(pfb ? floatgate::Terminal::pfb : floatgate::Terminal::nfb, pfb ? fg_amp : -fg_amp,
                                   fg_width);
                t.rows.push_back({double(k), pfb ? fg_amp : 0.0, pfb ? 0.0 : -fg_amp, fg_width, cell.read(),
                                  cell.charge(), cell.floating_gate_voltage()});
            }
            meta.push_back(rerun_line(sub, meta,
                                      " --pulses " + std::to_string(fg_pulses) + " --amplitude " + fmt(fg_amp) +
                                          " --width " + fmt(fg_width)));
            emit(c, out, t, meta);
        } else if (sub == "crossbar-and") {
            neuro::CrossbarSpec spec;
            spec.device = load<rram::RramParams>(c);
            describe(meta, spec.device);
            const auto r = neuro::train_and_gate(spec, and_cfg);
            engine::Table t;
            t.columns = {"epoch", "correct", "loss", "w_x1", "w_x2", "w_bias"};
            for (const auto& h : r.history)
                t.rows.push_back({double(h.epoch), double(h.correct), h.loss, h.weights[0], h.weights[1], h.weights[2]});
            meta.push_back("success: " + std::string(r.success ? "4/4" : std::to_string(r.correct) + "/4") +
                           " after " + std::to_string(r.epochs) + " epochs, " + std::to_string(r.total_pulses) +
                           " pulses");
            meta.push_back("software baseline: " + std::to_string(r.ideal_correct) + "/4 after " +
                           std::to_string(r.ideal_epochs) + " epochs, weights " + fmt(r.ideal_weights[0]) + " " +
                           fmt(r.ideal_weights[1]) + " " + fmt(r.ideal_weights[2]));
            meta.push_back("write-verify tolerance: " + fmt(and_cfg.verify.tolerance) + " S");
            const char* act[] = {"sigmoid", "tanh", "relu"};
            meta.push_back(rerun_line(sub, meta,
                                      " --lr " + fmt(and_cfg.learning_rate) + " --epochs " +
                                          std::to_string(and_cfg.epochs) + " --activation " +
                                          act[static_cast<int>(and_cfg.activation)] + " --tolerance " +
                                          fmt(and_cfg.verify.tolerance)));
            emit(c, out, t, meta);
            err << "crossbar-and: " << (r.success ? "4/4" : std::to_string(r.correct) + "/4") << " after "
                << r.epochs << " epochs\n";
        } else if (sub == "mnist-train") {
            mm.seed = c.seed;
            mm.jobs = c.jobs;
            for (const auto& [k, v] : assignments<int>(c)) {
                if (k == "levels") mm.levels = static_cast<int>(v);
                else if (k == "epochs") mm.epochs = static_cast<int>(v);
                else if (k == "batch") mm.batch_size = static_cast<int>(v);
                else if (k == "lr") mm.learning_rate = v;
                else if (k == "range") mm.range_sigmas = v;
                else throw UsageError("mnist-train: unknown key '" + k + "' (levels epochs batch lr range)");
            }
            try {
                mm.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            if (audit) {
                const auto a = neuro::audit_synapses(mm.layers);
                out << "weights," << a.weights << "\nbiases," << a.biases << "\nparameters," << a.parameters()
                    << "\ndevices," << a.devices() << "\n";
                return 0;
            }
            if (data_dir.empty()) {
                const char* env = std::getenv("NVMFLOW_MNIST_DIR");
                data_dir = env ? env : NVMFLOW_DATA_DIR "/mnist";
            }
            const std::filesystem::path d = data_dir;
            auto pick = [&](const std::string& stem) {
                return std::filesystem::exists(d / stem) ? d / stem : d / (stem + ".gz");
            };
            neuro::Dataset train, test;
            try {
                train = neuro::load_mnist_idx(pick("train-images-idx3-ubyte"), pick("train-labels-idx1-ubyte"));
                test = neuro::load_mnist_idx(pick("t10k-images-idx3-ubyte"), pick("t10k-labels-idx1-ubyte"));
            } catch (const neuro::DataError& e) {
                throw UsageError(e.what());
            }
            const auto r = neuro::train_macromodel(mm, train, test, !no_baseline);
            std::string layers;
            for (int n : mm.layers) layers += (layers.empty() ? "" : ",") + std::to_string(n);
            meta.push_back("data: " + data_dir + " (" + std::to_string(train.size()) + " train, " +
                           std::to_string(test.size()) + " test)");
            meta.push_back("layers " + layers + ", levels " + std::to_string(mm.levels) + ", batch " +
                           std::to_string(mm.batch_size) + ", lr " + fmt(mm.learning_rate) + ", range " +
                           fmt(mm.range_sigmas) + " sigma");
            meta.push_back("final test accuracy: " + fmt(r.test_accuracy));
            if (r.has_baseline)
                meta.push_back("continuous baseline: " + fmt(r.baseline_test_accuracy) + ", gap " + fmt(r.gap()));
            for (size_t i = 0; i < r.confusion.size(); ++i) {
                std::string row = "confusion " + std::to_string(i) + ":";
                for (long v : r.confusion[i]) row += " " + std::to_string(v);
                meta.push_back(row);
            }
            meta.push_back("rerun: nvmflow mnist-train --data " + data_dir + " --layers " + layers + " --levels " +
                           std::to_string(mm.levels) + " --epochs " + std::to_string(mm.epochs) + " --batch " +
                           std::to_string(mm.batch_size) + " --lr " + fmt(mm.learning_rate) + " --range " +
                           fmt(mm.range_sigmas) + " --seed " + std::to_string(c.seed) +
                           (no_baseline ? " --no-baseline" : ""));
            std::ostringstream csv;
            r.write_csv(csv, meta);
            if (c.out == "-") {
                out << csv.str();
            } else {
                std::ofstream f(c.out);
                if (!f) throw UsageError("cannot write " + c.out);
                f << csv.str();
            }
            err << "mnist-train: test accuracy " << r.test_accuracy;
            if (r.has_baseline) err << " (continuous " << r.baseline_test_accuracy << ")";
            err << "\n";
        } else if (sub == "run") {
            engine::Netlist n;
            try {
                n = engine::load_netlist(netlist_path);
            } catch (const engine::ParseError& e) {
                for (const auto& d : e.diagnostics()) err << netlist_path << ":" << d.line << ": " << d.message << "\n";
                return 2;
            } catch (const std::exception& e) {
                throw UsageError(e.what());
            }
            for (const auto& w : n.warnings) err << netlist_path << ":" << w.line << ": warning: " << w.message << "\n";
            if (n.analyses.empty()) throw UsageError(netlist_path + ": no analysis card (.op, .dc or .tran)");
            engine::Simulator sim(n.circuit);
            meta.push_back("netlist: " + netlist_path);
            const auto& o = sim.options();
            meta.push_back("tolerances: reltol=" + fmt(o.reltol) + " vabstol=" + fmt(o.vabstol) +
                           " iabstol=" + fmt(o.iabstol) + " gmin=" + fmt(o.gmin));
            meta.push_back("rerun: nvmflow run " + netlist_path);
            std::istringstream text(engine::serialize(n));
            for (std::string line; std::getline(text, line);) meta.push_back("| " + line);
            for (size_t k = 0; k < n.analyses.size(); ++k) {
                auto t = sim.run(n.analyses[k]);
                std::string path;
                if (k > 0 && c.out != "-") {
                    const std::filesystem::path base = c.out;
                    path = (base.parent_path() / (base.stem().string() + "." + std::to_string(k) +
                                                  base.extension().string()))
                               .string();
                }
                auto m = meta;
                m.push_back("analysis: " + std::to_string(k + 1) + " of " + std::to_string(n.analyses.size()));
                if (k > 0 && c.out == "-") out << "\n";
                emit(c, out, t, m, path);
            }
        } else if (sub == "bench") {
            if (bench_n < 1) throw UsageError("bench: --n must be >= 1");
            if (bench_reps < 1) throw UsageError("bench: --reps must be >= 1");
            BenchConfig bc;
            bc.evaluations = bench_n;
            bc.repetitions = bench_reps;
            bc.params = load<spcore::ModelParams>(c);
            describe(meta, bc.params);
            const auto r = bench_model_eval(bc);
            engine::Table t;
            t.columns = {"variant", "rep", "seconds", "evals_per_s"};
            for (const auto* v : {&r.reference, &r.householder})
                for (size_t k = 0; k < v->seconds.size(); ++k)
                    t.rows.push_back({double(v->solver == spcore::Solver::householder), double(k), v->seconds[k],
                                      bench_n / v->seconds[k]});
            meta.push_back("variant 0 = reference (bracketed Newton), 1 = householder (explicit)");
            meta.push_back("evaluations per repetition: " + std::to_string(bench_n));
            meta.push_back("median evals/s: reference " + fmt(r.reference.evals_per_second) + ", householder " +
                           fmt(r.householder.evals_per_second));
            meta.push_back("speedup: " + fmt(r.speedup()));
            meta.push_back(rerun_line(sub, meta, " --n " + std::to_string(bench_n) + " --reps " + std::to_string(bench_reps)));
            emit(c, out, t, meta);
            err << "bench: householder/reference = " << r.speedup() << "x\n";
        }
        return 0;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "simulation failed: " << e.what() << "\n";
        return 1;
    }
}

} // namespace nvmflow::cli
