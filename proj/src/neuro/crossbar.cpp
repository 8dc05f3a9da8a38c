#include "nvmflow/neuro/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nvmflow::neuro {

using namespace engine;

void CrossbarSpec::validate() const
{
    if (n_inputs < 1 || n_outputs < 1) throw std::invalid_argument("crossbar: need at least one input and one output");
    if (!(v_read > 0)) throw std::invalid_argument("crossbar: v_read must be > 0");
    device.validate();
    if (scheme == AccessScheme::one_t_one_r) access.validate();
}

std::string device_name(const Synapse& s)
{
    return "xr" + std::to_string(s.input) + (s.plus ? "p" : "m") + std::to_string(s.output);
}

namespace {

std::string wl(int i) { return "wl" + std::to_string(i); }
std::string sl(int i) { return "sl" + std::to_string(i); }
std::string bl(int j, bool plus) { return std::string(plus ? "blp" : "blm") + std::to_string(j); }

SourceWave dc(double v) { return SourceWave{v, std::nullopt}; }

} // namespace

Circuit build_crossbar(const CrossbarSpec& spec, double x_init)
{
    spec.validate();
    Circuit c;
    c.set_model("cell", spec.device);
    const bool one_t = spec.scheme == AccessScheme::one_t_one_r;
    if (one_t) c.set_model("acc", spec.access);

    for (int i = 0; i < spec.n_inputs; ++i) {
        c.add(VoltageSource{"v" + wl(i), c.node(wl(i)), 0, dc(0.0)});
        if (one_t) c.add(VoltageSource{"v" + sl(i), c.node(sl(i)), 0, dc(spec.v_gate_read)});
    }
    for (int j = 0; j < spec.n_outputs; ++j)
        for (bool plus : {true, false}) c.add(VoltageSource{"v" + bl(j, plus), c.node(bl(j, plus)), 0, dc(0.0)});

    for (int i = 0; i < spec.n_inputs; ++i)
        for (int j = 0; j < spec.n_outputs; ++j)
            for (bool plus : {true, false}) {
                const Synapse s{i, j, plus};
                const std::string name = device_name(s);
                if (!one_t) {
                    c.add(RramDevice{name, c.node(wl(i)), c.node(bl(j, plus)), "cell", x_init});
                } else {
                    const NodeId mid = c.node("n" + name.substr(2));
                    c.add(RramDevice{name, c.node(wl(i)), mid, "cell", x_init});
                    c.add(Mosfet{"m" + name.substr(2), mid, c.node(sl(i)), c.node(bl(j, plus)), "acc"});
                }
            }
    return c;
}

bool ProgramReport::all_converged() const
{
    return std::all_of(devices.begin(), devices.end(), [](const DeviceReport& d) { return d.converged; });
}

int ProgramReport::total_pulses() const
{
    int n = 0;
    for (const auto& d : devices) n += d.pulses;
    return n;
}

double switching_time(const rram::RramParams& p, double x0, double x1, double v)
{
    double y0, y1, rate;
    if (v > 0) {
        y0 = 1.0 - x0;
        y1 = 1.0 - x1;
        rate = p.k_set * std::sinh(v / p.Vc_set);
    } else {
        y0 = x0;
        y1 = x1;
        rate = p.k_reset * std::sinh(-v / p.Vc_reset);
    }
    if (!(rate > 0) || y1 > y0) return 0.0;
    if (y1 <= 0) return std::numeric_limits<double>::infinity();
    if (p.p == 1.0) return std::log(y0 / y1) / rate;
    return (std::pow(y1, 1 - p.p) - std::pow(y0, 1 - p.p)) / ((p.p - 1) * rate);
}

Crossbar::Crossbar(CrossbarSpec spec, double g_init)
    : spec_(std::move(spec)), sim_(build_crossbar(spec_, rram::state_for_conductance(spec_.device, g_init)))
{
}

void Crossbar::idle_bias()
{
    for (int i = 0; i < spec_.n_inputs; ++i) {
        sim_.set_source_dc("v" + wl(i), 0.0);
        if (spec_.scheme == AccessScheme::one_t_one_r) sim_.set_source_dc("v" + sl(i), spec_.v_gate_read);
    }
    for (int j = 0; j < spec_.n_outputs; ++j)
        for (bool plus : {true, false}) sim_.set_source_dc("v" + bl(j, plus), 0.0);
}

std::vector<double> Crossbar::read_outputs(const std::vector<double>& inputs)
{
    if (static_cast<int>(inputs.size()) != spec_.n_inputs)
        throw std::invalid_argument("read_outputs: expected " + std::to_string(spec_.n_inputs) + " inputs");
    idle_bias();
    for (int i = 0; i < spec_.n_inputs; ++i) sim_.set_source_dc("v" + wl(i), inputs[i]);
    const auto x = sim_.op();
    std::vector<double> out(spec_.n_outputs);
    for (int j = 0; j < spec_.n_outputs; ++j)
        out[j] = sim_.current(x, "v" + bl(j, true)) - sim_.current(x, "v" + bl(j, false));
    return out;
}

double Crossbar::measure(const Synapse& s)
{
    idle_bias();
    sim_.set_source_dc("v" + wl(s.input), spec_.v_read);
    const auto x = sim_.op();
    const std::string name = device_name(s);
    const double i = sim_.current(x, name);
    const double v = spec_.scheme == AccessScheme::crossbar
                         ? spec_.v_read
                         : sim_.voltage(x, wl(s.input)) - sim_.voltage(x, "n" + name.substr(2));
    return i / (spec_.device.V0 * std::sinh(v / spec_.device.V0));
}

double Crossbar::conductance(const Synapse& s) const
{
    return rram::conductance(spec_.device, sim_.rram_state(device_name(s)));
}

void Crossbar::set_conductance(const Synapse& s, double g)
{
    sim_.set_rram_state(device_name(s), rram::state_for_conductance(spec_.device, g));
}

std::vector<std::pair<std::string, double>> Crossbar::levels(const Synapse& s, bool set, double a, double gate) const
{
    std::vector<std::pair<std::string, double>> out;
    const bool one_t = spec_.scheme == AccessScheme::one_t_one_r;
    for (int i = 0; i < spec_.n_inputs; ++i) {
        const bool row = i == s.input;
        if (!one_t) {
            out.push_back({"v" + wl(i), set ? (row ? a : a / 3) : (row ? 0.0 : 2 * a / 3)});
        } else {
            out.push_back({"v" + wl(i), set && row ? a : 0.0});
            out.push_back({"v" + sl(i), row ? gate : 0.0});
        }
    }
    for (int j = 0; j < spec_.n_outputs; ++j)
        for (bool plus : {true, false}) {
            const bool col = j == s.output && plus == s.plus;
            double v;
            if (!one_t)
                v = set ? (col ? 0.0 : 2 * a / 3) : (col ? a : a / 3);
            else
                v = set ? (col ? 0.0 : a) : (col ? a : 0.0);
            out.push_back({"v" + bl(j, plus), v});
        }
    return out;
}

double Crossbar::device_voltage(const Synapse& s, bool set, double amplitude, double gate)
{
    for (const auto& [src, v] : levels(s, set, amplitude, gate)) sim_.set_source_dc(src, v);
    const auto x = sim_.op();
    const std::string name = device_name(s);
    const double v = sim_.voltage(x, wl(s.input)) -
                     sim_.voltage(x, spec_.scheme == AccessScheme::crossbar ? bl(s.output, s.plus) : "n" + name.substr(2));
    idle_bias();
    return v;
}

void Crossbar::pulse(const Synapse& s, bool set, double amplitude, double width, double gate)
{
    if (!(width > 0)) return;
    const double edge = 0.05 * width;
    for (const auto& [src, v] : levels(s, set, amplitude, gate)) {
        if (src.starts_with("vsl"))
            sim_.set_source_dc(src, v);
        else
            sim_.set_source(src, SourceWave{std::nullopt, Pulse{0, v, 0, edge, edge, width, 0}});
    }
    sim_.transient({width / 20, width + 2 * edge, false, Integrator::backward_euler});
    idle_bias();
    ++pulses_;
}

double Crossbar::predicted_width(const Synapse& s, double g, double target, double amplitude, double gate,
                                 const WriteVerifyConfig& cfg)
{
    // device voltage at the pulse levels, evaluated at both ends of the move; the
    // larger magnitude gives the shorter, never-overshooting estimate
    const auto& p = spec_.device;
    const bool set = target > g;
    const double x = rram::state_for_conductance(p, g), xt = rram::state_for_conductance(p, target);
    const std::string name = device_name(s);
    const double held = sim_.rram_state(name);
    double v = device_voltage(s, set, amplitude, gate);
    sim_.set_rram_state(name, xt);
    const double vt = device_voltage(s, set, amplitude, gate);
    sim_.set_rram_state(name, held);
    if (std::abs(vt) > std::abs(v)) v = vt;
    if (set != (v > 0)) return cfg.max_width;
    const double t = cfg.width_factor * switching_time(p, x, xt, v);
    return std::clamp(t, cfg.min_width, cfg.max_width);
}

DeviceReport Crossbar::write_verify(const Synapse& s, double target, const WriteVerifyConfig& cfg)
{
    DeviceReport r;
    r.synapse = s;
    r.target = target;
    double g = measure(s);
    r.error_trace.push_back(std::abs(g - target));
    double gate = cfg.gate_start, gate_step = cfg.gate_step;
    while (std::abs(g - target) >= cfg.tolerance && r.pulses < cfg.max_iterations) {
        const bool set = target > g;
        if (spec_.scheme == AccessScheme::crossbar) {
            const double a = set ? cfg.v_set : cfg.v_reset;
            pulse(s, set, a, predicted_width(s, g, target, a, 0.0, cfg));
        } else if (set) {
            pulse(s, true, cfg.v_pos, cfg.set_width, gate);
        } else {
            pulse(s, false, cfg.v_reset, predicted_width(s, g, target, cfg.v_reset, cfg.reset_gate, cfg), cfg.reset_gate);
        }
        ++r.pulses;
        const double g_new = measure(s);
        if (spec_.scheme == AccessScheme::one_t_one_r && set) {
            if (g_new > target + cfg.tolerance) {
                gate = std::max(0.0, gate - gate_step);
                gate_step *= 0.5;
            } else if (g_new - g < 0.25 * (target - g)) {
                gate = std::min(cfg.gate_max, gate + gate_step);
            }
        }
        g = g_new;
        r.error_trace.push_back(std::abs(g - target));
    }
    r.achieved = g;
    r.converged = std::abs(g - target) < cfg.tolerance;
    return r;
}

ProgramReport Crossbar::program_weights(const std::vector<std::pair<Synapse, double>>& targets,
                                        const WriteVerifyConfig& cfg)
{
    const auto& p = spec_.device;
    for (const auto& [s, g] : targets) {
        if (s.input < 0 || s.input >= spec_.n_inputs || s.output < 0 || s.output >= spec_.n_outputs)
            throw std::invalid_argument("program_weights: synapse out of range");
        if (!(g >= p.G_off && g <= p.G_on))
            throw std::invalid_argument("program_weights: target " + std::to_string(g) + " S outside [G_off, G_on]");
    }
    ProgramReport rep;
    for (const auto& [s, g] : targets) rep.devices.push_back(write_verify(s, g, cfg));
    return rep;
}

} // namespace nvmflow::neuro
