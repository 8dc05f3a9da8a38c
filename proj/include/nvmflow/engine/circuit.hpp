#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nvmflow/floatgate/fg_model.hpp"
#include "nvmflow/rram/rram_model.hpp"
#include "nvmflow/spcore/model_params.hpp"

namespace nvmflow::engine {

/// SPICE PULSE(v1 v2 td tr tf pw per). per <= 0 means a single pulse.
struct Pulse {
    double v1 = 0, v2 = 0, td = 0, tr = 0, tf = 0, pw = 0, per = 0;

    bool operator==(const Pulse&) const = default;
    double value(double t) const;
    /// Corner times inside (t0, t1].
    void breakpoints(double t0, double t1, std::vector<double>& out) const;
};

struct SourceWave {
    std::optional<double> dc;
    std::optional<Pulse> pulse;

    bool operator==(const SourceWave&) const = default;
    /// Value used by DC analyses: the DC term, else the pulse's initial level.
    double dc_value() const;
    double at(double t) const;
};

using NodeId = int; // 0 is ground

struct Resistor {
    std::string name;
    NodeId a = 0, b = 0;
    double r = 0;
    bool operator==(const Resistor&) const = default;
};

struct Capacitor {
    std::string name;
    NodeId a = 0, b = 0;
    double c = 0;
    std::optional<double> ic; // initial v(a) - v(b), used with uic
    bool operator==(const Capacitor&) const = default;
};

struct VoltageSource {
    std::string name;
    NodeId p = 0, n = 0;
    SourceWave wave;
    bool operator==(const VoltageSource&) const = default;
};

/// Current flows from p through the source to n.
struct CurrentSource {
    std::string name;
    NodeId p = 0, n = 0;
    SourceWave wave;
    bool operator==(const CurrentSource&) const = default;
};

struct Mosfet {
    std::string name;
    NodeId d = 0, g = 0, s = 0;
    std::string model;
    bool operator==(const Mosfet&) const = default;
};

struct RramDevice {
    std::string name;
    NodeId p = 0, n = 0;
    std::string model;
    std::optional<double> x0;
    bool operator==(const RramDevice&) const = default;
};

struct FloatingGateDevice {
    std::string name;
    NodeId d = 0, s = 0, sg = 0, nfb = 0, pfb = 0;
    std::string model;
    std::optional<double> qfg0;
    bool operator==(const FloatingGateDevice&) const = default;
};

using Element =
    std::variant<Resistor, Capacitor, VoltageSource, CurrentSource, Mosfet, RramDevice, FloatingGateDevice>;

const std::string& element_name(const Element& e);

using ModelVariant = std::variant<spcore::ModelParams, rram::RramParams, floatgate::FloatingGateParams>;

/// Netlist-level circuit. Names of nodes, elements and models are lowercase.
class Circuit {
public:
    Circuit();

    /// Returns the id of a node, creating it on first use. "0" and "gnd" are ground.
    NodeId node(std::string_view name);
    std::optional<NodeId> find_node(std::string_view name) const;
    const std::string& node_name(NodeId id) const { return nodes_.at(id); }
    int node_count() const { return static_cast<int>(nodes_.size()); } // including ground

    /// Throws std::invalid_argument on a duplicate element name.
    void add(Element e);
    const std::vector<Element>& elements() const { return elements_; }
    Element* find(std::string_view name);
    const Element* find(std::string_view name) const;

    void set_model(std::string name, ModelVariant params);
    const std::map<std::string, ModelVariant>& models() const { return models_; }
    const ModelVariant* find_model(std::string_view name) const;

    /// Every element references existing nodes and a model of the right kind.
    /// Throws std::invalid_argument naming the first problem.
    void validate() const;

    bool operator==(const Circuit&) const = default;

private:
    std::vector<std::string> nodes_;
    std::map<std::string, NodeId, std::less<>> node_ids_;
    std::vector<Element> elements_;
    std::map<std::string, ModelVariant> models_;
};

enum class Integrator { backward_euler, trapezoidal };

struct OpAnalysis {
    bool operator==(const OpAnalysis&) const = default;
};

struct DcSweep {
    std::string source;
    double start = 0, stop = 0, step = 0;
    bool operator==(const DcSweep&) const = default;
};

struct Transient {
    double tstep = 0, tstop = 0;
    bool uic = false;
    Integrator method = Integrator::backward_euler;
    bool operator==(const Transient&) const = default;
};

using Analysis = std::variant<OpAnalysis, DcSweep, Transient>;

} // namespace nvmflow::engine
