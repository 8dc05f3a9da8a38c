#include "nvmflow/engine/circuit.hpp"

#include <cmath>
#include <stdexcept>

#include "nvmflow/util/text.hpp"

namespace nvmflow::engine {

double Pulse::value(double t) const
{
    if (t < td) return v1;
    double local = t - td;
    if (per > 0) local = std::fmod(local, per);
    if (local < tr) return tr > 0 ? v1 + (v2 - v1) * local / tr : v2;
    local -= tr;
    if (local < pw) return v2;
    local -= pw;
    if (local < tf) return tf > 0 ? v2 + (v1 - v2) * local / tf : v1;
    return v1;
}

void Pulse::breakpoints(double t0, double t1, std::vector<double>& out) const
{
    const double corners[] = {0.0, tr, tr + pw, tr + pw + tf};
    for (double start = td;; start += per) {
        if (start > t1) break;
        for (double c : corners) {
            const double t = start + c;
            if (t > t0 && t <= t1) out.push_back(t);
        }
        if (per <= 0) break;
    }
}

double SourceWave::dc_value() const
{
    if (dc) return *dc;
    if (pulse) return pulse->v1;
    return 0.0;
}

double SourceWave::at(double t) const
{
    return pulse ? pulse->value(t) : dc_value();
}

const std::string& element_name(const Element& e)
{
    return std::visit([](const auto& x) -> const std::string& { return x.name; }, e);
}

Circuit::Circuit()
{
    nodes_.push_back("0");
    node_ids_.emplace("0", 0);
}

NodeId Circuit::node(std::string_view name)
{
    std::string key = util::to_lower(name);
    if (key == "gnd") key = "0";
    if (auto it = node_ids_.find(key); it != node_ids_.end()) return it->second;
    const NodeId id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(key);
    node_ids_.emplace(key, id);
    return id;
}

std::optional<NodeId> Circuit::find_node(std::string_view name) const
{
    std::string key = util::to_lower(name);
    if (key == "gnd") key = "0";
    if (auto it = node_ids_.find(key); it != node_ids_.end()) return it->second;
    return std::nullopt;
}

void Circuit::add(Element e)
{
    const std::string name = element_name(e);
    if (find(name)) throw std::invalid_argument("duplicate element '" + name + "'");
    elements_.push_back(std::move(e));
}

Element* Circuit::find(std::string_view name)
{
    const std::string key = util::to_lower(name);
    for (auto& e : elements_)
        if (element_name(e) == key) return &e;
    return nullptr;
}

const Element* Circuit::find(std::string_view name) const
{
    return const_cast<Circuit*>(this)->find(name);
}

void Circuit::set_model(std::string name, ModelVariant params)
{
    models_[util::to_lower(name)] = std::move(params);
}

const ModelVariant* Circuit::find_model(std::string_view name) const
{
    auto it = models_.find(util::to_lower(name));
    return it == models_.end() ? nullptr : &it->second;
}

namespace {

template <class T>
void require_model(const Circuit& c, const std::string& element, const std::string& model, const char* kind)
{
    const ModelVariant* m = c.find_model(model);
    if (!m) throw std::invalid_argument(element + ": unresolved model '" + model + "'");
    if (!std::holds_alternative<T>(*m))
        throw std::invalid_argument(element + ": model '" + model + "' is not a " + kind + " model");
}

} // namespace

void Circuit::validate() const
{
    const int n = node_count();
    auto check_nodes = [&](const std::string& name, std::initializer_list<NodeId> ids) {
        for (NodeId id : ids)
            if (id < 0 || id >= n) throw std::invalid_argument(name + ": node id out of range");
    };
    for (const auto& e : elements_) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, Resistor>) {
                    check_nodes(x.name, {x.a, x.b});
                    if (!(x.r > 0) || !std::isfinite(x.r)) throw std::invalid_argument(x.name + ": resistance must be > 0");
                } else if constexpr (std::is_same_v<T, Capacitor>) {
                    check_nodes(x.name, {x.a, x.b});
                    if (!(x.c > 0) || !std::isfinite(x.c)) throw std::invalid_argument(x.name + ": capacitance must be > 0");
                } else if constexpr (std::is_same_v<T, VoltageSource> || std::is_same_v<T, CurrentSource>) {
                    check_nodes(x.name, {x.p, x.n});
                } else if constexpr (std::is_same_v<T, Mosfet>) {
                    check_nodes(x.name, {x.d, x.g, x.s});
                    require_model<spcore::ModelParams>(*this, x.name, x.model, "cmg");
                } else if constexpr (std::is_same_v<T, RramDevice>) {
                    check_nodes(x.name, {x.p, x.n});
                    require_model<rram::RramParams>(*this, x.name, x.model, "rram");
                    if (x.x0 && !(*x.x0 >= 0.0 && *x.x0 <= 1.0)) throw std::invalid_argument(x.name + ": x0 outside [0, 1]");
                } else if constexpr (std::is_same_v<T, FloatingGateDevice>) {
                    check_nodes(x.name, {x.d, x.s, x.sg, x.nfb, x.pfb});
                    require_model<floatgate::FloatingGateParams>(*this, x.name, x.model, "fg");
                }
            },
            e);
    }
}

} // namespace nvmflow::engine
