#include "nvmflow/engine/netlist.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "nvmflow/util/text.hpp"

namespace nvmflow::engine {

namespace {

std::string summarize(const std::vector<Diagnostic>& d)
{
    std::ostringstream os;
    for (size_t i = 0; i < d.size(); ++i) {
        if (i) os << "\n";
        os << "line " << d[i].line << ": " << d[i].message;
    }
    return os.str();
}

struct Line {
    int number;
    std::string text;
};

// Joins '+' continuations, drops comments and blank lines, stops at .end.
std::vector<Line> logical_lines(std::string_view text)
{
    std::vector<Line> out;
    int number = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string raw(text.substr(pos, end - pos));
        pos = end + 1;
        ++number;
        if (auto semi = raw.find(';'); semi != std::string::npos) raw.erase(semi);
        std::string_view t = util::trim(raw);
        if (t.empty() || t.front() == '*') {
            if (end == text.size()) break;
            continue;
        }
        if (t.front() == '+' && !out.empty()) {
            out.back().text += " ";
            out.back().text += std::string(t.substr(1));
        } else {
            out.push_back({number, std::string(t)});
        }
        if (end == text.size()) break;
    }
    return out;
}

std::vector<std::string> tokenize(const std::string& line)
{
    std::string s;
    s.reserve(line.size());
    for (char c : line) s += (c == '(' || c == ')' || c == ',' || c == '\t' || c == '\r') ? ' ' : c;
    // "key = val" -> "key=val"
    std::string joined;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == ' ') {
            size_t j = i;
            while (j < s.size() && s[j] == ' ') ++j;
            if ((j < s.size() && s[j] == '=') || (!joined.empty() && joined.back() == '=')) {
                i = j - 1;
                continue;
            }
        }
        joined += s[i];
    }
    std::vector<std::string> out;
    std::istringstream is(joined);
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
}

class Parser {
public:
    Netlist run(std::string_view text)
    {
        for (const auto& line : logical_lines(text)) {
            line_ = line.number;
            auto toks = tokenize(line.text);
            if (toks.empty()) continue;
            const std::string head = util::to_lower(toks[0]);
            if (head == ".end") break;
            try {
                if (head[0] == '.') card(head, toks);
                else element(head, toks);
            } catch (const LineError&) {
                // already recorded
            }
        }
        resolve();
        if (!errors_.empty()) throw ParseError(std::move(errors_));
        for (const auto& [id, uses] : node_uses_) {
            if (id != 0 && uses.first == 1)
                out_.warnings.push_back({uses.second, "node '" + out_.circuit.node_name(id) + "' is connected only once"});
        }
        return std::move(out_);
    }

private:
    struct LineError {};

    [[noreturn]] void fail(const std::string& msg)
    {
        errors_.push_back({line_, msg});
        throw LineError{};
    }

    double number(const std::string& tok, const char* what)
    {
        auto v = util::parse_number(tok);
        if (!v) fail(std::string("malformed number '") + tok + "' for " + what);
        return *v;
    }

    NodeId node(const std::string& tok)
    {
        const NodeId id = out_.circuit.node(tok);
        auto& u = node_uses_[id];
        if (u.first++ == 0) u.second = line_;
        return id;
    }

    void need(const std::vector<std::string>& t, size_t n, const char* usage)
    {
        if (t.size() < n) fail(std::string("expected ") + usage);
    }

    void add(Element e)
    {
        const std::string name = element_name(e);
        if (out_.circuit.find(name)) fail("duplicate element '" + name + "'");
        out_.circuit.add(std::move(e));
        element_lines_[name] = line_;
    }

    // Splits trailing key=value options from positional tokens.
    std::map<std::string, std::string> options(const std::vector<std::string>& t, size_t from,
                                               std::vector<std::string>* positional = nullptr)
    {
        std::map<std::string, std::string> out;
        for (size_t i = from; i < t.size(); ++i) {
            if (auto kv = util::split_assignment(t[i])) {
                out[util::to_lower(kv->first)] = kv->second;
            } else if (positional) {
                positional->push_back(t[i]);
            } else {
                fail("unexpected token '" + t[i] + "'");
            }
        }
        return out;
    }

    SourceWave wave(const std::vector<std::string>& t, size_t from)
    {
        SourceWave w;
        for (size_t i = from; i < t.size(); ++i) {
            const std::string k = util::to_lower(t[i]);
            if (k == "dc") {
                if (i + 1 >= t.size()) fail("DC needs a value");
                w.dc = number(t[++i], "DC value");
            } else if (k == "pulse") {
                std::vector<double> v;
                while (i + 1 < t.size() && v.size() < 7 && util::parse_number(t[i + 1])) v.push_back(number(t[++i], "PULSE"));
                if (v.size() < 2) fail("PULSE needs at least v1 and v2");
                v.resize(7, 0.0);
                w.pulse = Pulse{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
                if (w.pulse->tr < 0 || w.pulse->tf < 0 || w.pulse->pw < 0 || w.pulse->td < 0)
                    fail("PULSE times must be >= 0");
            } else if (!w.dc && !w.pulse) {
                w.dc = number(t[i], "source value");
            } else {
                fail("unexpected token '" + t[i] + "' in source");
            }
        }
        return w;
    }

    void element(const std::string& head, const std::vector<std::string>& t)
    {
        const char kind = head[0];
        if (head.rfind("xr", 0) == 0) {
            need(t, 4, "XR<id> n+ n- model=<name> [x0=<val>]");
            RramDevice d{head, node(t[1]), node(t[2]), {}, {}};
            auto opt = options(t, 3);
            for (auto& [k, v] : opt) {
                if (k == "model") d.model = util::to_lower(v);
                else if (k == "x0") d.x0 = number(v, "x0");
                else fail("unknown option '" + k + "' on " + head);
            }
            if (d.model.empty()) fail(head + ": missing model=");
            if (d.x0 && (*d.x0 < 0 || *d.x0 > 1)) fail(head + ": x0 outside [0, 1]");
            add(std::move(d));
        } else if (head.rfind("xf", 0) == 0) {
            need(t, 7, "XF<id> d s sg nfb pfb model=<name> [qfg0=<val>]");
            FloatingGateDevice d{head, node(t[1]), node(t[2]), node(t[3]), node(t[4]), node(t[5]), {}, {}};
            for (auto& [k, v] : options(t, 6)) {
                if (k == "model") d.model = util::to_lower(v);
                else if (k == "qfg0") d.qfg0 = number(v, "qfg0");
                else fail("unknown option '" + k + "' on " + head);
            }
            if (d.model.empty()) fail(head + ": missing model=");
            add(std::move(d));
        } else if (kind == 'r') {
            need(t, 4, "R<id> n1 n2 <val>");
            if (t.size() > 4) fail("unexpected token '" + t[4] + "'");
            Resistor r{head, node(t[1]), node(t[2]), number(t[3], "resistance")};
            if (!(r.r > 0)) fail("resistance must be > 0");
            add(std::move(r));
        } else if (kind == 'c') {
            need(t, 4, "C<id> n1 n2 <val> [ic=<v>]");
            Capacitor c{head, node(t[1]), node(t[2]), number(t[3], "capacitance"), {}};
            if (!(c.c > 0)) fail("capacitance must be > 0");
            for (auto& [k, v] : options(t, 4)) {
                if (k == "ic") c.ic = number(v, "ic");
                else fail("unknown option '" + k + "' on " + head);
            }
            add(std::move(c));
        } else if (kind == 'v') {
            need(t, 3, "V<id> n+ n- [DC <val>] [PULSE(...)]");
            add(VoltageSource{head, node(t[1]), node(t[2]), wave(t, 3)});
        } else if (kind == 'i') {
            need(t, 4, "I<id> n+ n- DC <val>");
            add(CurrentSource{head, node(t[1]), node(t[2]), wave(t, 3)});
        } else if (kind == 'm') {
            need(t, 5, "M<id> d g s model=<name>");
            Mosfet m{head, node(t[1]), node(t[2]), node(t[3]), {}};
            std::vector<std::string> pos;
            for (auto& [k, v] : options(t, 4, &pos)) {
                if (k == "model") m.model = util::to_lower(v);
                else fail("unknown option '" + k + "' on " + head);
            }
            if (m.model.empty() && pos.size() == 1) m.model = util::to_lower(pos[0]);
            else if (!pos.empty()) fail("unexpected token '" + pos[0] + "'");
            if (m.model.empty()) fail(head + ": missing model=");
            add(std::move(m));
        } else {
            fail("unknown card '" + t[0] + "'");
        }
    }

    void card(const std::string& head, const std::vector<std::string>& t)
    {
        if (head == ".model") {
            need(t, 3, ".model <name> <cmg|rram|fg> key=val ...");
            const std::string name = util::to_lower(t[1]);
            const std::string type = util::to_lower(t[2]);
            auto apply = [&](auto params) {
                for (auto& [k, v] : options(t, 3)) {
                    try {
                        params.set(k, number(v, k.c_str()));
                    } catch (const std::invalid_argument& e) {
                        fail(e.what());
                    }
                }
                try {
                    params.validate();
                } catch (const std::invalid_argument& e) {
                    fail(std::string(".model ") + name + ": " + e.what());
                }
                if (out_.circuit.find_model(name)) fail("duplicate model '" + name + "'");
                out_.circuit.set_model(name, params);
            };
            if (type == "cmg") apply(spcore::ModelParams{});
            else if (type == "rram") apply(rram::RramParams{});
            else if (type == "fg") apply(floatgate::FloatingGateParams{});
            else fail("unknown model type '" + t[2] + "' (expected cmg, rram or fg)");
        } else if (head == ".op") {
            if (t.size() > 1) fail("unexpected token '" + t[1] + "'");
            out_.analyses.push_back(OpAnalysis{});
        } else if (head == ".dc") {
            need(t, 5, ".dc <src> <start> <stop> <step>");
            if (t.size() > 5) fail("unexpected token '" + t[5] + "'");
            DcSweep d{util::to_lower(t[1]), number(t[2], "start"), number(t[3], "stop"), number(t[4], "step")};
            if (!(d.step > 0)) fail(".dc step must be > 0");
            sweep_lines_.emplace_back(out_.analyses.size(), line_);
            out_.analyses.push_back(d);
        } else if (head == ".tran") {
            need(t, 3, ".tran <tstep> <tstop> [uic] [method=be|trap]");
            Transient tr{number(t[1], "tstep"), number(t[2], "tstop")};
            if (!(tr.tstep > 0) || !(tr.tstop > 0)) fail(".tran tstep and tstop must be > 0");
            std::vector<std::string> pos;
            for (auto& [k, v] : options(t, 3, &pos)) {
                const std::string m = util::to_lower(v);
                if (k != "method") fail("unknown option '" + k + "' on .tran");
                if (m == "be" || m == "euler") tr.method = Integrator::backward_euler;
                else if (m == "trap" || m == "tr") tr.method = Integrator::trapezoidal;
                else fail("unknown integration method '" + v + "'");
            }
            for (auto& p : pos) {
                if (util::iequals(p, "uic")) tr.uic = true;
                else fail("unexpected token '" + p + "' on .tran");
            }
            out_.analyses.push_back(tr);
        } else {
            fail("unknown card '" + t[0] + "'");
        }
    }

    void resolve()
    {
        for (const auto& e : out_.circuit.elements()) {
            const std::string& name = element_name(e);
            line_ = element_lines_[name];
            std::visit(
                [&](const auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    auto check = [&](const std::string& model, auto tag, const char* kind) {
                        const ModelVariant* m = out_.circuit.find_model(model);
                        if (!m) errors_.push_back({line_, name + ": unresolved model '" + model + "'"});
                        else if (!std::holds_alternative<decltype(tag)>(*m))
                            errors_.push_back({line_, name + ": model '" + model + "' is not a " + kind + " model"});
                    };
                    if constexpr (std::is_same_v<T, Mosfet>) check(x.model, spcore::ModelParams{}, "cmg");
                    else if constexpr (std::is_same_v<T, RramDevice>) check(x.model, rram::RramParams{}, "rram");
                    else if constexpr (std::is_same_v<T, FloatingGateDevice>)
                        check(x.model, floatgate::FloatingGateParams{}, "fg");
                },
                e);
        }
        for (auto [index, line] : sweep_lines_) {
            const auto& d = std::get<DcSweep>(out_.analyses[index]);
            const Element* e = out_.circuit.find(d.source);
            if (!e || !(std::holds_alternative<VoltageSource>(*e) || std::holds_alternative<CurrentSource>(*e)))
                errors_.push_back({line, ".dc source '" + d.source + "' is not an independent source"});
        }
        std::stable_sort(errors_.begin(), errors_.end(),
                         [](const Diagnostic& a, const Diagnostic& b) { return a.line < b.line; });
    }

    Netlist out_;
    int line_ = 0;
    std::vector<Diagnostic> errors_;
    std::map<NodeId, std::pair<int, int>> node_uses_; // count, first line
    std::map<std::string, int> element_lines_;
    std::vector<std::pair<size_t, int>> sweep_lines_;
};

std::string fmt(double v)
{
    return util::format_double(v);
}

void write_wave(std::ostream& os, const SourceWave& w)
{
    if (w.dc) os << " DC " << fmt(*w.dc);
    if (w.pulse) {
        const auto& p = *w.pulse;
        os << " PULSE(" << fmt(p.v1) << " " << fmt(p.v2) << " " << fmt(p.td) << " " << fmt(p.tr) << " "
           << fmt(p.tf) << " " << fmt(p.pw) << " " << fmt(p.per) << ")";
    }
}

} // namespace

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(summarize(diagnostics)), diagnostics_(std::move(diagnostics))
{
}

Netlist parse_netlist(std::string_view text)
{
    return Parser{}.run(text);
}

Netlist load_netlist(const std::string& path)
{
    return parse_netlist(util::read_file(path));
}

std::string serialize(const Netlist& n)
{
    const Circuit& c = n.circuit;
    std::ostringstream os;
    os << "* nvmflow netlist\n";
    for (const auto& [name, m] : c.models()) {
        os << ".model " << name;
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, spcore::ModelParams>) os << " cmg";
                else if constexpr (std::is_same_v<T, rram::RramParams>) os << " rram";
                else os << " fg";
                for (const auto& [k, v] : to_pairs(p)) os << " " << k << "=" << fmt(v);
            },
            m);
        os << "\n";
    }
    auto nn = [&](NodeId id) { return c.node_name(id); };
    for (const auto& e : c.elements()) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                os << x.name;
                if constexpr (std::is_same_v<T, Resistor>) {
                    os << " " << nn(x.a) << " " << nn(x.b) << " " << fmt(x.r);
                } else if constexpr (std::is_same_v<T, Capacitor>) {
                    os << " " << nn(x.a) << " " << nn(x.b) << " " << fmt(x.c);
                    if (x.ic) os << " ic=" << fmt(*x.ic);
                } else if constexpr (std::is_same_v<T, VoltageSource> || std::is_same_v<T, CurrentSource>) {
                    os << " " << nn(x.p) << " " << nn(x.n);
                    write_wave(os, x.wave);
                } else if constexpr (std::is_same_v<T, Mosfet>) {
                    os << " " << nn(x.d) << " " << nn(x.g) << " " << nn(x.s) << " model=" << x.model;
                } else if constexpr (std::is_same_v<T, RramDevice>) {
                    os << " " << nn(x.p) << " " << nn(x.n) << " model=" << x.model;
                    if (x.x0) os << " x0=" << fmt(*x.x0);
                } else if constexpr (std::is_same_v<T, FloatingGateDevice>) {
                    os << " " << nn(x.d) << " " << nn(x.s) << " " << nn(x.sg) << " " << nn(x.nfb) << " " << nn(x.pfb)
                       << " model=" << x.model;
                    if (x.qfg0) os << " qfg0=" << fmt(*x.qfg0);
                }
                os << "\n";
            },
            e);
    }
    for (const auto& a : n.analyses) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, OpAnalysis>) {
                    os << ".op\n";
                } else if constexpr (std::is_same_v<T, DcSweep>) {
                    os << ".dc " << x.source << " " << fmt(x.start) << " " << fmt(x.stop) << " " << fmt(x.step) << "\n";
                } else {
                    os << ".tran " << fmt(x.tstep) << " " << fmt(x.tstop);
                    if (x.uic) os << " uic";
                    if (x.method == Integrator::trapezoidal) os << " method=trap";
                    os << "\n";
                }
            },
            a);
    }
    os << ".end\n";
    return os.str();
}

} // namespace nvmflow::engine
