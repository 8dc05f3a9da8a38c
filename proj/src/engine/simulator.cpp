#include "nvmflow/engine/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "nvmflow/util/text.hpp"

namespace nvmflow::engine {

size_t Table::index(std::string_view column) const
{
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == column) return i;
    throw std::out_of_range("no column '" + std::string(column) + "'");
}

std::vector<double> Table::column(std::string_view name) const
{
    const size_t k = index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[k]);
    return out;
}

void Table::write_csv(std::ostream& os, const std::vector<std::string>& metadata) const
{
    for (const auto& m : metadata) os << "# " << m << '\n';
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
        for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << util::format_double(r[i]);
        os << '\n';
    }
}

namespace {

enum class RowKind { node, branch, state, charge };

struct Ctx {
    bool transient = false;
    bool use_wave = false; // DC at a transient start evaluates waveforms at `time`
    double time = 0;
    double source_scale = 1;
    double gmin_step = 0;
    double alpha = 0; // dq/dt ~ alpha (q - q_prev) - beta qdot_prev
    double beta = 0;
    const Eigen::VectorXd* q_prev = nullptr;
    const Eigen::VectorXd* qdot_prev = nullptr;
};

struct NewtonResult {
    bool ok = false;
    bool singular = false;
    int row = -1; // singular unknown or worst residual row
    double worst = 0;
};

} // namespace

struct Simulator::Impl {
    Circuit circuit;
    SimOptions opt;
    SimStats stats;

    int n = 0;
    int first_branch = 0;
    std::vector<std::string> names;
    std::vector<RowKind> kinds;
    std::vector<char> limited, pinned;
    std::vector<int> permanent_gmin;

    struct Lin {
        int a, b;
        double v;
    };
    struct Source {
        int p, n, branch;
        size_t elem;
    };
    struct Mos {
        int d, g, s;
        std::shared_ptr<const spcore::CoreModel> model;
        bool fg_gate;
    };
    struct Rram {
        int p, n, x;
        rram::RramParams params;
        double held;
    };
    struct Tunnel {
        int from, fg;
        std::shared_ptr<const floatgate::FloatingGateParams> params;
    };
    struct Fg {
        int node;
        int mos;
        double charge;
    };

    std::vector<Lin> resistors, caps;
    std::vector<std::pair<Lin, size_t>> user_caps; // for uic: capacitor and element index
    std::vector<Source> vsources, isources;
    std::vector<Mos> mos;
    std::vector<Rram> rrams;
    std::vector<Tunnel> tunnels;
    std::vector<Fg> fgs;
    std::vector<int> compiled; // element index -> index into its kind's vector
    std::map<std::string, size_t, std::less<>> element_index;

    // Assembly workspace
    Eigen::VectorXd f, q, fscale, qscale;
    Eigen::MatrixXd G, C;

    Eigen::VectorXd last;
    bool have_last = false;

    template <class T, class V>
    auto& device(V& vec, std::string_view name, const char* kind)
    {
        auto it = element_index.find(util::to_lower(name));
        if (it == element_index.end() || !std::holds_alternative<T>(circuit.elements()[it->second]))
            throw std::out_of_range(std::string("no ") + kind + " '" + std::string(name) + "'");
        return vec[compiled[it->second]];
    }

    Impl(Circuit c, SimOptions o) : circuit(std::move(c)), opt(o) { compile(); }

    static int idx(NodeId id) { return id - 1; }

    int add_unknown(std::string name, RowKind k)
    {
        names.push_back(std::move(name));
        kinds.push_back(k);
        return static_cast<int>(names.size()) - 1;
    }

    void compile()
    {
        circuit.validate();
        for (int i = 1; i < circuit.node_count(); ++i) add_unknown("v(" + circuit.node_name(i) + ")", RowKind::node);

        std::map<std::string, std::shared_ptr<const spcore::CoreModel>> cores;
        std::map<std::string, std::shared_ptr<const floatgate::FloatingGateParams>> fgparams;
        auto core_for = [&](const std::string& key, const spcore::ModelParams& p) {
            auto& slot = cores[key];
            if (!slot) slot = std::make_shared<const spcore::CoreModel>(p);
            return slot;
        };

        std::vector<int> nonlinear_nodes;
        const auto& elements = circuit.elements();
        compiled.assign(elements.size(), -1);
        std::vector<size_t> vsource_elems;
        for (size_t e = 0; e < elements.size(); ++e) {
            element_index.emplace(element_name(elements[e]), e);
            std::visit(
                [&](const auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, Resistor>) {
                        compiled[e] = static_cast<int>(resistors.size());
                        resistors.push_back({idx(x.a), idx(x.b), 1.0 / x.r});
                    } else if constexpr (std::is_same_v<T, Capacitor>) {
                        compiled[e] = static_cast<int>(caps.size());
                        caps.push_back({idx(x.a), idx(x.b), x.c});
                        user_caps.push_back({caps.back(), e});
                    } else if constexpr (std::is_same_v<T, VoltageSource>) {
                        vsource_elems.push_back(e);
                    } else if constexpr (std::is_same_v<T, CurrentSource>) {
                        compiled[e] = static_cast<int>(isources.size());
                        isources.push_back({idx(x.p), idx(x.n), -1, e});
                    } else if constexpr (std::is_same_v<T, Mosfet>) {
                        const auto& p = std::get<spcore::ModelParams>(*circuit.find_model(x.model));
                        compiled[e] = static_cast<int>(mos.size());
                        mos.push_back({idx(x.d), idx(x.g), idx(x.s), core_for(util::to_lower(x.model), p), false});
                        nonlinear_nodes.insert(nonlinear_nodes.end(), {idx(x.d), idx(x.g), idx(x.s)});
                        permanent_gmin.insert(permanent_gmin.end(), {idx(x.d), idx(x.s)});
                    } else if constexpr (std::is_same_v<T, RramDevice>) {
                        const auto& p = std::get<rram::RramParams>(*circuit.find_model(x.model));
                        const int xs = add_unknown("v(" + x.name + ".x)", RowKind::state);
                        compiled[e] = static_cast<int>(rrams.size());
                        rrams.push_back({idx(x.p), idx(x.n), xs, p, x.x0.value_or(p.X_init)});
                        nonlinear_nodes.insert(nonlinear_nodes.end(), {idx(x.p), idx(x.n)});
                        permanent_gmin.insert(permanent_gmin.end(), {idx(x.p), idx(x.n)});
                    } else if constexpr (std::is_same_v<T, FloatingGateDevice>) {
                        const std::string key = util::to_lower(x.model);
                        auto& fp = fgparams[key];
                        if (!fp)
                            fp = std::make_shared<const floatgate::FloatingGateParams>(
                                std::get<floatgate::FloatingGateParams>(*circuit.find_model(x.model)));
                        const int fg = add_unknown("v(" + x.name + ".fg)", RowKind::charge);
                        auto node_of = [&](floatgate::Terminal t) {
                            switch (t) {
                            case floatgate::Terminal::d: return idx(x.d);
                            case floatgate::Terminal::s: return idx(x.s);
                            case floatgate::Terminal::sg: return idx(x.sg);
                            case floatgate::Terminal::nfb: return idx(x.nfb);
                            case floatgate::Terminal::pfb: return idx(x.pfb);
                            case floatgate::Terminal::fg: return fg;
                            }
                            return -1;
                        };
                        const auto sc = floatgate::build_subcircuit(*fp);
                        for (const auto& c : sc.caps) caps.push_back({node_of(c.a), node_of(c.b), c.c});
                        compiled[e] = static_cast<int>(fgs.size());
                        fgs.push_back({fg, static_cast<int>(mos.size()), x.qfg0.value_or(0.0)});
                        const int d = node_of(sc.readout.d), g = node_of(sc.readout.g), s = node_of(sc.readout.s);
                        mos.push_back({d, g, s, core_for("fg:" + key, fp->mos), true});
                        for (const auto& t : sc.tunnels) {
                            tunnels.push_back({node_of(t.from), node_of(t.to), fp});
                            nonlinear_nodes.push_back(node_of(t.from));
                        }
                        nonlinear_nodes.insert(nonlinear_nodes.end(), {d, g, s});
                        permanent_gmin.insert(permanent_gmin.end(), {d, s});
                    }
                },
                elements[e]);
        }
        first_branch = static_cast<int>(names.size());
        for (size_t e : vsource_elems) {
            const auto& v = std::get<VoltageSource>(elements[e]);
            compiled[e] = static_cast<int>(vsources.size());
            const int br = add_unknown("i(" + v.name + ")", RowKind::branch);
            vsources.push_back({idx(v.p), idx(v.n), br, e});
        }
        n = static_cast<int>(names.size());

        limited.assign(n, 0);
        pinned.assign(n, 0);
        for (int k : nonlinear_nodes)
            if (k >= 0) limited[k] = 1;
        for (const auto& v : vsources) {
            if (v.n < 0 && v.p >= 0) pinned[v.p] = 1;
            if (v.p < 0 && v.n >= 0) pinned[v.n] = 1;
        }
        std::sort(permanent_gmin.begin(), permanent_gmin.end());
        permanent_gmin.erase(std::unique(permanent_gmin.begin(), permanent_gmin.end()), permanent_gmin.end());
        permanent_gmin.erase(std::remove(permanent_gmin.begin(), permanent_gmin.end(), -1), permanent_gmin.end());

        f.resize(n);
        q.resize(n);
        fscale.resize(n);
        qscale.resize(n);
        G.resize(n, n);
        C.resize(n, n);
    }

    const SourceWave& wave_of(size_t elem) const
    {
        const auto& e = circuit.elements()[elem];
        if (auto* v = std::get_if<VoltageSource>(&e)) return v->wave;
        return std::get<CurrentSource>(e).wave;
    }

    double source_value(size_t elem, const Ctx& ctx) const
    {
        const SourceWave& w = wave_of(elem);
        return ctx.source_scale * (ctx.use_wave || ctx.transient ? w.at(ctx.time) : w.dc_value());
    }

    // ---- stamping helpers; negative indices are ground
    void add_f(int r, double v)
    {
        if (r < 0) return;
        f[r] += v;
        fscale[r] = std::max(fscale[r], std::abs(v));
    }
    void add_q(int r, double v)
    {
        if (r < 0) return;
        q[r] += v;
        qscale[r] = std::max(qscale[r], std::abs(v));
    }
    void add_G(int r, int c, double v)
    {
        if (r >= 0 && c >= 0) G(r, c) += v;
    }
    void add_C(int r, int c, double v)
    {
        if (r >= 0 && c >= 0) C(r, c) += v;
    }
    static double at(const Eigen::VectorXd& x, int i) { return i < 0 ? 0.0 : x[i]; }

    void stamp_conductance(int a, int b, double g, const Eigen::VectorXd& x)
    {
        const double i = g * (at(x, a) - at(x, b));
        add_f(a, i);
        add_f(b, -i);
        add_G(a, a, g);
        add_G(b, b, g);
        add_G(a, b, -g);
        add_G(b, a, -g);
    }

    void stamp_mos_charges(const Mos& m, const spcore::TerminalCharges& c0, const Eigen::VectorXd& x)
    {
        const int term[3] = {m.g, m.d, m.s};
        auto contributions = [](const spcore::TerminalCharges& c) {
            return std::array<double, 3>{-(c.Q_s + c.Q_d), c.Q_d, c.Q_s};
        };
        const auto base = contributions(c0);
        for (int k = 0; k < 3; ++k) add_q(term[k], base[k]);
        const double v[3] = {at(x, m.g), at(x, m.d), at(x, m.s)};
        constexpr double h = 1e-7;
        for (int col = 0; col < 3; ++col) {
            if (term[col] < 0) continue;
            double vp[3] = {v[0], v[1], v[2]};
            vp[col] += h;
            const auto cp = contributions(m.model->evaluate_full(vp[0], vp[1], vp[2], opt.mos_solver).charges);
            for (int k = 0; k < 3; ++k) add_C(term[k], term[col], (cp[k] - base[k]) / h);
        }
    }

    /// Fills f, q, G, C, fscale, qscale. DC rules drop tunneling and replace
    /// state rows by X - X_held; charge rows are replaced later.
    void assemble(const Eigen::VectorXd& x, const Ctx& ctx)
    {
        f.setZero();
        q.setZero();
        fscale.setZero();
        qscale.setZero();
        G.setZero();
        C.setZero();

        for (const auto& r : resistors) stamp_conductance(r.a, r.b, r.v, x);
        for (const auto& c : caps) {
            const double qa = c.v * (at(x, c.a) - at(x, c.b));
            add_q(c.a, qa);
            add_q(c.b, -qa);
            add_C(c.a, c.a, c.v);
            add_C(c.b, c.b, c.v);
            add_C(c.a, c.b, -c.v);
            add_C(c.b, c.a, -c.v);
        }
        for (int k : permanent_gmin) {
            add_f(k, opt.gmin * x[k]);
            add_G(k, k, opt.gmin);
        }
        for (const auto& v : vsources) {
            const double j = x[v.branch];
            add_f(v.p, j);
            add_f(v.n, -j);
            add_G(v.p, v.branch, 1);
            add_G(v.n, v.branch, -1);
            const double val = source_value(v.elem, ctx);
            f[v.branch] += at(x, v.p) - at(x, v.n) - val;
            fscale[v.branch] = std::max({std::abs(at(x, v.p)), std::abs(at(x, v.n)), std::abs(val)});
            add_G(v.branch, v.p, 1);
            add_G(v.branch, v.n, -1);
        }
        for (const auto& s : isources) {
            const double i = source_value(s.elem, ctx);
            add_f(s.p, i);
            add_f(s.n, -i);
        }
        for (const auto& m : mos) {
            const double vg = at(x, m.g), vd = at(x, m.d), vs = at(x, m.s);
            spcore::TerminalCurrent t;
            if (ctx.transient || m.fg_gate) {
                const auto ev = m.model->evaluate_full(vg, vd, vs, opt.mos_solver);
                t = ev.current;
                stamp_mos_charges(m, ev.charges, x);
            } else {
                t = m.model->evaluate(vg, vd, vs, opt.mos_solver);
            }
            add_f(m.d, t.I);
            add_f(m.s, -t.I);
            add_G(m.d, m.g, t.dI_dVg);
            add_G(m.d, m.d, t.dI_dVd);
            add_G(m.d, m.s, t.dI_dVs);
            add_G(m.s, m.g, -t.dI_dVg);
            add_G(m.s, m.d, -t.dI_dVd);
            add_G(m.s, m.s, -t.dI_dVs);
        }
        for (const auto& r : rrams) {
            const double v = at(x, r.p) - at(x, r.n);
            const double xs = x[r.x];
            const auto e = rram::evaluate(r.params, v, xs);
            add_f(r.p, e.I);
            add_f(r.n, -e.I);
            add_G(r.p, r.p, e.dI_dV);
            add_G(r.p, r.n, -e.dI_dV);
            add_G(r.n, r.p, -e.dI_dV);
            add_G(r.n, r.n, e.dI_dV);
            add_G(r.p, r.x, e.dI_dX);
            add_G(r.n, r.x, -e.dI_dX);
            if (ctx.transient) {
                add_f(r.x, -e.rate);
                add_G(r.x, r.p, -e.drate_dV);
                add_G(r.x, r.n, e.drate_dV);
                add_G(r.x, r.x, -e.drate_dX);
                add_q(r.x, xs);
                add_C(r.x, r.x, 1);
            } else {
                add_f(r.x, xs - r.held);
                fscale[r.x] = std::max(std::abs(xs), std::abs(r.held));
                add_G(r.x, r.x, 1);
            }
        }
        if (ctx.transient) {
            for (const auto& t : tunnels) {
                const double v = at(x, t.from) - x[t.fg];
                const double i = floatgate::fn_current(*t.params, v);
                const double g = floatgate::fn_conductance(*t.params, v);
                add_f(t.from, i);
                add_f(t.fg, -i);
                add_G(t.from, t.from, g);
                add_G(t.from, t.fg, -g);
                add_G(t.fg, t.from, -g);
                add_G(t.fg, t.fg, g);
            }
        }
    }

    double residual_abstol(int row, const Ctx& ctx) const
    {
        switch (kinds[row]) {
        case RowKind::node: return opt.iabstol;
        case RowKind::branch: return opt.vabstol;
        case RowKind::state: return ctx.transient ? opt.vabstol * std::max(ctx.alpha, 1.0) : opt.vabstol;
        case RowKind::charge: return ctx.transient ? opt.iabstol : opt.qabstol;
        }
        return opt.iabstol;
    }

    /// Residual r, Jacobian J and per-row tolerance from the last assemble().
    void combine(const Eigen::VectorXd& x, const Ctx& ctx, Eigen::VectorXd& r, Eigen::MatrixXd& J,
                 Eigen::VectorXd& tol)
    {
        r = f;
        J = G;
        Eigen::VectorXd scale = fscale;
        if (ctx.transient) {
            const Eigen::VectorXd dq = q - *ctx.q_prev;
            r += ctx.alpha * dq - ctx.beta * *ctx.qdot_prev;
            J += ctx.alpha * C;
            for (int i = 0; i < n; ++i)
                scale[i] = std::max({scale[i], std::abs(ctx.alpha * dq[i]), std::abs(ctx.beta * (*ctx.qdot_prev)[i])});
        } else {
            for (const auto& g : fgs) {
                r[g.node] = q[g.node] - g.charge;
                J.row(g.node) = C.row(g.node);
                scale[g.node] = std::max(qscale[g.node], std::abs(g.charge));
            }
            if (ctx.gmin_step > 0) {
                for (int i = 0; i < first_branch; ++i) {
                    if (kinds[i] != RowKind::node) continue;
                    r[i] += ctx.gmin_step * x[i];
                    J(i, i) += ctx.gmin_step;
                }
            }
        }
        tol.resize(n);
        for (int i = 0; i < n; ++i) tol[i] = opt.reltol * scale[i] + residual_abstol(i, ctx);
    }

    void clamp_states(Eigen::VectorXd& x) const
    {
        for (const auto& r : rrams) x[r.x] = std::clamp(x[r.x], 0.0, 1.0);
    }

    NewtonResult newton(Eigen::VectorXd& x, const Ctx& ctx)
    {
        Eigen::VectorXd r, tol, dx;
        Eigen::MatrixXd J;
        NewtonResult res;
        bool update_ok = false;
        for (int it = 0; it <= opt.max_iterations; ++it) {
            try {
                assemble(x, ctx);
            } catch (const spcore::ConvergenceError&) {
                return res;
            }
            combine(x, ctx, r, J, tol);
            bool residual_ok = true;
            res.worst = 0;
            for (int i = 0; i < n; ++i) {
                if (!std::isfinite(r[i])) return res;
                const double ratio = std::abs(r[i]) / tol[i];
                if (ratio > 1) residual_ok = false;
                if (ratio > res.worst) {
                    res.worst = ratio;
                    res.row = i;
                }
            }
            if (update_ok && residual_ok) {
                res.ok = true;
                return res;
            }
            if (it == opt.max_iterations) break;
            ++stats.newton_iterations;

            Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
            const auto& LU = lu.matrixLU();
            for (int i = 0; i < n; ++i) {
                const double colmax = J.col(i).cwiseAbs().maxCoeff();
                if (colmax == 0 || std::abs(LU(i, i)) <= 1e-15 * colmax) {
                    res.singular = true;
                    res.row = i;
                    return res;
                }
            }
            dx = lu.solve(-r);
            if (!dx.allFinite()) {
                res.singular = true;
                res.row = 0;
                return res;
            }
            update_ok = true;
            for (int i = 0; i < n; ++i) {
                if (limited[i] && !pinned[i] && std::abs(dx[i]) > opt.max_voltage_step) {
                    dx[i] = std::copysign(opt.max_voltage_step, dx[i]);
                    update_ok = false;
                }
            }
            Eigen::VectorXd xn = x + dx;
            clamp_states(xn);
            for (int i = 0; i < n && update_ok; ++i) {
                const double abstol = kinds[i] == RowKind::branch ? opt.iabstol : opt.vabstol;
                if (std::abs(xn[i] - x[i]) > opt.reltol * std::max(std::abs(xn[i]), std::abs(x[i])) + abstol)
                    update_ok = false;
            }
            x = std::move(xn);
        }
        return res;
    }

    [[noreturn]] void fail(const std::string& what, const NewtonResult& r) const
    {
        std::ostringstream os;
        os << what;
        if (r.singular)
            os << ": singular matrix at " << names.at(r.row);
        else if (r.row >= 0)
            os << ": worst residual at " << names[r.row] << " (" << util::format_double(r.worst) << "x tolerance)";
        throw SimulationError(os.str());
    }

    /// Zeros, pinned nodes at their source values, held RRAM states and
    /// floating gates from the linear coupling relation.
    Eigen::VectorXd initial_guess(const Ctx& ctx) const
    {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (const auto& v : vsources) {
            if (v.n < 0 && v.p >= 0) x[v.p] = source_value(v.elem, ctx);
            if (v.p < 0 && v.n >= 0) x[v.n] = -source_value(v.elem, ctx);
        }
        for (const auto& r : rrams) x[r.x] = r.held;
        settle_floating_gates(x);
        return x;
    }

    void settle_floating_gates(Eigen::VectorXd& x) const
    {
        for (const auto& g : fgs) {
            double ctot = 0, qsum = g.charge;
            for (const auto& c : caps) {
                if (c.b == g.node) {
                    ctot += c.v;
                    qsum += c.v * at(x, c.a);
                } else if (c.a == g.node) {
                    ctot += c.v;
                    qsum += c.v * at(x, c.b);
                }
            }
            if (ctot > 0) x[g.node] = qsum / ctot;
        }
    }

    Eigen::VectorXd solve_dc(Ctx ctx, const Eigen::VectorXd& guess, const char* what)
    {
        Eigen::VectorXd x = guess;
        NewtonResult r = newton(x, ctx);
        if (r.ok) return x;
        NewtonResult first = r;

        // gmin stepping
        ++stats.gmin_stepping;
        x = guess;
        bool ok = true;
        for (double g = 1e-3; g >= 1e-12 * 0.99; g *= 0.1) {
            ctx.gmin_step = g;
            if (!newton(x, ctx).ok) {
                ok = false;
                break;
            }
        }
        ctx.gmin_step = 0;
        if (ok && (r = newton(x, ctx)).ok) return x;

        // source stepping
        ++stats.source_stepping;
        Ctx c0 = ctx;
        c0.source_scale = 0;
        x = initial_guess(c0);
        if (!(r = newton(x, c0)).ok) fail(what, first.singular ? first : r);
        double lambda = 0, step = 0.1;
        while (lambda < 1) {
            const double next = std::min(1.0, lambda + step);
            Eigen::VectorXd trial = x;
            Ctx cs = ctx;
            cs.source_scale = next;
            if ((r = newton(trial, cs)).ok) {
                x = std::move(trial);
                lambda = next;
                step = std::min(0.5, step * 2);
            } else {
                step *= 0.5;
                if (step < 1e-4) fail(what, r);
            }
        }
        return x;
    }

    Eigen::VectorXd op()
    {
        Ctx ctx;
        const Eigen::VectorXd guess = have_last ? dc_seed(last, ctx) : initial_guess(ctx);
        last = solve_dc(ctx, guess, "operating point did not converge");
        have_last = true;
        return last;
    }

    /// Previous solution with pinned nodes, held state and fg charge refreshed.
    Eigen::VectorXd dc_seed(Eigen::VectorXd x, const Ctx& ctx) const
    {
        for (const auto& v : vsources) {
            if (v.n < 0 && v.p >= 0) x[v.p] = source_value(v.elem, ctx);
            if (v.p < 0 && v.n >= 0) x[v.n] = -source_value(v.elem, ctx);
        }
        for (const auto& r : rrams) x[r.x] = r.held;
        settle_floating_gates(x);
        return x;
    }

    std::vector<std::string> output_columns() const
    {
        std::vector<std::string> cols(names.begin(), names.begin() + first_branch);
        for (const auto& e : circuit.elements()) {
            if (std::holds_alternative<Resistor>(e) || std::holds_alternative<Capacitor>(e) ||
                std::holds_alternative<CurrentSource>(e))
                continue;
            cols.push_back("i(" + element_name(e) + ")");
        }
        return cols;
    }

    double element_current(const Eigen::VectorXd& x, size_t e) const
    {
        const auto& el = circuit.elements()[e];
        const int k = compiled[e];
        if (std::holds_alternative<VoltageSource>(el)) return x[vsources[k].branch];
        if (std::holds_alternative<Mosfet>(el) || std::holds_alternative<FloatingGateDevice>(el)) {
            const Mos& m = std::holds_alternative<Mosfet>(el) ? mos[k] : mos[fgs[k].mos];
            return m.model->evaluate(at(x, m.g), at(x, m.d), at(x, m.s), opt.mos_solver).I;
        }
        if (std::holds_alternative<RramDevice>(el)) {
            const Rram& r = rrams[k];
            return rram::rram_current(r.params, at(x, r.p) - at(x, r.n), x[r.x]);
        }
        if (std::holds_alternative<Resistor>(el)) {
            const Lin& r = resistors[k];
            return r.v * (at(x, r.a) - at(x, r.b));
        }
        if (std::holds_alternative<CurrentSource>(el)) return wave_of(e).dc_value();
        throw std::invalid_argument("no static current for '" + element_name(el) + "'");
    }

    std::vector<double> output_row(const Eigen::VectorXd& x) const
    {
        std::vector<double> row(x.data(), x.data() + first_branch);
        for (size_t e = 0; e < circuit.elements().size(); ++e) {
            const auto& el = circuit.elements()[e];
            if (std::holds_alternative<Resistor>(el) || std::holds_alternative<Capacitor>(el) ||
                std::holds_alternative<CurrentSource>(el))
                continue;
            row.push_back(element_current(x, e));
        }
        return row;
    }

    Table dc_sweep(const DcSweep& sw)
    {
        Element* el = circuit.find(sw.source);
        if (!el || !(std::holds_alternative<VoltageSource>(*el) || std::holds_alternative<CurrentSource>(*el)))
            throw std::invalid_argument(".dc: no independent source '" + sw.source + "'");
        if (!(std::abs(sw.step) > 0)) throw std::invalid_argument(".dc: step must be nonzero");
        const double span = sw.stop - sw.start;
        const double step = std::copysign(std::abs(sw.step), span == 0 ? 1.0 : span);
        const long count = static_cast<long>(std::floor(span / step + 1e-9)) + 1;
        SourceWave& wave = std::visit(
            [](auto& x) -> SourceWave& {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, VoltageSource> || std::is_same_v<T, CurrentSource>)
                    return x.wave;
                else
                    throw std::logic_error("not a source");
            },
            *el);
        const SourceWave saved = wave;

        Table t;
        t.columns.push_back(util::to_lower(sw.source));
        for (auto& c : output_columns()) t.columns.push_back(std::move(c));
        Ctx ctx;
        try {
            for (long i = 0; i < count; ++i) {
                const double value = sw.start + static_cast<double>(i) * step;
                wave = SourceWave{value, std::nullopt};
                const Eigen::VectorXd guess = have_last ? dc_seed(last, ctx) : initial_guess(ctx);
                last = solve_dc(ctx, guess, "dc sweep did not converge");
                have_last = true;
                std::vector<double> row{value};
                for (double v : output_row(last)) row.push_back(v);
                t.rows.push_back(std::move(row));
            }
        } catch (...) {
            wave = saved;
            throw;
        }
        wave = saved;
        return t;
    }

    Eigen::VectorXd uic_state() const
    {
        Ctx ctx;
        ctx.transient = true;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (const auto& v : vsources) {
            if (v.n < 0 && v.p >= 0) x[v.p] = source_value(v.elem, ctx);
            if (v.p < 0 && v.n >= 0) x[v.n] = -source_value(v.elem, ctx);
        }
        for (const auto& [c, e] : user_caps) {
            const auto& ic = std::get<Capacitor>(circuit.elements()[e]).ic;
            if (!ic) continue;
            if (c.a >= 0)
                x[c.a] = at(x, c.b) + *ic;
            else if (c.b >= 0)
                x[c.b] = -*ic;
        }
        for (const auto& r : rrams) x[r.x] = r.held;
        settle_floating_gates(x);
        return x;
    }

    Table transient(const Transient& tr)
    {
        if (!(tr.tstep > 0) || !(tr.tstop > 0)) throw std::invalid_argument(".tran: tstep and tstop must be > 0");
        const bool trap = tr.method == Integrator::trapezoidal;

        Eigen::VectorXd x;
        if (tr.uic) {
            x = uic_state();
        } else {
            Ctx c0;
            c0.use_wave = true;
            x = solve_dc(c0, initial_guess(c0), "initial operating point did not converge");
        }

        std::vector<double> bps;
        for (const auto& v : vsources)
            if (const auto& p = wave_of(v.elem).pulse) p->breakpoints(0, tr.tstop, bps);
        for (const auto& s : isources)
            if (const auto& p = wave_of(s.elem).pulse) p->breakpoints(0, tr.tstop, bps);
        std::sort(bps.begin(), bps.end());
        {
            // corners within rounding of each other or of tstop collapse to one point
            const double merge = 1e-9 * tr.tstep;
            std::vector<double> merged;
            for (double b : bps) {
                if (b >= tr.tstop - merge) break;
                if (merged.empty() || b - merged.back() > merge) merged.push_back(b);
            }
            merged.push_back(tr.tstop);
            bps = std::move(merged);
        }

        Table t;
        t.columns.push_back("time");
        for (auto& c : output_columns()) t.columns.push_back(std::move(c));
        auto record = [&](double time) {
            std::vector<double> row{time};
            for (double v : output_row(x)) row.push_back(v);
            t.rows.push_back(std::move(row));
        };
        record(0);

        Ctx ctx;
        ctx.transient = true;
        ctx.time = 0;
        assemble(x, ctx);
        Eigen::VectorXd q_prev = q;
        Eigen::VectorXd qdot_prev = Eigen::VectorXd::Zero(n);
        if (trap) {
            // consistent start: dq/dt = -f on rows that carry charge
            for (int i = 0; i < n; ++i)
                if (qscale[i] > 0 || C.row(i).cwiseAbs().maxCoeff() > 0) qdot_prev[i] = -f[i];
        }

        const double hmin = tr.tstep / std::ldexp(1.0, opt.max_step_halvings);
        double time = 0, h = tr.tstep;
        size_t bp = 0;
        while (time < tr.tstop) {
            while (bp < bps.size() && bps[bp] <= time + 1e-9 * tr.tstep) ++bp;
            const double next_bp = bp < bps.size() ? bps[bp] : tr.tstop;
            double t_new = time + h;
            if (t_new > next_bp - 1e-9 * tr.tstep) t_new = next_bp;
            const double hh = t_new - time;

            Ctx cs = ctx;
            cs.time = t_new;
            cs.alpha = trap ? 2.0 / hh : 1.0 / hh;
            cs.beta = trap ? 1.0 : 0.0;
            cs.q_prev = &q_prev;
            cs.qdot_prev = &qdot_prev;
            Eigen::VectorXd xn = x;
            const NewtonResult r = newton(xn, cs);
            if (!r.ok) {
                ++stats.rejected_steps;
                h = hh / 2;
                if (h < hmin * (1 - 1e-9)) {
                    std::ostringstream os;
                    os << "transient step failed at t=" << util::format_double(time) << " (step below "
                       << util::format_double(hmin) << ")";
                    fail(os.str(), r);
                }
                continue;
            }
            clamp_states(xn);
            x = std::move(xn);
            assemble(x, cs);
            const Eigen::VectorXd qdot = cs.alpha * (q - q_prev) - cs.beta * qdot_prev;
            q_prev = q;
            qdot_prev = qdot;
            time = t_new;
            record(time);
            h = std::min(tr.tstep, 2 * h);
        }

        for (auto& r : rrams) r.held = x[r.x];
        for (auto& g : fgs) g.charge = q_prev[g.node];
        last = x;
        have_last = true;
        return t;
    }
};

Simulator::Simulator(Circuit circuit, SimOptions options)
    : impl_(std::make_unique<Impl>(std::move(circuit), options))
{
}
Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

const Circuit& Simulator::circuit() const { return impl_->circuit; }
const SimOptions& Simulator::options() const { return impl_->opt; }
const SimStats& Simulator::stats() const { return impl_->stats; }

Eigen::VectorXd Simulator::op() { return impl_->op(); }
Table Simulator::dc_sweep(const DcSweep& sweep) { return impl_->dc_sweep(sweep); }
Table Simulator::transient(const Transient& spec) { return impl_->transient(spec); }

Table Simulator::run(const Analysis& analysis)
{
    return std::visit(
        [&](const auto& a) -> Table {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, OpAnalysis>) {
                Table t;
                t.columns = output_columns();
                t.rows.push_back(output_row(op()));
                return t;
            } else if constexpr (std::is_same_v<T, DcSweep>) {
                return dc_sweep(a);
            } else {
                return transient(a);
            }
        },
        analysis);
}

int Simulator::unknown_count() const { return impl_->n; }
const std::vector<std::string>& Simulator::unknown_names() const { return impl_->names; }
std::vector<std::string> Simulator::output_columns() const { return impl_->output_columns(); }
std::vector<double> Simulator::output_row(const Eigen::VectorXd& x) const { return impl_->output_row(x); }

double Simulator::voltage(const Eigen::VectorXd& x, std::string_view node) const
{
    const std::string key = "v(" + util::to_lower(node) + ")";
    if (key == "v(0)" || key == "v(gnd)") return 0.0;
    const auto& names = impl_->names;
    for (int i = 0; i < impl_->first_branch; ++i)
        if (names[i] == key) return x[i];
    throw std::out_of_range("no node '" + std::string(node) + "'");
}

double Simulator::current(const Eigen::VectorXd& x, std::string_view element) const
{
    auto it = impl_->element_index.find(util::to_lower(element));
    if (it == impl_->element_index.end()) throw std::out_of_range("no element '" + std::string(element) + "'");
    return impl_->element_current(x, it->second);
}

double Simulator::rram_state(std::string_view d) const
{
    return impl_->device<RramDevice>(impl_->rrams, d, "rram device").held;
}

void Simulator::set_rram_state(std::string_view d, double x)
{
    impl_->device<RramDevice>(impl_->rrams, d, "rram device").held = std::clamp(x, 0.0, 1.0);
}

double Simulator::fg_charge(std::string_view d) const
{
    return impl_->device<FloatingGateDevice>(impl_->fgs, d, "floating-gate device").charge;
}

void Simulator::set_fg_charge(std::string_view d, double q)
{
    impl_->device<FloatingGateDevice>(impl_->fgs, d, "floating-gate device").charge = q;
}

void Simulator::set_source(std::string_view name, SourceWave wave)
{
    Element* e = impl_->circuit.find(name);
    if (auto* v = e ? std::get_if<VoltageSource>(e) : nullptr)
        v->wave = std::move(wave);
    else if (auto* i = e ? std::get_if<CurrentSource>(e) : nullptr)
        i->wave = std::move(wave);
    else
        throw std::out_of_range("no independent source '" + std::string(name) + "'");
}

void Simulator::set_source_dc(std::string_view name, double value) { set_source(name, SourceWave{value, std::nullopt}); }

Eigen::VectorXd Simulator::kcl_residuals(const Eigen::VectorXd& x) const
{
    Ctx ctx;
    impl_->assemble(x, ctx);
    return impl_->f.head(impl_->circuit.node_count() - 1);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> Simulator::linear_stamps() const
{
    const int n = impl_->n;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n), C = Eigen::MatrixXd::Zero(n, n);
    auto stamp = [](Eigen::MatrixXd& M, int a, int b, double v) {
        if (a >= 0) M(a, a) += v;
        if (b >= 0) M(b, b) += v;
        if (a >= 0 && b >= 0) {
            M(a, b) -= v;
            M(b, a) -= v;
        }
    };
    for (const auto& r : impl_->resistors) stamp(G, r.a, r.b, r.v);
    for (const auto& c : impl_->caps) stamp(C, c.a, c.b, c.v);
    return {G, C};
}

} // namespace nvmflow::engine
