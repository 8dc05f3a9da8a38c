#include "nvmflow/spcore/core_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace nvmflow::spcore {

namespace {

constexpr double kVsatSmoothing = 1e-3;     // V
constexpr double kSymmetricLimit = 1e-6;    // relative |Qs - Qd| below which the series is used
constexpr double kSubthresholdSplit = 0.1; // q_s/Q_c below which the partition uses plain quadrature

// 6-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 6> kGl6x{-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                                      0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
constexpr std::array<double, 6> kGl6w{0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                                      0.4679139345726910, 0.3607615730481386, 0.1713244923791704};

// (e^x (x - 1) + 1) / x^2, finite at 0.
double phi(double x)
{
    if (std::abs(x) < 0.5) {
        double sum = 0, term = 0.5; // x^j / (j+2)!
        for (int j = 0; j < 24; ++j) {
            sum += (j + 1) * term;
            term *= x / (j + 3);
        }
        return sum;
    }
    return (std::exp(x) * (x - 1.0) + 1.0) / (x * x);
}

// -ln(1 - s) - s for s in [0, 1).
double log_tail(double s)
{
    if (s < 0.25) {
        double sum = 0, pw = s * s;
        for (int j = 2; j < 40; ++j) {
            sum += pw / j;
            pw *= s;
        }
        return sum;
    }
    return -std::log1p(-s) - s;
}

/// ln W0(z) for the principal Lambert W, given ln z. Seed quality only
/// (a few percent); the Householder steps do the rest.
double log_lambert_w(double ln_z)
{
    if (ln_z < -30.0) return ln_z;
    if (ln_z > 3.0) {
        const double l1 = ln_z;
        const double l2 = std::log(l1);
        return std::log(l1 - l2 + l2 / l1);
    }
    const double l = std::log1p(std::exp(ln_z));
    return std::log(l * (1.0 - std::log1p(l) / (2.0 + l)));
}

} // namespace

CoreModel::CoreModel(ModelParams params) : params_(params)
{
    params_.validate();
    d_ = derive(params_);
    const double s_low = d_.V_t * d_.C_ox, s_high = 2.0 * d_.V_t * d_.C_ox;
    seed_.ln_scale_low = std::log(s_low);
    seed_.shift_low = d_.ln_qref2 - std::log(d_.Q_c) - std::log(s_low);
    seed_.ln_scale_high = std::log(s_high);
    seed_.shift_high = 0.5 * d_.ln_qref2 - std::log(s_high);
}

double CoreModel::implicit_residual(double q_i, double v_g, double v_ch) const
{
    return overdrive(v_g, v_ch) - (q_i + d_.Q_B) / d_.C_ox -
           d_.V_t * (std::log(q_i) + std::log(q_i + d_.Q_c) - d_.ln_qref2);
}

double CoreModel::implicit_slope(double q_i) const
{
    return -(1.0 / d_.C_ox + d_.V_t / q_i + d_.V_t / (q_i + d_.Q_c));
}

double CoreModel::surface_potential(double q_i, double v_g) const
{
    return v_g - params_.V_fb - (q_i + d_.Q_B) / d_.C_ox;
}

double CoreModel::solve_reference_overdrive(double a) const
{
    const double vt = d_.V_t, cox = d_.C_ox, qb = d_.Q_B, qc = d_.Q_c, lq = d_.ln_qref2;
    // Residual in u = ln Q; strictly decreasing in u.
    auto g = [&](double u) {
        const double q = std::exp(u);
        return a - (q + qb) / cox - vt * (u + std::log(q + qc) - lq);
    };

    constexpr double u_floor = -700.0;
    constexpr double u_ceiling = 20.0;
    double lo = u_floor;
    if (g(lo) <= 0.0)
        throw ConvergenceError("reference charge solver: root below representable range");
    double hi = lo;
    while (g(hi) > 0.0) {
        lo = hi;
        hi += 4.0;
        if (hi > u_ceiling) throw ConvergenceError("reference charge solver: no sign change on ln Q grid");
    }
    for (int i = 0; i < 60 && hi - lo > 1e-3; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }

    // Newton on Q itself, kept inside the bracket.
    const double q_lo = std::exp(lo), q_hi = std::exp(hi);
    double q = 0.5 * (q_lo + q_hi);
    for (int it = 0; it < 100; ++it) {
        const double f = a - (q + qb) / cox - vt * (std::log(q) + std::log(q + qc) - lq);
        const double fp = -(1.0 / cox + vt / q + vt / (q + qc));
        double next = q - f / fp;
        if (!(next > q_lo && next < q_hi)) next = std::clamp(next, q_lo, q_hi);
        const double step = std::abs(next - q);
        if (std::abs(f) < 1e-12 && step <= 1e-13 * q) return q;
        q = next;
    }
    throw ConvergenceError("reference charge solver: Newton refinement did not converge");
}

double CoreModel::solve_householder_overdrive(double a) const
{
    const double vt = d_.V_t, cox = d_.C_ox, qb = d_.Q_B, qc = d_.Q_c, lq = d_.ln_qref2;
    const double x = a - qb / cox;

    // Q << Q_c:  x = Q/C_ox + V_t ln(Q Q_c / Q_ref^2)
    const double u_low = seed_.ln_scale_low + log_lambert_w(x / vt + seed_.shift_low);
    // Q >> Q_c:  x = Q/C_ox + 2 V_t ln(Q / Q_ref)
    const double u_high = seed_.ln_scale_high + log_lambert_w(x / (2.0 * vt) + seed_.shift_high);

    // Both are upper bounds of the true root; blend with a smooth minimum.
    constexpr double width = std::numbers::ln2;
    double u = std::min(u_low, u_high) - width * std::log1p(std::exp(-std::abs(u_low - u_high) / width));

    for (int step = 0; step < 2; ++step) {
        const double q = std::exp(u);
        const double r = q / (q + qc);
        const double g = a - (q + qb) / cox - vt * (u + std::log(q + qc) - lq);
        const double g1 = -q / cox - vt - vt * r;
        const double g2 = -q / cox - vt * r * (1.0 - r);
        const double h = g / g1;
        u -= h / (1.0 - 0.5 * h * g2 / g1);
    }
    return std::exp(u);
}

double CoreModel::solve_overdrive(double a, Solver s) const
{
    return s == Solver::reference ? solve_reference_overdrive(a) : solve_householder_overdrive(a);
}

double CoreModel::solve_charge_reference(double v_g, double v_ch) const
{
    return solve_reference_overdrive(overdrive(v_g, v_ch));
}

double CoreModel::solve_charge_householder(double v_g, double v_ch) const
{
    return solve_householder_overdrive(overdrive(v_g, v_ch));
}

double CoreModel::solve_charge(double v_g, double v_ch, Solver s) const
{
    return s == Solver::reference ? solve_charge_reference(v_g, v_ch) : solve_charge_householder(v_g, v_ch);
}

ChargeSolution CoreModel::solve_ends(double v_g, double v_ds, Solver s) const
{
    ChargeSolution c;
    c.Q_is = solve_charge(v_g, 0.0, s);
    c.Q_id = solve_charge(v_g, v_ds, s);
    c.psi_ss = surface_potential(c.Q_is, v_g);
    c.psi_sd = surface_potential(c.Q_id, v_g);
    c.residual = std::max(std::abs(implicit_residual(c.Q_is, v_g, 0.0)),
                          std::abs(implicit_residual(c.Q_id, v_g, v_ds)));
    return c;
}

double CoreModel::current_bracket(double q) const
{
    return q * q / (2.0 * d_.C_ox) + 2.0 * d_.V_t * q - d_.V_t * d_.Q_c * std::log(q + d_.Q_c);
}

double CoreModel::bracket_difference(double q_a, double q_b) const
{
    if (q_a == q_b) return 0.0;
    if (q_a < q_b) return -bracket_difference(q_b, q_a);
    const double dq = q_a - q_b;
    return dq * ((q_a + q_b) / (2.0 * d_.C_ox) + 2.0 * d_.V_t) -
           d_.V_t * d_.Q_c * std::log1p(dq / (q_b + d_.Q_c));
}

EffectFactors CoreModel::effect_wrappers(double q_s, double q_d, double v_ds) const
{
    EffectFactors e{params_.mu0, 1.0};
    if (params_.mobility_degradation) {
        const double e_eff = (d_.Q_B + 0.5 * (q_s + q_d)) / params_.eps_si;
        e.mu_eff = params_.mu0 / (1.0 + e_eff / params_.E_mob);
    }
    if (params_.velocity_saturation) {
        const double r = std::sqrt(v_ds * v_ds + kVsatSmoothing * kVsatSmoothing);
        e.vsat_div = 1.0 + e.mu_eff * (r - kVsatSmoothing) / (params_.v_sat * params_.L);
    }
    return e;
}

double CoreModel::drain_current(double v_g, double v_ds, Solver s) const
{
    return evaluate(v_g, v_ds, 0.0, s).I;
}

TerminalCurrent CoreModel::evaluate(double v_g, double v_d, double v_s, Solver s) const
{
    const double q_s = solve_overdrive((v_g - v_s) - params_.V_fb, s);
    const double q_d = solve_overdrive((v_g - v_d) - params_.V_fb, s);
    return current_from_ends(q_s, q_d, v_d - v_s);
}

DeviceEvaluation CoreModel::evaluate_full(double v_g, double v_d, double v_s, Solver s) const
{
    const double q_s = solve_overdrive((v_g - v_s) - params_.V_fb, s);
    const double q_d = solve_overdrive((v_g - v_d) - params_.V_fb, s);
    return {current_from_ends(q_s, q_d, v_d - v_s), partition(q_s, q_d)};
}

TerminalCurrent CoreModel::current_from_ends(double q_s, double q_d, double v_ds) const
{
    const double w_over_l = params_.W / params_.L;
    const double delta = bracket_difference(q_s, q_d);
    const auto eff = effect_wrappers(q_s, q_d, v_ds);

    TerminalCurrent out;
    out.I = eff.mu_eff * w_over_l * delta / eff.vsat_div;

    // dQ/dA = -1/F'(Q); dB/dA = Q.
    const double dqs = -1.0 / implicit_slope(q_s);
    const double dqd = -1.0 / implicit_slope(q_d);

    double dmu_das = 0.0, dmu_dad = 0.0;
    if (params_.mobility_degradation) {
        const double f = 1.0 + (d_.Q_B + 0.5 * (q_s + q_d)) / params_.eps_si / params_.E_mob;
        const double dmu_de = -params_.mu0 / (f * f * params_.E_mob);
        dmu_das = dmu_de * 0.5 * dqs / params_.eps_si;
        dmu_dad = dmu_de * 0.5 * dqd / params_.eps_si;
    }
    double ddiv_dmu = 0.0, ddiv_dvds = 0.0;
    if (params_.velocity_saturation) {
        const double r = std::sqrt(v_ds * v_ds + kVsatSmoothing * kVsatSmoothing);
        ddiv_dmu = (r - kVsatSmoothing) / (params_.v_sat * params_.L);
        ddiv_dvds = eff.mu_eff * (v_ds / r) / (params_.v_sat * params_.L);
    }

    const double div = eff.vsat_div;
    const double mu = eff.mu_eff;
    const double di_das =
        w_over_l * ((dmu_das * delta + mu * q_s) / div - mu * delta / (div * div) * ddiv_dmu * dmu_das);
    const double di_dad =
        w_over_l * ((dmu_dad * delta - mu * q_d) / div - mu * delta / (div * div) * ddiv_dmu * dmu_dad);
    const double di_dvds = -w_over_l * mu * delta / (div * div) * ddiv_dvds;

    out.dI_dVg = di_das + di_dad;
    out.dI_dVd = -di_dad + di_dvds;
    out.dI_dVs = -di_das - di_dvds;
    return out;
}

TerminalCharges CoreModel::terminal_charges(double v_g, double v_ds, Solver s) const
{
    const double q_source = solve_charge(v_g, 0.0, s);
    const double q_drain = solve_charge(v_g, v_ds, s);
    return partition(q_source, q_drain);
}

TerminalCharges CoreModel::partition(double q_s, double q_d) const
{
    if (q_s < q_d) {
        auto swapped = partition(q_d, q_s);
        std::swap(swapped.Q_s, swapped.Q_d);
        return swapped;
    }

    const double vt = d_.V_t, cox = d_.C_ox, qc = d_.Q_c;
    auto b1 = [&](double q) { return q / cox + vt + vt * q / (q + qc); };
    auto b2 = [&](double q) { return 1.0 / cox + vt * qc / ((q + qc) * (q + qc)); };

    double avg = 0, s_share = 0, d_share = 0;
    const double dq = q_s - q_d;
    if (dq < kSymmetricLimit * (q_s + q_d)) {
        const double m = 0.5 * (q_s + q_d);
        const double curv = b2(m) * dq * dq / b1(m);
        avg = m + curv / 12.0;
        s_share = 0.5 * m + dq / 12.0 + curv / 24.0;
        d_share = 0.5 * m - dq / 12.0 + curv / 24.0;
    } else {
        const double db = bracket_difference(q_s, q_d);
        // Integrals run over Q in [q_d, q_s]; off = q_s - Q is formed directly so
        // that nearly equal ends do not lose digits.
        double inv = 0, num_d = 0;
        if (q_s < kSubthresholdSplit * qc) {
            // The log singularity at Q = -Q_c is far away relative to the interval.
            const double h = 0.5 * dq;
            for (int k = 0; k < 6; ++k) {
                const double off = h * (1.0 - kGl6x[k]);
                const double q = q_s - off;
                const double f = kGl6w[k] * h * q * b1(q);
                inv += f;
                num_d += f * (off * ((q_s + q) / (2.0 * cox) + 2.0 * vt) - vt * qc * std::log1p(off / (q + qc)));
            }
        } else {
            // Q B'(Q) = p(Q) + V_t Q_c^2/u and B(q_s) - B(Q) = b(Q) - V_t Q_c ln(u_s/u), u = Q + Q_c.
            // Polynomial products go through exact Gauss rules, the rest is closed form.
            const double us = q_s + qc, ud = q_d + qc;
            const double big_l = std::log1p(dq / ud);
            auto p = [&](double q) { return q * q / cox + 2.0 * vt * q - vt * qc; };

            const double h = 0.5 * dq;
            const double r3 = std::sqrt(0.6);
            double pb = 0;
            for (auto [x, w] : {std::pair{-r3, 5.0 / 9.0}, std::pair{0.0, 8.0 / 9.0}, std::pair{r3, 5.0 / 9.0}}) {
                const double off = h * (1.0 - x);
                const double q = q_s - off;
                pb += w * h * p(q) * off * ((q_s + q) / (2.0 * cox) + 2.0 * vt);
            }
            const double r2 = 1.0 / std::sqrt(3.0);
            const double p_int = h * (p(q_s - h * (1.0 + r2)) + p(q_s - h * (1.0 - r2)));

            const double beta = 1.0 / (2.0 * cox);
            const double alpha = 2.0 * vt + q_s * beta - beta * qc;
            const double b_over_u = alpha * us * log_tail(dq / us) + beta * dq * dq / 2.0;

            // p(Q) = P2 u^2 + P1 u + P0, and the moments of ln(u_s/u).
            const double p2 = 1.0 / cox, p1 = 2.0 * vt - 2.0 * qc / cox, p0 = qc * qc / cox - 3.0 * vt * qc;
            const double l2 = big_l * big_l;
            const double k0 = us * l2 * phi(-big_l);
            const double k1 = us * us * l2 * phi(-2.0 * big_l);
            const double k2 = us * us * us * l2 * phi(-3.0 * big_l);

            const double a = vt * qc;
            num_d = pb + a * qc * b_over_u - a * (p2 * k2 + p1 * k1 + p0 * k0) - a * a * qc * l2 / 2.0;
            inv = p_int + a * qc * big_l;
        }
        avg = inv / db;
        d_share = num_d / (db * db);
        s_share = avg - d_share;
    }

    const double area = params_.W * params_.L;
    TerminalCharges c;
    c.Q_g = area * (avg + d_.Q_B);
    c.Q_s = -area * s_share;
    c.Q_d = -area * d_share;
    c.Q_bulk = -area * d_.Q_B;
    return c;
}

} // namespace nvmflow::spcore
