#pragma once

// Independent numerical oracles shared by unit and acceptance tests. None of
// this code calls into the closed-form paths it is used to check.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

namespace detail {
inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

/// Adaptive Simpson quadrature with Richardson correction.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol,
                               int max_depth = 40)
{
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

/// Central finite-difference derivatives of order 1..3 at x with step h.
struct Derivatives {
    double d1, d2, d3;
};

inline Derivatives central_differences(const std::function<double(double)>& f, double x, double h)
{
    const double fm2 = f(x - 2 * h), fm1 = f(x - h), f0 = f(x), fp1 = f(x + h), fp2 = f(x + 2 * h);
    return {(fp1 - fm1) / (2 * h), (fp1 - 2 * f0 + fm1) / (h * h), (fp2 - 2 * fp1 + 2 * fm1 - fm2) / (2 * h * h * h)};
}

/// Ward-Dutton charges by brute-force trapezoidal integration along the channel.
/// q_of_vch returns the inversion charge density at a channel potential. The
/// position is reconstructed from current continuity: dy ∝ Q dV_ch.
struct ChannelCharges {
    double inv;     // ∫ Q dy / L
    double drain;   // ∫ (y/L) Q dy / L
    double source;  // ∫ (1 - y/L) Q dy / L
};

inline ChannelCharges channel_trapezoid(const std::function<double(double)>& q_of_vch, double v_ds, int points)
{
    std::vector<double> q(points), y(points, 0.0);
    const double h = v_ds / (points - 1);
    for (int k = 0; k < points; ++k) q[k] = q_of_vch(h * k);
    for (int k = 1; k < points; ++k) y[k] = y[k - 1] + 0.5 * h * (q[k] + q[k - 1]);
    const double total = y.back();
    for (auto& v : y) v /= total;
    ChannelCharges c{0, 0, 0};
    for (int k = 1; k < points; ++k) {
        const double dy = y[k] - y[k - 1];
        c.inv += 0.5 * dy * (q[k] + q[k - 1]);
        c.drain += 0.5 * dy * (y[k] * q[k] + y[k - 1] * q[k - 1]);
        c.source += 0.5 * dy * ((1 - y[k]) * q[k] + (1 - y[k - 1]) * q[k - 1]);
    }
    return c;
}

} // namespace oracle
