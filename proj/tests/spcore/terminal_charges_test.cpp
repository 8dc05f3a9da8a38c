#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nvmflow/spcore/core_model.hpp"
#include "oracles.hpp"

using namespace nvmflow::spcore;

TEST(TerminalCharges, SymmetricAtZeroDrainBias)
{
    CoreModel m;
    const auto& p = m.params();
    for (double vg : {0.0, 0.5, 1.2}) {
        const double q = m.solve_charge_householder(vg, 0.0);
        auto c = m.terminal_charges(vg, 0.0);
        EXPECT_EQ(c.Q_s, c.Q_d);
        EXPECT_DOUBLE_EQ(c.Q_s, -p.W * p.L * q / 2);
    }
}

TEST(TerminalCharges, ChargeNeutrality)
{
    CoreModel m;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> vg(-0.5, 1.5), vds(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        auto c = m.terminal_charges(vg(rng), vds(rng));
        const double sum = c.Q_g + c.Q_s + c.Q_d + c.Q_bulk;
        ASSERT_LT(std::abs(sum) / std::abs(c.Q_g), 1e-12);
    }
}

TEST(TerminalCharges, MatchesFineGridChannelIntegration)
{
    CoreModel m;
    const auto& p = m.params();
    const double area = p.W * p.L;
    struct Bias {
        double vg, vds;
    };
    for (Bias b : {Bias{1.0, 0.2}, Bias{1.2, 1.0}, Bias{0.4, 0.3}, Bias{0.0, 0.1}, Bias{0.7, 0.05}}) {
        auto q = [&](double vch) { return m.solve_charge_reference(b.vg, vch); };
        auto ref = oracle::channel_trapezoid(q, b.vds, 10000);
        auto c = m.terminal_charges(b.vg, b.vds, Solver::reference);
        EXPECT_NEAR(-c.Q_d / (area * ref.drain), 1.0, 1e-6) << b.vg << " " << b.vds;
        EXPECT_NEAR(-c.Q_s / (area * ref.source), 1.0, 1e-6) << b.vg << " " << b.vds;
        EXPECT_NEAR((c.Q_g + c.Q_bulk) / (area * ref.inv), 1.0, 1e-6) << b.vg << " " << b.vds;
    }
}

TEST(TerminalCharges, DrainGetsLessInSaturation)
{
    CoreModel m;
    auto c = m.terminal_charges(1.0, 1.0);
    EXPECT_GT(std::abs(c.Q_s), std::abs(c.Q_d));
}

TEST(TerminalCharges, ReverseBiasSwapsRoles)
{
    CoreModel m;
    auto fwd = m.terminal_charges(0.9, 0.4);
    // Same device seen from the other end: gate-to-(new)source is 0.5 V, V_ds = -0.4 V.
    auto rev = m.terminal_charges(0.5, -0.4);
    EXPECT_NEAR(fwd.Q_s / rev.Q_d, 1.0, 1e-12);
    EXPECT_NEAR(fwd.Q_d / rev.Q_s, 1.0, 1e-12);
}

TEST(TerminalCharges, SeriesSwitchIsContinuous)
{
    CoreModel m;
    for (double qs : {1e-12, 1e-6, 2e-3, 0.04}) {
        // The series branch is taken while (qs - qd) < 1e-6 (qs + qd).
        const double edge = 2e-6 / (1 + 1e-6);
        const double below = qs * (1 - edge * (1 - 1e-5)); // series side
        const double above = qs * (1 - edge * (1 + 1e-5)); // quadrature side
        auto a = m.partition(qs, below);
        auto b = m.partition(qs, above);
        EXPECT_NEAR(a.Q_d / b.Q_d, 1.0, 1e-9) << qs;
        EXPECT_NEAR(a.Q_s / b.Q_s, 1.0, 1e-9) << qs;
        EXPECT_NEAR(a.Q_g / b.Q_g, 1.0, 1e-9) << qs;
    }
}
