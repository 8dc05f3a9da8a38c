#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "nvmflow/spcore/core_model.hpp"

using namespace nvmflow::spcore;

namespace {

double max_householder_error(const CoreModel& m, const std::vector<double>& v_chs)
{
    double worst = 0;
    for (int i = 0; i <= 200; ++i) {
        const double v_g = -0.5 + 0.01 * i;
        for (double v_ch : v_chs) {
            const double ref = m.solve_charge_reference(v_g, v_ch);
            const double hh = m.solve_charge_householder(v_g, v_ch);
            worst = std::max(worst, std::abs(hh / ref - 1.0));
        }
    }
    return worst;
}

} // namespace

TEST(ModelParams, DerivedConstants)
{
    ModelParams p;
    auto d = derive(p);
    EXPECT_EQ(d.Q_B, nvmflow::physics::q * p.N_A * p.T_si / 2.0);
    EXPECT_NEAR(d.V_t, 0.025852, 1e-6);
    EXPECT_NEAR(d.C_ox, 3.9 * 8.8541878128e-12 / 1e-9, 1e-15);
    EXPECT_NEAR(d.phi_B, d.V_t * std::log(p.N_A / p.n_i), 1e-15);
}

TEST(ModelParams, RejectsInvalid)
{
    ModelParams p;
    p.T_si = 0;
    EXPECT_THROW(CoreModel{p}, std::invalid_argument);
    p = {};
    p.N_A = 1e15; // below n_i
    EXPECT_THROW(CoreModel{p}, std::invalid_argument);
    EXPECT_THROW(p.set("nonsense", 1.0), std::invalid_argument);
}

TEST(ModelParams, TextRoundTrip)
{
    ModelParams p;
    p.N_A = 3.3e22;
    p.mobility_degradation = true;
    p.E_mob = 7.5e7;
    EXPECT_EQ(parse_params(to_text(p)), p);

    auto q = parse_params("# comment\nL = 20n\nvfb=-0.45  # trailing\n");
    EXPECT_DOUBLE_EQ(q.L, 20e-9);
    EXPECT_DOUBLE_EQ(q.V_fb, -0.45);
    EXPECT_THROW(parse_params("L 20n\n"), std::invalid_argument);
}

TEST(ReferenceSolver, MonotoneInGateVoltage)
{
    CoreModel m;
    EXPECT_GT(m.solve_charge_reference(0.8, 0.0), m.solve_charge_reference(0.4, 0.0));
}

TEST(ReferenceSolver, DeepSubthresholdAsymptote)
{
    CoreModel m;
    const auto& d = m.derived();
    const double v_g = m.params().V_fb + d.Q_B / d.C_ox - 0.5;
    const double expected = std::exp(d.ln_qref2) / d.Q_c * std::exp(-0.5 / d.V_t);
    EXPECT_NEAR(m.solve_charge_reference(v_g, 0.0) / expected, 1.0, 0.01);
}

TEST(ReferenceSolver, ResidualBelowTolerance)
{
    CoreModel m;
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> vg(-0.5, 1.5), vch(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double g = vg(rng), c = vch(rng);
        const double q = m.solve_charge_reference(g, c);
        ASSERT_GT(q, 0.0);
        ASSERT_LT(std::abs(m.implicit_residual(q, g, c)), 1e-12) << "V_g=" << g << " V_ch=" << c;
    }
}

TEST(ReferenceSolver, ImplicitFunctionStrictlyDecreasing)
{
    CoreModel m;
    for (double lq = -60; lq < 0; lq += 0.5) EXPECT_LT(m.implicit_slope(std::exp(lq)), 0.0);
}

TEST(ReferenceSolver, ReportsNonConvergence)
{
    // An absurd flat-band voltage pushes the root below the representable range.
    ModelParams p;
    p.V_fb = 100.0;
    CoreModel m(p);
    EXPECT_THROW(m.solve_charge_reference(0.0, 0.0), ConvergenceError);
}

TEST(HouseholderSolver, AgreesWithReferenceOnDefaultSweep)
{
    CoreModel m;
    EXPECT_LT(max_householder_error(m, {0.0, 0.05, 0.5, 1.0}), 1e-6);
}

TEST(HouseholderSolver, AgreesAtValidityBoxCorners)
{
    for (double na : {1e21, 1e24})
        for (double tsi : {5e-9, 20e-9})
            for (double eot : {0.8e-9, 2e-9}) {
                ModelParams p;
                p.N_A = na;
                p.T_si = tsi;
                p.EOT = eot;
                EXPECT_LT(max_householder_error(CoreModel(p), {0.0, 1.0}), 1e-6)
                    << "N_A=" << na << " T_si=" << tsi << " EOT=" << eot;
            }
}

TEST(HouseholderSolver, Deterministic)
{
    CoreModel m;
    const double a = m.solve_charge_householder(0.731, 0.212);
    const double b = m.solve_charge_householder(0.731, 0.212);
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
}

TEST(ChargeSolution, SurfacePotentialConsistency)
{
    CoreModel m;
    auto s = m.solve_ends(0.9, 0.4, Solver::reference);
    const auto& d = m.derived();
    EXPECT_EQ(s.psi_ss, 0.9 - m.params().V_fb - (s.Q_is + d.Q_B) / d.C_ox);
    EXPECT_EQ(s.psi_sd, 0.9 - m.params().V_fb - (s.Q_id + d.Q_B) / d.C_ox);
    EXPECT_GT(s.Q_is, s.Q_id);
    EXPECT_LT(s.residual, 1e-12);
}
