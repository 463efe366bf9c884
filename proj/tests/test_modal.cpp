#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlwave/modal.hpp"

#include <cmath>

using namespace nlwave;

namespace {
Eigen::VectorXd lattice(double T, int n)
{
    Eigen::VectorXd t(n);
    for (int i = 0; i < n; ++i)
        t(i) = T * i / (n - 1.0);
    return t;
}
} // namespace

TEST_CASE("classify: regimes, roots and the threshold index")
{
    Eigen::VectorXd lams(3);
    lams << 1.0, 4.0, 8.0;

    auto sp0 = classify(0.0, lams);
    CHECK(sp0.n0 == 3);
    for (int n = 0; n < 3; ++n) {
        auto& o = std::get<Oscillatory>(sp0.regimes[n]);
        CHECK(o.alpha == 0.0);
        CHECK(o.beta == doctest::Approx(std::sqrt(lams(n))).epsilon(1e-15));
    }

    auto sp1 = classify(1.0, lams);
    CHECK(sp1.n0 == 1); // delta^2 lambda < 4 only for lambda = 1
    CHECK(std::holds_alternative<Oscillatory>(sp1.regimes[0]));
    CHECK(std::holds_alternative<Critical>(sp1.regimes[1]));
    CHECK(std::get<Critical>(sp1.regimes[1]).root == doctest::Approx(-2.0).epsilon(1e-14));
    auto& ov = std::get<Overdamped>(sp1.regimes[2]);
    // hand evaluation of the root formula: D = 64 - 32 = 32
    CHECK(ov.lambda_plus == doctest::Approx(-1.1715728752538099).epsilon(1e-14));
    CHECK(ov.lambda_minus == doctest::Approx(-6.8284271247461901).epsilon(1e-14));
    CHECK(ov.lambda_plus * ov.lambda_minus == doctest::Approx(8.0).epsilon(1e-13));

    CHECK_THROWS_AS(classify(-0.5, lams), validation_error);
    Eigen::VectorXd bad(2);
    bad << 4.0, 1.0;
    CHECK_THROWS_AS(classify(0.0, bad), validation_error);
}

TEST_CASE("overdamped roots accumulate as lambda grows")
{
    Eigen::VectorXd lams(40);
    for (int i = 0; i < 40; ++i)
        lams(i) = 4.0 * (i + 1.0);
    double delta = 1.0;
    auto sp = classify(delta, lams);
    auto& first = std::get<Overdamped>(sp.regimes[1]);
    auto& last = std::get<Overdamped>(sp.regimes[39]);
    CHECK(last.lambda_minus < first.lambda_minus); // lambda_minus -> -infinity
    // lambda_plus differences shrink towards the accumulation point
    double gap_early = std::abs(std::get<Overdamped>(sp.regimes[2]).lambda_plus -
                                std::get<Overdamped>(sp.regimes[1]).lambda_plus);
    double gap_late = std::abs(last.lambda_plus - std::get<Overdamped>(sp.regimes[38]).lambda_plus);
    CHECK(gap_late < 0.05 * gap_early);
    CHECK(std::abs(last.lambda_plus + 1.0 / delta) < 0.01);
}

TEST_CASE("coefficient functions: initial values in every regime")
{
    std::vector<ModeRegime> regimes = {
        Oscillatory{0.0, 2.0},
        Oscillatory{-0.7, 1.3},
        Overdamped{-1.1715728752538099, -6.8284271247461901},
        Critical{-2.0},
    };
    for (const auto& r : regimes) {
        CHECK(coeff_A(r, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(coeff_dA(r, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(coeff_B(r, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(coeff_dB(r, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(coeff_C(r, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(coeff_D(r, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(coeff_dD(r, 0.0) == doctest::Approx(-1.0).epsilon(1e-15));
    }
}

TEST_CASE("coefficient values frozen from the high-precision oracle")
{
    // delta = 0, lambda = 4: B(pi/4) = sin(pi/2)/2
    Oscillatory und{0.0, 2.0};
    CHECK(coeff_B(und, M_PI / 4.0) == doctest::Approx(0.5).epsilon(1e-14));

    // delta = 1, lambda = 8: 40-digit evaluation of the overdamped branch
    Overdamped ov{-1.1715728752538099, -6.8284271247461901};
    CHECK(coeff_B(ov, 1.0) == doctest::Approx(0.05458804193412943).epsilon(1e-13));
    // independent long-double path without the expm1 rearrangement
    long double lp = ov.lambda_plus, lm = ov.lambda_minus;
    long double direct = (std::exp(lm * 1.0L) - std::exp(lp * 1.0L)) / (lm - lp);
    CHECK(coeff_B(ov, 1.0) == doctest::Approx((double)direct).epsilon(1e-14));
}

TEST_CASE("ode residuals stay below 1e-10 in all regimes")
{
    Eigen::VectorXd t = lattice(3.0, 200);
    CHECK(ode_residual(Oscillatory{0.0, 1.0}, CoeffKind::B, t) <= 1e-12);
    std::vector<ModeRegime> regimes = {
        Oscillatory{0.0, 1.0},
        Oscillatory{-0.45, 0.9},
        Overdamped{-1.1715728752538099, -6.8284271247461901},
        Overdamped{-0.5012562854249503, -199.49874371457505}, // delta=2, lambda=100
        Critical{-2.0},
        Critical{-40.0},
    };
    for (const auto& r : regimes) {
        CHECK(ode_residual(r, CoeffKind::A, t) <= 1e-10);
        CHECK(ode_residual(r, CoeffKind::B, t) <= 1e-10);
    }
}

TEST_CASE("undamped per-mode energy: lambda B^2 + (B')^2 == 1")
{
    for (double lam : {0.5, 1.0, 7.3, 144.0}) {
        Oscillatory r{0.0, std::sqrt(lam)};
        for (int j = 0; j <= 100; ++j) {
            double t = 5.0 * j / 100.0;
            double b = coeff_B(r, t), db = coeff_dB(r, t);
            CHECK(std::abs(lam * b * b + db * db - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("overdamped envelope: both exponentials decay")
{
    Overdamped r{-0.6, -45.0};
    double tfloor = 1.0 / 45.0;
    for (double t : {tfloor, 0.3, 1.0, 2.0}) {
        double dt = 1.0 / std::abs(r.lambda_minus);
        double envA = std::exp(r.lambda_plus * dt);
        CHECK(std::abs(coeff_A(r, t + dt)) <= 2.0 * envA * std::max(std::abs(coeff_A(r, t)), 1e-30) + 1e-30);
        CHECK(std::abs(coeff_B(r, t + dt)) <= 2.0 * envA * std::max(std::abs(coeff_B(r, t)), 1e-30) + 1e-30);
    }
}

TEST_CASE("critical branch is the confluent limit of both neighbors")
{
    const double lam = 4.0;
    Critical crit{-std::sqrt(lam)};
    // |D| = 1e-6 lambda^2 on either side of the double root
    double dover = std::sqrt((4.0 * lam + 1e-6 * lam * lam) / (lam * lam));
    double dosc = std::sqrt((4.0 * lam - 1e-6 * lam * lam) / (lam * lam));
    {
        double D = dover * dover * lam * lam - 4.0 * lam;
        double sq = std::sqrt(D);
        Overdamped ov{(-dover * lam + sq) / 2.0, (-dover * lam - sq) / 2.0};
        Oscillatory os{-dosc * lam / 2.0, std::sqrt(4.0 * lam - dosc * dosc * lam * lam) / 2.0};
        for (double t : {0.1, 0.5, 1.0, 2.0}) {
            double scaleA = std::max(std::abs(coeff_A(crit, t)), 1e-12);
            double scaleB = std::max(std::abs(coeff_B(crit, t)), 1e-12);
            CHECK(std::abs(coeff_A(ov, t) - coeff_A(crit, t)) / scaleA <= 1e-4);
            CHECK(std::abs(coeff_A(os, t) - coeff_A(crit, t)) / scaleA <= 1e-4);
            CHECK(std::abs(coeff_B(ov, t) - coeff_B(crit, t)) / scaleB <= 1e-4);
            CHECK(std::abs(coeff_B(os, t) - coeff_B(crit, t)) / scaleB <= 1e-4);
        }
    }
}

TEST_CASE("bound audit: exact delta = 0 bound and the damped case bound")
{
    Eigen::VectorXd lams(24);
    for (int i = 0; i < 24; ++i)
        lams(i) = 1.1 * (i + 1.0) + 0.3 * i * i;

    auto sp0 = classify(0.0, lams);
    auto rep0 = bound_audit(sp0, lams, 3.0, 150);
    CHECK(rep0.family("sqrtlamB").global_max <= 1.0 + 1e-12);
    CHECK(rep0.family("C").global_max <= 1.0 + 1e-12);
    // the literal |lambda B| family genuinely grows like sqrt(lambda) here
    CHECK(rep0.family("lamB").global_max > 2.0);
    CHECK_FALSE(rep0.family("lamB").bounded_claim);

    double delta = 3.0; // delta^2 lambda_1 > 4: fully overdamped
    auto spd = classify(delta, lams);
    CHECK(spd.n0 == 0);
    auto repd = bound_audit(spd, lams, 3.0, 150);
    CHECK(repd.family("lamB").global_max <= repd.lamB_case_bound * (1.0 + 1e-9));
    // nonincreasing per-mode maxima for the monotone-bounded members
    for (const char* fam : {"C", "sqrtlamB", "dD", "invsqrtlam_dC"})
        CHECK(repd.family(fam).trend_slope <= 1e-12);
    // |lambda B| and |C'| saturate from below towards 1/delta: bounded by
    // the case cap with shrinking increments, not slope-nonpositive
    for (const char* fam : {"lamB", "dC"}) {
        const auto& pm = repd.family(fam).per_mode_max;
        CHECK(repd.family(fam).global_max <= repd.lamB_case_bound * (1.0 + 1e-9));
        int last = static_cast<int>(pm.size()) - 1;
        CHECK(std::abs(pm(last) - pm(last - 1)) < std::abs(pm(1) - pm(0)));
    }
    // the two unbounded literal members do grow
    CHECK(repd.family("sqrtlamC").trend_slope > 0.0);
    CHECK(repd.family("sqrtlamdD").trend_slope > 0.0);
}
