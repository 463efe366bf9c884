#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlwave/control.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <random>

using namespace nlwave;

namespace {

struct Lab {
    Grid1D grid;
    StiffnessSystem sys;
    SpectralBasis basis;

    Lab(int n, double s, int m)
    {
        grid.a = -1.0;
        grid.b = 1.0;
        grid.n_interior = n;
        grid.n_exterior = 4 * n; // fine enough halo for site-rich ansatz windows
        grid.exterior_halo = 8.0;
        sys = assemble(grid, s);
        basis = eigenpairs(sys, m);
    }
};

} // namespace

TEST_CASE("ansatz construction and validation")
{
    Lab lab(48, 0.5, 6);
    CHECK_THROWS_AS(make_ansatz(lab.grid, 0.2, 0.7, 4, 2, 2.0), validation_error);
    CHECK_THROWS_AS(make_ansatz(lab.grid, 1.5, 1.2, 4, 2, 2.0), validation_error);
    auto a = make_ansatz(lab.grid, 1.25, 1.75, 6, 3, 2.0);
    CHECK(a.sites.size() == 6);
    CHECK(a.profiles.size() == 3);
    CHECK(a.n_columns() == 18);
    for (int d : a.sites) {
        double x = lab.grid.datum_node(d);
        CHECK(x > 1.25);
        CHECK(x < 1.75);
    }
    for (const auto& q : a.profiles) {
        CHECK(q.t0 > 0.0);
        CHECK(q.t1 < 2.0);
    }
}

TEST_CASE("duality identity: trivial cases and random conforming data")
{
    Lab lab(96, 0.5, 16);
    const double T = 2.0;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(16);

    for (double delta : {0.0, 1.0}) {
        auto sp = classify(delta, lab.basis.lambdas);
        ExteriorControl gz;
        gz.T = T;
        TimeProfile q;
        q.t0 = 0.3;
        q.t1 = 1.2;
        q.amplitude = 0.0;
        gz.terms.push_back({ExteriorProfile::site(lab.grid, lab.grid.datum_index_b() + 2), q});

        // g = 0 and zero initial data: both sides vanish
        CHECK(duality_residual(z, z, gz, Eigen::VectorXd::Random(16), Eigen::VectorXd::Random(16),
                               lab.basis, lab.sys, sp) <= 1e-14);
        // psi = 0: both sides vanish
        ExteriorControl g = gz;
        g.terms[0].temporal.amplitude = 1.3;
        CHECK(duality_residual(Eigen::VectorXd::Random(16), Eigen::VectorXd::Random(16), g, z, z,
                               lab.basis, lab.sys, sp) <= 1e-14);

        std::mt19937_64 rng(17);
        std::normal_distribution<double> N(0.0, 1.0);
        for (int trial = 0; trial < 3; ++trial) {
            Eigen::VectorXd u0(16), u1(16), p0(16), p1(16);
            for (int i = 0; i < 16; ++i) {
                u0(i) = N(rng);
                u1(i) = N(rng);
                p0(i) = N(rng);
                p1(i) = N(rng);
            }
            CHECK(duality_residual(u0, u1, g, p0, p1, lab.basis, lab.sys, sp) <= 1e-4);
        }
    }
}

TEST_CASE("reachability map columns equal the controlled solver at T")
{
    Lab lab(64, 0.5, 8);
    const double T = 2.0;
    auto sp = classify(0.3, lab.basis.lambdas);
    auto ansatz = make_ansatz(lab.grid, 1.25, 1.75, 3, 2, T);
    Eigen::MatrixXd R = reachability_map(ansatz, lab.basis, lab.sys, sp);
    REQUIRE(R.rows() == 16);
    REQUIRE(R.cols() == 6);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) {
            ExteriorControl el = ansatz.element(lab.grid, i, j);
            StatePair st = solve_controlled(el, lab.basis, lab.sys, sp, T);
            int col = i * 2 + j;
            for (int n = 0; n < 8; ++n) {
                CHECK(R(n, col) == doctest::Approx(st.u_coeffs(n)).epsilon(1e-9));
                CHECK(R(8 + n, col) ==
                      doctest::Approx(st.ut_coeffs(n) / std::sqrt(lab.basis.lambdas(n))).epsilon(1e-9));
            }
        }
}

TEST_CASE("duality transposition: forward map equals the dual-flux assembly")
{
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    Lab lab(64, 0.5, 12);
    const double T = 2.0;
    for (double delta : {0.0, 1.0}) {
        auto sp = classify(delta, lab.basis.lambdas);
        auto ansatz = make_ansatz(lab.grid, 1.25, 1.75, 2, 2, T);
        Eigen::MatrixXd R = reachability_map(ansatz, lab.basis, lab.sys, sp);
        ReachabilityTables tb = reachability_tables(ansatz, lab.basis, lab.sys, sp);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const TimeProfile& q = ansatz.profiles[j];
                int col = i * 2 + j;
                for (int n = 0; n < 12; ++n) {
                    const ModeRegime& r = sp.regimes[n];
                    double lam = lab.basis.lambdas(n);
                    auto gq = [&](double t) { return q.value(t) + delta * q.d1(t); };
                    double Y = GK::integrate(
                        [&](double t) { return gq(t) * coeff_B(r, T - t); }, q.t0, q.t1, 15, 1e-13);
                    double X = GK::integrate(
                        [&](double t) { return gq(t) * coeff_A(r, T - t); }, q.t0, q.t1, 15, 1e-13);
                    double u_dual = -tb.P(n, i) * Y;
                    double ut_dual = -delta * lam * u_dual - tb.P(n, i) * X;
                    double scale_u = std::max(std::abs(u_dual), 1e-14);
                    double scale_ut = std::max(std::abs(ut_dual), 1e-12);
                    CHECK(std::abs(R(n, col) - u_dual) / scale_u <= 1e-6);
                    CHECK(std::abs(R(12 + n, col) * std::sqrt(lam) - ut_dual) / scale_ut <= 1e-6);
                }
            }
    }
}

TEST_CASE("approximate control: exact targets, regularization, monotonicity")
{
    Lab lab(64, 0.5, 8);
    const double T = 3.0;
    auto sp = classify(0.1, lab.basis.lambdas);
    auto ansatz = make_ansatz(lab.grid, 1.25, 1.75, 8, 3, T);
    Eigen::MatrixXd R = reachability_map(ansatz, lab.basis, lab.sys, sp);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(8);

    auto res0 = approximate_control(z, z, ansatz, R, lab.basis, 1e-10);
    CHECK(res0.achieved_error <= 1e-14);
    CHECK(res0.coefficients.cwiseAbs().maxCoeff() <= 1e-14);

    // a reachable target: the image of a coefficient vector through a small
    // well-conditioned map (larger maps push the regularization floor up)
    {
        auto small = make_ansatz(lab.grid, 1.25, 1.75, 2, 2, T);
        Eigen::MatrixXd Rs = reachability_map(small, lab.basis, lab.sys, sp);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(Rs.cols());
        c(3) = 1.0;
        c(1) = -0.4;
        Eigen::VectorXd y = Rs * c;
        Eigen::VectorXd tu = y.head(8);
        Eigen::VectorXd tut(8);
        for (int n = 0; n < 8; ++n)
            tut(n) = y(8 + n) * std::sqrt(lab.basis.lambdas(n));
        auto res1 = approximate_control(tu, tut, small, Rs, lab.basis, 1e-12);
        CHECK(res1.achieved_error <= 1e-8);
    }

    // error nonincreasing in ansatz size, nondecreasing in eps
    Eigen::VectorXd target = Eigen::VectorXd::Zero(8);
    target(0) = 1.0;
    target(1) = 0.5;
    double prev = 1e300;
    for (int np : {2, 3, 4}) {
        auto a2 = make_ansatz(lab.grid, 1.25, 1.75, 8, np, T);
        Eigen::MatrixXd R2 = reachability_map(a2, lab.basis, lab.sys, sp);
        double best = 1e300;
        for (double eps : {1e-8, 1e-10, 1e-12})
            best = std::min(best,
                            approximate_control(target, z, a2, R2, lab.basis, eps).achieved_error);
        CHECK(best <= prev * (1.0 + 1e-9));
        prev = best;
    }
    double e_small = approximate_control(target, z, ansatz, R, lab.basis, 1e-12).achieved_error;
    double e_big = approximate_control(target, z, ansatz, R, lab.basis, 1e-4).achieved_error;
    CHECK(e_big >= e_small * (1.0 - 1e-12));
}

TEST_CASE("moment matrix: exponents, transform cross-check, Duhamel consistency")
{
    Lab lab(64, 0.5, 20);
    const double T = 2.0;
    auto ansatz = make_ansatz(lab.grid, 1.25, 1.75, 4, 3, T);

    // delta = 0: purely imaginary exponent pairs +- i sqrt(lambda)
    auto und = classify(0.0, lab.basis.lambdas);
    auto ms0 = moment_matrix(und, lab.basis, lab.sys, ansatz, 10);
    for (int n = 0; n < 10; ++n) {
        CHECK(ms0.exponents[2 * n].real() == 0.0);
        CHECK(ms0.exponents[2 * n].imag() ==
              doctest::Approx(std::sqrt(lab.basis.lambdas(n))).epsilon(1e-13));
        CHECK(ms0.exponents[2 * n + 1] == std::conj(ms0.exponents[2 * n]));
    }

    // delta = 1: the slow real exponents approach -1/delta monotonically
    auto spd = classify(1.0, lab.basis.lambdas);
    auto msd = moment_matrix(spd, lab.basis, lab.sys, ansatz, 20);
    std::vector<double> plus;
    for (std::size_t r = 0; r < msd.exponents.size(); r += 2)
        if (msd.exponents[r].imag() == 0.0 && !msd.confluent[r])
            plus.push_back(msd.exponents[r].real());
    REQUIRE(plus.size() >= 6);
    for (std::size_t i = 1; i + 1 < plus.size(); ++i) {
        CHECK(std::abs(plus[i + 1] + 1.0) < std::abs(plus[i] + 1.0)); // towards -1/delta
        CHECK(std::abs(plus[i + 1] - plus[i]) < std::abs(plus[i] - plus[i - 1]) * (1.0 + 1e-9));
    }

    // a single-term row reproduces F(i lambda_n^+) by direct quadrature
    ControlAnsatz single = ansatz;
    single.sites = {ansatz.sites[0]};
    single.profiles = {ansatz.profiles[0]};
    auto ms1 = moment_matrix(spd, lab.basis, lab.sys, single, 20);
    ReachabilityTables tb = reachability_tables(single, lab.basis, lab.sys, spd);
    for (int n : {4, 9, 19}) {
        if (std::holds_alternative<Overdamped>(spd.regimes[n])) {
            double mu = std::get<Overdamped>(spd.regimes[n]).lambda_plus;
            std::complex<double> F =
                moment_transform(single.profiles[0], tb.P(n, 0), 1.0, {0.0, mu});
            // rows are stored scaled by e^{mu t_ref}
            double row_true = ms1.observation_rows(2 * n, 0) * std::exp(-mu * ms1.t_ref);
            CHECK(row_true == doctest::Approx(F.real()).epsilon(1e-10));
        }
    }

    // Duhamel consistency for an overdamped mode: u_n(T) assembled from the
    // two moment rows equals the controlled solution
    ExteriorControl ctl = single.element(lab.grid, 0, 0);
    StatePair st = solve_controlled(ctl, lab.basis, lab.sys, spd, T);
    for (int n : {5, 12}) {
        auto& ov = std::get<Overdamped>(spd.regimes[n]);
        // undo the e^{mu t_ref} row scaling through the exponential factors
        double Mp = ms1.observation_rows(2 * n, 0) * std::exp(ov.lambda_plus * (T - ms1.t_ref));
        double Mm = ms1.observation_rows(2 * n + 1, 0) * std::exp(ov.lambda_minus * (T - ms1.t_ref));
        double uT = (Mp - Mm) / (ov.lambda_minus - ov.lambda_plus);
        CHECK(std::abs(st.u_coeffs(n) - uT) <=
              1e-8 * std::max(1.0, std::abs(st.u_coeffs(n))));
    }
}

TEST_CASE("sigma_min diagnostic: positivity and monotone decay")
{
    Lab lab(96, 0.75, 20);
    const double T = 24.0;
    auto ansatz = make_ansatz_two_sided(lab.grid, 1.02, 1.77, 20, 16, T);
    CHECK(ansatz.sites.size() == 20);

    auto run = [&](double delta) {
        auto sp = classify(delta, lab.basis.lambdas);
        return spectral_control_diagnostic(sp, lab.basis, lab.sys, ansatz, 20);
    };
    auto s1 = run(1.0);
    auto s0 = run(0.0);
    CHECK(s1.sigma_min[0] > 0.0);
    CHECK(s0.sigma_min[0] > 0.0);
    for (std::size_t i = 1; i < s1.sigma_min.size(); ++i)
        CHECK(s1.sigma_min[i] <= s1.sigma_min[i - 1] * (1.0 + 1e-12));
    MESSAGE("sigma_min(5) -> sigma_min(20), delta=1: ", s1.sigma_min[4], " -> ", s1.sigma_min[19]);
    MESSAGE("sigma_min(5) -> sigma_min(20), delta=0: ", s0.sigma_min[4], " -> ", s0.sigma_min[19]);
    CHECK(s1.sigma_min[19] / s1.sigma_min[4] <= 1e-6);
    CHECK(s0.sigma_min[19] / s0.sigma_min[4] >= 1e-2);
    // contrast invariant at equal mode count
    CHECK(s1.sigma_min[14] / s0.sigma_min[14] <= 1e-4);
}

TEST_CASE("dual exponential representation reproduces solve_dual")
{
    // synthetic eigenvalues spanning all three regimes at delta = 1
    Eigen::VectorXd lams(4);
    lams << 1.0, 4.0, 9.0, 30.0;
    auto sp = classify(1.0, lams);
    REQUIRE(std::holds_alternative<Critical>(sp.regimes[1]));

    Eigen::VectorXd psi0(4), psi1(4);
    psi0 << 0.4, -1.1, 0.8, 0.2;
    psi1 << -0.3, 0.5, 1.4, -0.9;
    auto coeffs = dual_exponential_coeffs(psi0, psi1, sp);
    CHECK(coeffs[1].confluent);
    for (int n = 0; n < 4; ++n)
        if (!coeffs[n].confluent)
            CHECK((coeffs[n].a + coeffs[n].b).real() == doctest::Approx(psi0(n)).epsilon(1e-13));

    const double T = 2.5;
    for (int j = 0; j <= 25; ++j) {
        double t = T * j / 25.0;
        Eigen::VectorXd rec = dual_from_coeffs(coeffs, sp, T, t);
        Eigen::VectorXd ref = solve_dual(psi0, psi1, sp, T, t).u_coeffs;
        CHECK((rec - ref).cwiseAbs().maxCoeff() <= 1e-10);
    }

    // psi1 = 0, overdamped: the two fractions sum to one
    Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
    auto c2 = dual_exponential_coeffs(psi0, z, sp);
    CHECK((c2[3].a + c2[3].b).real() == doctest::Approx(psi0(3)).epsilon(1e-14));
}

TEST_CASE("unique continuation Gram test")
{
    Lab lab(96, 0.5, 10);
    Eigen::MatrixXd table = flux_table(lab.basis, lab.sys);

    // single mode: sigma_min is the squared flux mass on the window
    auto rep1 = unique_continuation_test(1.0, 1.5, table, lab.grid, 1);
    CHECK(rep1.sigma_min > 0.0);
    double mass = 0.0;
    for (int c = 0; c < lab.grid.n_exterior_cells(); ++c) {
        double x = lab.grid.exterior_cell_mid(c);
        if (x > 1.0 && x < 1.5)
            mass += lab.grid.he() * table(c, 0) * table(c, 0);
    }
    CHECK(rep1.sigma_min == doctest::Approx(mass).epsilon(1e-13));

    // full halo (both sides), ten modes: full-rank verdict
    auto repfull = unique_continuation_test(
        {{lab.grid.halo_left(), lab.grid.a}, {lab.grid.b, lab.grid.halo_right()}}, table,
        lab.grid, 10);
    CHECK(repfull.full_rank);

    // doubled weights scale the Gram, verdict unchanged
    auto repdup = unique_continuation_test(1.0, 1.5, table * std::sqrt(2.0), lab.grid, 5);
    auto repbase = unique_continuation_test(1.0, 1.5, table, lab.grid, 5);
    CHECK(repdup.sigma_min == doctest::Approx(2.0 * repbase.sigma_min).epsilon(1e-12));
    CHECK(repdup.trace == doctest::Approx(2.0 * repbase.trace).epsilon(1e-12));
    CHECK(repdup.full_rank == repbase.full_rank);

    CHECK_THROWS_AS(unique_continuation_test(0.5, 1.5, table, lab.grid, 5), validation_error);
}

TEST_CASE("degenerate maps: empty ansatz and rank deficiency")
{
    Lab lab(48, 0.5, 4);
    auto sp = classify(0.2, lab.basis.lambdas);
    ControlAnsatz empty;
    empty.T = 2.0;
    Eigen::MatrixXd R = reachability_map(empty, lab.basis, lab.sys, sp);
    CHECK(R.rows() == 8);
    CHECK(R.cols() == 0);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
    CHECK_THROWS_AS(approximate_control(z, z, empty, R, lab.basis, 1e-10), validation_error);

    // duplicated columns make the zero-regularization path refuse to solve
    auto a = make_ansatz(lab.grid, 1.25, 1.75, 2, 1, 2.0);
    Eigen::MatrixXd R1 = reachability_map(a, lab.basis, lab.sys, sp);
    ControlAnsatz twice = a;
    twice.sites.push_back(a.sites[0]);
    twice.sites.push_back(a.sites[1]);
    twice.coefficients = Eigen::MatrixXd::Zero(4, 1);
    Eigen::MatrixXd R2(R1.rows(), 4);
    R2 << R1, R1;
    CHECK_THROWS_AS(approximate_control(z, z, twice, R2, lab.basis, 0.0), numerical_error);
    // with regularization the duplicated map is fine
    CHECK_NOTHROW(approximate_control(z, z, twice, R2, lab.basis, 1e-10));
}
