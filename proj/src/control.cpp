#include "nlwave/control.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace nlwave {

namespace {
using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
using cd = std::complex<double>;
} // namespace

ExteriorControl ControlAnsatz::to_control(const Grid1D& g) const
{
    ExteriorControl c;
    c.T = T;
    for (std::size_t i = 0; i < sites.size(); ++i)
        for (std::size_t j = 0; j < profiles.size(); ++j) {
            double amp = coefficients(static_cast<int>(i), static_cast<int>(j));
            if (amp == 0.0)
                continue;
            TimeProfile q = profiles[j];
            q.amplitude *= amp;
            c.terms.push_back({ExteriorProfile::site(g, sites[i]), q});
        }
    return c;
}

ExteriorControl ControlAnsatz::element(const Grid1D& g, int i, int j) const
{
    ExteriorControl c;
    c.T = T;
    c.terms.push_back({ExteriorProfile::site(g, sites[i]), profiles[j]});
    return c;
}

ControlAnsatz make_ansatz(const Grid1D& g, double lo, double hi, int n_sites, int n_profiles,
                          double T)
{
    if (!(hi > lo))
        throw validation_error("make_ansatz: empty control region");
    if (!(hi <= g.a || lo >= g.b))
        throw validation_error("make_ansatz: control region must be disjoint from [a,b]");
    std::vector<int> candidates;
    for (int d = 0; d < g.n_datum(); ++d) {
        if (d == g.datum_index_a() || d == g.datum_index_b())
            continue;
        double x = g.datum_node(d);
        if (x > lo && x < hi)
            candidates.push_back(d);
    }
    if (static_cast<int>(candidates.size()) < n_sites)
        throw validation_error("make_ansatz: control region holds fewer than the requested sites");
    ControlAnsatz a;
    a.T = T;
    for (int i = 0; i < n_sites; ++i) {
        int idx = (n_sites == 1) ? 0
                                 : static_cast<int>(std::lround(
                                       i * (candidates.size() - 1.0) / (n_sites - 1.0)));
        a.sites.push_back(candidates[idx]);
    }
    std::sort(a.sites.begin(), a.sites.end());
    a.sites.erase(std::unique(a.sites.begin(), a.sites.end()), a.sites.end());
    while (static_cast<int>(a.sites.size()) < n_sites) // top up after dedup
        for (int d : candidates) {
            if (std::find(a.sites.begin(), a.sites.end(), d) == a.sites.end()) {
                a.sites.push_back(d);
                break;
            }
        }
    std::sort(a.sites.begin(), a.sites.end());

    // equal-width translated bumps covering (0,T): translates share the
    // transform magnitude and differ by the phase e^{-i beta c_j}, which
    // keeps the moment rows direction-diverse at every frequency
    for (int j = 0; j < n_profiles; ++j) {
        TimeProfile q;
        q.kind = "poly";
        double c = T * (j + 1.0) / (n_profiles + 1.0);
        double w = 2.0 * T / (n_profiles + 1.0);
        q.t0 = std::max(0.02 * T, c - w / 2.0);
        q.t1 = std::min(0.98 * T, c + w / 2.0);
        q.amplitude = 1.0;
        a.profiles.push_back(q);
    }
    a.coefficients = Eigen::MatrixXd::Zero(n_sites, n_profiles);
    return a;
}

ControlAnsatz make_ansatz_two_sided(const Grid1D& g, double lo, double hi, int n_sites,
                                    int n_profiles, double T)
{
    double mid = 0.5 * (g.a + g.b);
    ControlAnsatz a = make_ansatz(g, lo, hi, (n_sites + 1) / 2, n_profiles, T);
    ControlAnsatz b = make_ansatz(g, 2.0 * mid - hi, 2.0 * mid - lo, n_sites / 2, n_profiles, T);
    a.sites.insert(a.sites.end(), b.sites.begin(), b.sites.end());
    std::sort(a.sites.begin(), a.sites.end());
    a.coefficients = Eigen::MatrixXd::Zero(static_cast<int>(a.sites.size()),
                                           static_cast<int>(a.profiles.size()));
    return a;
}

std::complex<double> moment_transform(const TimeProfile& q, double pairing, double delta,
                                      std::complex<double> z)
{
    auto re = [&](double t) {
        double v = q.value(t) + delta * q.d1(t);
        cd e = std::exp(cd(0.0, 1.0) * z * t);
        return v * e.real();
    };
    auto im = [&](double t) {
        double v = q.value(t) + delta * q.d1(t);
        cd e = std::exp(cd(0.0, 1.0) * z * t);
        return v * e.imag();
    };
    double r = GK::integrate(re, q.t0, q.t1, 15, 1e-13);
    double i = GK::integrate(im, q.t0, q.t1, 15, 1e-13);
    return pairing * cd(r, i);
}

namespace {

// int (q + delta q') e^{-mu (t - t_ref)} dt over the support, complex mu:
// the moment weight scaled by e^{mu t_ref} against overflow of decaying
// exponents (Re mu <= 0, t <= t_ref)
cd weight_integral(const TimeProfile& q, double delta, cd mu, double t_ref)
{
    auto re = [&](double t) {
        double v = q.value(t) + delta * q.d1(t);
        cd e = std::exp(-mu * (t - t_ref));
        return v * e.real();
    };
    auto im = [&](double t) {
        double v = q.value(t) + delta * q.d1(t);
        cd e = std::exp(-mu * (t - t_ref));
        return v * e.imag();
    };
    double r = GK::integrate(re, q.t0, q.t1, 15, 1e-13);
    double i = (mu.imag() == 0.0) ? 0.0 : GK::integrate(im, q.t0, q.t1, 15, 1e-13);
    return cd(r, i);
}

// int (q + delta q') (-t) e^{-mu (t - t_ref)} dt: the confluent partner row
double weight_integral_deriv(const TimeProfile& q, double delta, double mu, double t_ref)
{
    auto f = [&](double t) {
        return -(q.value(t) + delta * q.d1(t)) * t * std::exp(-mu * (t - t_ref));
    };
    return GK::integrate(f, q.t0, q.t1, 15, 1e-13);
}

Eigen::MatrixXd site_pairings(const ControlAnsatz& ansatz, const SpectralBasis& basis,
                              const StiffnessSystem& sys)
{
    Eigen::MatrixXd P(basis.m, static_cast<int>(ansatz.sites.size()));
    for (int i = 0; i < P.cols(); ++i) {
        ExteriorProfile site = ExteriorProfile::site(sys.grid, ansatz.sites[i]);
        FullField lift = dirichlet_lift(site, sys);
        for (int n = 0; n < basis.m; ++n)
            P(n, i) = flux_pairing_lifted(basis, n, sys, lift);
    }
    return P;
}

} // namespace

MomentSystem moment_matrix(const DampingSpectrum& spectrum, const SpectralBasis& basis,
                           const StiffnessSystem& sys, const ControlAnsatz& ansatz, int M_modes,
                           const Eigen::VectorXd& u0, const Eigen::VectorXd& u1)
{
    if (M_modes > basis.m)
        throw validation_error("moment_matrix: M_modes exceeds the retained basis");
    const int ns = static_cast<int>(ansatz.sites.size());
    const int np = static_cast<int>(ansatz.profiles.size());
    const double delta = spectrum.delta;

    Eigen::MatrixXd P = site_pairings(ansatz, basis, sys);

    MomentSystem msys;
    msys.observation_rows.resize(2 * M_modes, ns * np);
    msys.rhs = Eigen::VectorXd::Zero(2 * M_modes);
    for (const auto& q : ansatz.profiles)
        msys.t_ref = std::max(msys.t_ref, q.t1);

    auto data_side = [&](int n, cd mu) -> cd {
        double a0 = (u0.size() > n) ? u0(n) : 0.0;
        double a1 = (u1.size() > n) ? u1(n) : 0.0;
        return a1 + mu * a0 + delta * basis.lambdas(n) * a0;
    };

    int row = 0;
    for (int n = 0; n < M_modes; ++n) {
        const ModeRegime& r = spectrum.regimes[n];
        if (auto* o = std::get_if<Oscillatory>(&r)) {
            cd mu(o->alpha, o->beta);
            for (int j = 0; j < np; ++j) {
                cd w = weight_integral(ansatz.profiles[j], delta, mu, msys.t_ref);
                for (int i = 0; i < ns; ++i) {
                    msys.observation_rows(row, i * np + j) = (P(n, i) * w).real();
                    msys.observation_rows(row + 1, i * np + j) = (P(n, i) * w).imag();
                }
            }
            cd d = data_side(n, mu);
            msys.rhs(row) = d.real();
            msys.rhs(row + 1) = d.imag();
            msys.exponents.push_back(mu);
            msys.exponents.push_back(std::conj(mu));
            msys.confluent.push_back(false);
            msys.confluent.push_back(false);
        } else if (auto* v = std::get_if<Overdamped>(&r)) {
            for (int half = 0; half < 2; ++half) {
                double mu = (half == 0) ? v->lambda_plus : v->lambda_minus;
                for (int j = 0; j < np; ++j) {
                    double w = weight_integral(ansatz.profiles[j], delta, cd(mu, 0.0), msys.t_ref).real();
                    for (int i = 0; i < ns; ++i)
                        msys.observation_rows(row + half, i * np + j) = P(n, i) * w;
                }
                msys.rhs(row + half) = data_side(n, cd(mu, 0.0)).real();
                msys.exponents.push_back(cd(mu, 0.0));
                msys.confluent.push_back(false);
            }
        } else {
            // critical double root: the e^{rt} row and its t e^{rt} partner
            double mu = std::get<Critical>(r).root;
            for (int j = 0; j < np; ++j) {
                double w0 = weight_integral(ansatz.profiles[j], delta, cd(mu, 0.0), msys.t_ref).real();
                double w1 = weight_integral_deriv(ansatz.profiles[j], delta, mu, msys.t_ref);
                for (int i = 0; i < ns; ++i) {
                    msys.observation_rows(row, i * np + j) = P(n, i) * w0;
                    msys.observation_rows(row + 1, i * np + j) = P(n, i) * w1;
                }
            }
            msys.rhs(row) = data_side(n, cd(mu, 0.0)).real();
            msys.rhs(row + 1) = ((u0.size() > n) ? u0(n) : 0.0); // coefficient of the t-term
            msys.exponents.push_back(cd(mu, 0.0));
            msys.exponents.push_back(cd(mu, 0.0));
            msys.confluent.push_back(true);
            msys.confluent.push_back(true);
        }
        msys.row_mode.push_back(n);
        msys.row_mode.push_back(n);
        row += 2;
    }
    return msys;
}

ReachabilityTables reachability_tables(const ControlAnsatz& ansatz, const SpectralBasis& basis,
                                       const StiffnessSystem& sys, const DampingSpectrum& spectrum)
{
    // the assembled map drops the q(T), q'(T) boundary terms
    for (const auto& q : ansatz.profiles)
        if (!(q.t1 < ansatz.T))
            throw contract_error("reachability_tables: profile support must end before T");
    ReachabilityTables tb;
    tb.P = site_pairings(ansatz, basis, sys);
    const int np = static_cast<int>(ansatz.profiles.size());
    tb.I.resize(basis.m, np);
    tb.dI.resize(basis.m, np);
    const double T = ansatz.T;
    for (int j = 0; j < np; ++j) {
        const TimeProfile& q = ansatz.profiles[j];
#pragma omp parallel for schedule(dynamic)
        for (int n = 0; n < basis.m; ++n) {
            const ModeRegime& r = spectrum.regimes[n];
            auto fI = [&](double tau) { return q.d2(tau) * coeff_B(r, T - tau); };
            auto fdI = [&](double tau) { return q.d2(tau) * coeff_dB(r, T - tau); };
            tb.I(n, j) = GK::integrate(fI, q.t0, q.t1, 15, 1e-13);
            tb.dI(n, j) = GK::integrate(fdI, q.t0, q.t1, 15, 1e-13);
        }
    }
    return tb;
}

Eigen::MatrixXd reachability_map(const ControlAnsatz& ansatz, const SpectralBasis& basis,
                                 const StiffnessSystem& sys, const DampingSpectrum& spectrum)
{
    ReachabilityTables tb = reachability_tables(ansatz, basis, sys, spectrum);
    const int ns = static_cast<int>(ansatz.sites.size());
    const int np = static_cast<int>(ansatz.profiles.size());
    const int m = basis.m;
    Eigen::MatrixXd R(2 * m, ns * np);
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < np; ++j)
            for (int n = 0; n < m; ++n) {
                // q(T) = 0 inside the support contract, so v_n(T) = P I / lambda
                double u = tb.P(n, i) * tb.I(n, j) / basis.lambdas(n);
                double ut = tb.P(n, i) * tb.dI(n, j) / basis.lambdas(n);
                R(n, i * np + j) = u;
                R(m + n, i * np + j) = ut / std::sqrt(basis.lambdas(n));
            }
    return R;
}

ApproximateControlResult approximate_control(const Eigen::VectorXd& target_u,
                                             const Eigen::VectorXd& target_ut,
                                             const ControlAnsatz& ansatz,
                                             const Eigen::MatrixXd& map,
                                             const SpectralBasis& basis, double eps_reg)
{
    const int m = basis.m;
    if (target_u.size() != m || target_ut.size() != m)
        throw validation_error("approximate_control: target length mismatch");
    if (eps_reg < 0.0)
        throw validation_error("approximate_control: eps_reg must be nonnegative");
    if (map.cols() == 0)
        throw validation_error("approximate_control: empty ansatz");

    Eigen::VectorXd b(2 * m);
    for (int n = 0; n < m; ++n) {
        b(n) = target_u(n);
        b(m + n) = target_ut(n) / std::sqrt(basis.lambdas(n));
    }

    Eigen::VectorXd c;
    if (eps_reg == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(map);
        if (qr.rank() < std::min(map.rows(), map.cols()))
            throw numerical_error("approximate_control: rank-deficient map, regularization required");
        c = qr.solve(b);
    } else {
        Eigen::MatrixXd A = map.transpose() * map;
        A.diagonal().array() += eps_reg;
        c = Eigen::LDLT<Eigen::MatrixXd>(A).solve(map.transpose() * b);
    }

    Eigen::VectorXd y = map * c;
    ApproximateControlResult res;
    res.residual_u = (b.head(m) - y.head(m)).norm();
    res.residual_ut = (b.tail(m) - y.tail(m)).norm();
    res.achieved_error = res.residual_u + res.residual_ut;
    res.coefficients.resize(static_cast<int>(ansatz.sites.size()),
                            static_cast<int>(ansatz.profiles.size()));
    for (int i = 0; i < res.coefficients.rows(); ++i)
        for (int j = 0; j < res.coefficients.cols(); ++j)
            res.coefficients(i, j) = c(i * res.coefficients.cols() + j);
    return res;
}

double duality_residual(const Eigen::VectorXd& u0, const Eigen::VectorXd& u1,
                        const ExteriorControl& g, const Eigen::VectorXd& psi0,
                        const Eigen::VectorXd& psi1, const SpectralBasis& basis,
                        const StiffnessSystem& sys, const DampingSpectrum& spectrum)
{
    const double T = g.T;
    const double delta = spectrum.delta;
    const int m = basis.m;
    Eigen::MatrixXd P = control_pairings(g, basis, sys);

    StatePair uT = solve_full(u0, u1, g, P, spectrum, basis, T);
    StatePair psiT = solve_dual(psi0, psi1, spectrum, T, T);
    StatePair psi0t = solve_dual(psi0, psi1, spectrum, T, 0.0);

    auto bracket = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& ut,
                       const Eigen::VectorXd& p, const Eigen::VectorXd& pt) {
        double acc = 0.0;
        for (int n = 0; n < m; ++n)
            acc += -ut(n) * p(n) + u(n) * pt(n) - delta * basis.lambdas(n) * u(n) * p(n);
        return acc;
    };
    double lhs = bracket(uT.u_coeffs, uT.ut_coeffs, psiT.u_coeffs, psiT.ut_coeffs) -
                 bracket(u0, u1, psi0t.u_coeffs, psi0t.ut_coeffs);

    double rhs = 0.0;
    for (int k = 0; k < static_cast<int>(g.terms.size()); ++k) {
        const TimeProfile& q = g.terms[k].temporal;
        for (int n = 0; n < m; ++n) {
            const ModeRegime& r = spectrum.regimes[n];
            auto f = [&](double t) {
                double psi_n = coeff_A(r, T - t) * psi0(n) + coeff_B(r, T - t) * psi1(n);
                return (q.value(t) + delta * q.d1(t)) * psi_n;
            };
            rhs += P(n, k) * GK::integrate(f, q.t0, q.t1, 15, 1e-13);
        }
    }
    return std::abs(lhs - rhs) / std::max(1.0, std::max(std::abs(lhs), std::abs(rhs)));
}

SigmaMinSeries spectral_control_diagnostic(const DampingSpectrum& spectrum,
                                           const SpectralBasis& basis, const StiffnessSystem& sys,
                                           const ControlAnsatz& ansatz, int k_max)
{
    MomentSystem msys = moment_matrix(spectrum, basis, sys, ansatz, k_max);
    Eigen::MatrixXd M = msys.observation_rows;
    for (int r = 0; r < M.rows(); ++r) {
        double nrm = M.row(r).norm();
        if (nrm > 0.0)
            M.row(r) /= nrm;
    }
    SigmaMinSeries out;
    out.delta = spectrum.delta;
    for (int k = 1; k <= k_max; ++k) {
        Eigen::MatrixXd sub = M.topRows(2 * k).transpose(); // columns-major for SVD of rows
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
        out.k.push_back(k);
        out.sigma_min.push_back(svd.singularValues().tail(1)(0));
    }
    return out;
}

std::vector<DualCoeff> dual_exponential_coeffs(const Eigen::VectorXd& psi0,
                                               const Eigen::VectorXd& psi1,
                                               const DampingSpectrum& spectrum)
{
    const int m = static_cast<int>(spectrum.regimes.size());
    std::vector<DualCoeff> out(m);
    for (int n = 0; n < m; ++n) {
        const ModeRegime& r = spectrum.regimes[n];
        if (auto* o = std::get_if<Oscillatory>(&r)) {
            cd i(0.0, 1.0);
            out[n].a = 0.5 * (1.0 + i * o->alpha / o->beta) * psi0(n) - i / (2.0 * o->beta) * psi1(n);
            out[n].b = std::conj(out[n].a);
        } else if (auto* v = std::get_if<Overdamped>(&r)) {
            double d = v->lambda_minus - v->lambda_plus;
            out[n].a = (v->lambda_minus * psi0(n) - psi1(n)) / d;
            out[n].b = (-v->lambda_plus * psi0(n) + psi1(n)) / d;
        } else {
            double rr = std::get<Critical>(r).root;
            out[n].a = psi0(n);
            out[n].b = psi1(n) - rr * psi0(n);
            out[n].confluent = true;
        }
    }
    return out;
}

Eigen::VectorXd dual_from_coeffs(const std::vector<DualCoeff>& coeffs,
                                 const DampingSpectrum& spectrum, double T, double t)
{
    const int m = static_cast<int>(coeffs.size());
    Eigen::VectorXd psi(m);
    const double tau = T - t;
    for (int n = 0; n < m; ++n) {
        const ModeRegime& r = spectrum.regimes[n];
        if (auto* o = std::get_if<Oscillatory>(&r)) {
            cd lp(o->alpha, o->beta);
            psi(n) = 2.0 * (coeffs[n].a * std::exp(lp * tau)).real();
        } else if (auto* v = std::get_if<Overdamped>(&r)) {
            psi(n) = coeffs[n].a.real() * std::exp(v->lambda_plus * tau) +
                     coeffs[n].b.real() * std::exp(v->lambda_minus * tau);
        } else {
            double rr = std::get<Critical>(r).root;
            psi(n) = (coeffs[n].a.real() + coeffs[n].b.real() * tau) * std::exp(rr * tau);
        }
    }
    return psi;
}

UniqueContinuationReport unique_continuation_test(const std::vector<std::pair<double, double>>& region,
                                                  const Eigen::MatrixXd& flux, const Grid1D& grid,
                                                  int M_modes, double tol)
{
    if (region.empty())
        throw validation_error("unique_continuation_test: empty region");
    for (auto [lo, hi] : region) {
        if (!(hi > lo))
            throw validation_error("unique_continuation_test: empty window");
        if (!(hi <= grid.a || lo >= grid.b))
            throw validation_error("unique_continuation_test: region must avoid the closure of Omega");
    }
    if (M_modes > flux.cols())
        throw validation_error("unique_continuation_test: more modes than flux columns");

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(M_modes, M_modes);
    int used = 0;
    for (int c = 0; c < grid.n_exterior_cells(); ++c) {
        double x = grid.exterior_cell_mid(c);
        bool inside = false;
        for (auto [lo, hi] : region)
            inside = inside || (x > lo && x < hi);
        if (!inside)
            continue;
        ++used;
        Eigen::VectorXd f = flux.row(c).head(M_modes).transpose();
        G += grid.he() * f * f.transpose();
    }
    if (used == 0)
        throw validation_error("unique_continuation_test: no exterior cells inside the region");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    UniqueContinuationReport rep;
    rep.sigma_min = es.eigenvalues()(0);
    rep.trace = G.trace();
    rep.modes = M_modes;
    rep.cells = used;
    rep.full_rank = rep.sigma_min > tol * rep.trace / M_modes;
    return rep;
}

UniqueContinuationReport unique_continuation_test(double lo, double hi, const Eigen::MatrixXd& flux,
                                                  const Grid1D& grid, int M_modes, double tol)
{
    return unique_continuation_test(std::vector<std::pair<double, double>>{{lo, hi}}, flux, grid,
                                    M_modes, tol);
}

void export_sigma_csv(const std::vector<SigmaMinSeries>& series, const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw validation_error("export_sigma_csv: cannot open " + path);
    f << "k,sigma_min,delta\n";
    char buf[96];
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.k.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", s.k[i], s.sigma_min[i], s.delta);
            f << buf;
        }
}

void export_control_error_csv(const std::vector<std::array<double, 3>>& rows, const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw validation_error("export_control_error_csv: cannot open " + path);
    f << "ansatz_size,eps_reg,error\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%g,%.17g,%.17g\n", r[0], r[1], r[2]);
        f << buf;
    }
}

} // namespace nlwave
