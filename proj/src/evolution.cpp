#include "nlwave/evolution.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace nlwave {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

double poly_bump_deriv(int k, double xi)
{
    // (xi(1-xi))^3 = xi^3 - 3 xi^4 + 3 xi^5 - xi^6
    static const double c[7] = {0, 0, 0, 1, -3, 3, -1};
    double acc = 0.0;
    for (int p = 3; p <= 6; ++p) {
        if (p - k < 0)
            continue;
        double fac = 1.0;
        for (int j = 0; j < k; ++j)
            fac *= p - j;
        acc += c[p] * fac * std::pow(xi, p - k);
    }
    return acc;
}

double cinf_bump(double xi)
{
    if (xi <= 1e-3 || xi >= 1.0 - 1e-3)
        return 0.0;
    double u = xi * (1.0 - xi);
    return std::exp(4.0 - 1.0 / u);
}

double cinf_bump_deriv(int k, double xi)
{
    if (k == 0)
        return cinf_bump(xi);
    if (xi <= 1e-3 || xi >= 1.0 - 1e-3)
        return 0.0;
    double u = xi * (1.0 - xi);
    double up = 1.0 - 2.0 * xi;
    double g1 = up / (u * u);
    if (k == 1)
        return cinf_bump(xi) * g1;
    double g2 = -2.0 * (u + up * up) / (u * u * u);
    if (k == 2)
        return cinf_bump(xi) * (g1 * g1 + g2);
    // orders 3 and 4 by central differences of the analytic second derivative
    double hstep = 1e-4;
    auto d2 = [&](double z) { return cinf_bump_deriv(2, z); };
    if (k == 3)
        return (d2(xi + hstep) - d2(xi - hstep)) / (2.0 * hstep);
    return (d2(xi + hstep) - 2.0 * d2(xi) + d2(xi - hstep)) / (hstep * hstep);
}

} // namespace

double TimeProfile::deriv(int k, double t) const
{
    if (k < 0 || k > 4)
        throw validation_error("TimeProfile: derivative order must be 0..4");
    const double w = t1 - t0;
    if (!(w > 0.0))
        throw contract_error("TimeProfile: requires t1 > t0");
    if (t <= t0 || t >= t1)
        return 0.0;
    double xi = (t - t0) / w;
    double scale = std::pow(w, -k);
    if (kind == "poly")
        return amplitude * 64.0 * poly_bump_deriv(k, xi) * scale;
    if (kind == "cinf")
        return amplitude * cinf_bump_deriv(k, xi) * scale;
    throw validation_error("TimeProfile: unknown kind '" + kind + "'");
}

void ExteriorControl::validate() const
{
    if (!(T > 0.0))
        throw contract_error("ExteriorControl: horizon T must be positive");
    for (const auto& term : terms) {
        const TimeProfile& q = term.temporal;
        if (!(q.t1 > q.t0))
            throw contract_error("ExteriorControl: empty temporal support");
        if (!(q.t0 > 0.0) || !(q.t1 < T))
            throw contract_error("ExteriorControl: temporal support must lie strictly inside (0,T)");
        double scale = std::max(1.0, std::abs(q.amplitude));
        if (std::abs(q.value(0.0)) > 1e-12 * scale || std::abs(q.d1(0.0)) > 1e-12 * scale ||
            std::abs(q.d2(0.0)) > 1e-12 * scale || std::abs(q.value(T)) > 1e-12 * scale ||
            std::abs(q.d1(T)) > 1e-12 * scale)
            throw contract_error("ExteriorControl: profile does not vanish to the required order");
        if (!term.spatial.values.allFinite())
            throw contract_error("ExteriorControl: non-finite spatial profile");
    }
}

ExteriorProfile ExteriorControl::trace_at(const Grid1D& g, double t) const
{
    ExteriorProfile acc = ExteriorProfile::zero(g);
    for (const auto& term : terms) {
        double q = term.temporal.value(t);
        if (q != 0.0) {
            acc.values += q * term.spatial.values;
            acc.tail += q * term.spatial.tail;
        }
    }
    return acc;
}

Eigen::MatrixXd control_pairings(const ExteriorControl& g, const SpectralBasis& basis,
                                 const StiffnessSystem& sys)
{
    Eigen::MatrixXd P(basis.m, static_cast<int>(g.terms.size()));
    for (int k = 0; k < P.cols(); ++k) {
        FullField lift = dirichlet_lift(g.terms[k].spatial, sys);
        for (int n = 0; n < basis.m; ++n)
            P(n, k) = flux_pairing_lifted(basis, n, sys, lift);
    }
    return P;
}

StatePair solve_homogeneous(const Eigen::VectorXd& u0, const Eigen::VectorXd& u1,
                            const DampingSpectrum& spectrum, double t)
{
    if (t < 0.0)
        throw validation_error("solve_homogeneous: t must be nonnegative");
    const int m = static_cast<int>(spectrum.regimes.size());
    if (u0.size() != m || u1.size() != m)
        throw validation_error("solve_homogeneous: coefficient length mismatch");
    StatePair st;
    st.t = t;
    st.u_coeffs.resize(m);
    st.ut_coeffs.resize(m);
    for (int n = 0; n < m; ++n) {
        const ModeRegime& r = spectrum.regimes[n];
        st.u_coeffs(n) = coeff_A(r, t) * u0(n) + coeff_B(r, t) * u1(n);
        st.ut_coeffs(n) = coeff_dA(r, t) * u0(n) + coeff_dB(r, t) * u1(n);
    }
    return st;
}

namespace {

// overdamped kernels have an e^{lambda_minus (t-tau)} layer at tau = t;
// split it off before handing the window to the adaptive rule
template <typename F>
double modal_time_integral(F&& f, double lo, double hi, const ModeRegime& r)
{
    if (!(hi > lo))
        return 0.0;
    double split = hi;
    if (auto* v = std::get_if<Overdamped>(&r)) {
        double layer = 8.0 / std::abs(v->lambda_minus);
        if (layer < hi - lo)
            split = hi - layer;
    }
    double acc = 0.0;
    if (split < hi)
        acc += GK::integrate(f, split, hi, 15, 1e-12);
    acc += GK::integrate(f, lo, split < hi ? split : hi, 15, 1e-12);
    return acc;
}

} // namespace

StatePair solve_controlled(const ExteriorControl& g, const Eigen::MatrixXd& pairings,
                           const DampingSpectrum& spectrum, const SpectralBasis& basis, double t)
{
    g.validate();
    if (t < 0.0 || t > g.T)
        throw validation_error("solve_controlled: t outside [0,T]");
    const int m = basis.m;
    StatePair st;
    st.t = t;
    st.u_coeffs = Eigen::VectorXd::Zero(m);
    st.ut_coeffs = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < static_cast<int>(g.terms.size()); ++k) {
        const TimeProfile& q = g.terms[k].temporal;
        double lo = std::max(0.0, q.t0);
        double hi = std::min(t, q.t1);
        double qt = q.value(t), dqt = q.d1(t);
#pragma omp parallel for schedule(dynamic)
        for (int n = 0; n < m; ++n) {
            const ModeRegime& r = spectrum.regimes[n];
            double I = 0.0, dI = 0.0;
            if (hi > lo) {
                I = modal_time_integral([&](double tau) { return q.d2(tau) * coeff_B(r, t - tau); },
                                        lo, hi, r);
                dI = modal_time_integral([&](double tau) { return q.d2(tau) * coeff_dB(r, t - tau); },
                                         lo, hi, r);
            }
            double lam = basis.lambdas(n);
            st.u_coeffs(n) += pairings(n, k) / lam * (I - qt);
            st.ut_coeffs(n) += pairings(n, k) / lam * (dI - dqt);
        }
    }
    st.exterior_trace = g.trace_at(basis.grid, t);
    return st;
}

StatePair solve_controlled(const ExteriorControl& g, const SpectralBasis& basis,
                           const StiffnessSystem& sys, const DampingSpectrum& spectrum, double t)
{
    return solve_controlled(g, control_pairings(g, basis, sys), spectrum, basis, t);
}

StatePair solve_controlled_reference(const ExteriorControl& g, const Eigen::MatrixXd& pairings,
                                     const DampingSpectrum& spectrum, const SpectralBasis& basis,
                                     double t)
{
    g.validate();
    const int m = basis.m;
    StatePair st;
    st.t = t;
    st.u_coeffs = Eigen::VectorXd::Zero(m);
    st.ut_coeffs = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < static_cast<int>(g.terms.size()); ++k) {
        const TimeProfile& q = g.terms[k].temporal;
        double lo = std::max(0.0, q.t0);
        double hi = std::min(t, q.t1);
        if (hi <= lo)
            continue;
        for (int n = 0; n < m; ++n) {
            const ModeRegime& r = spectrum.regimes[n];
            const double lam = regime_lambda(r);
            const double dlam = regime_delta_lambda(r);
            double I = modal_time_integral(
                [&](double tau) { return q.value(tau) * coeff_d2B(r, t - tau); }, lo, hi, r);
            // d/dt of the B'' form: boundary term q(t) B''(0) = -dlam q(t),
            // kernel B''' = -lam B' - dlam B'' from the modal ODE
            double dI = -dlam * q.value(t) +
                        modal_time_integral(
                            [&](double tau) {
                                return q.value(tau) *
                                       (-lam * coeff_dB(r, t - tau) - dlam * coeff_d2B(r, t - tau));
                            },
                            lo, hi, r);
            st.u_coeffs(n) += pairings(n, k) / basis.lambdas(n) * I;
            st.ut_coeffs(n) += pairings(n, k) / basis.lambdas(n) * dI;
        }
    }
    st.exterior_trace = g.trace_at(basis.grid, t);
    return st;
}

StatePair solve_full(const Eigen::VectorXd& u0, const Eigen::VectorXd& u1, const ExteriorControl& g,
                     const Eigen::MatrixXd& pairings, const DampingSpectrum& spectrum,
                     const SpectralBasis& basis, double t)
{
    StatePair hom = solve_homogeneous(u0, u1, spectrum, t);
    StatePair ctl = solve_controlled(g, pairings, spectrum, basis, t);
    StatePair st;
    st.t = t;
    st.u_coeffs = hom.u_coeffs + ctl.u_coeffs;
    st.ut_coeffs = hom.ut_coeffs + ctl.ut_coeffs;
    st.exterior_trace = ctl.exterior_trace;
    return st;
}

StatePair solve_dual(const Eigen::VectorXd& psi0, const Eigen::VectorXd& psi1,
                     const DampingSpectrum& spectrum, double T, double t)
{
    if (t < 0.0 || t > T)
        throw validation_error("solve_dual: t outside [0,T]");
    const int m = static_cast<int>(spectrum.regimes.size());
    StatePair st;
    st.t = t;
    st.u_coeffs.resize(m);
    st.ut_coeffs.resize(m);
    const double tau = T - t;
    for (int n = 0; n < m; ++n) {
        const ModeRegime& r = spectrum.regimes[n];
        st.u_coeffs(n) = coeff_A(r, tau) * psi0(n) + coeff_B(r, tau) * psi1(n);
        // d/dt flips the sign of the inner derivative
        st.ut_coeffs(n) = -(coeff_dA(r, tau) * psi0(n) + coeff_dB(r, tau) * psi1(n));
    }
    return st;
}

FluxVector dual_flux(const Eigen::VectorXd& psi0, const Eigen::VectorXd& psi1,
                     const DampingSpectrum& spectrum, double T, double t,
                     const Eigen::MatrixXd& table)
{
    if (t < 0.0 || t > T)
        throw validation_error("dual_flux: t outside [0,T]");
    const int m = static_cast<int>(spectrum.regimes.size());
    Eigen::VectorXd c(m);
    const double tau = T - t;
    for (int n = 0; n < m; ++n) {
        const ModeRegime& r = spectrum.regimes[n];
        c(n) = coeff_A(r, tau) * psi0(n) + coeff_B(r, tau) * psi1(n);
    }
    FluxVector out;
    out.values = table * c;
    return out;
}

double state_energy(const StatePair& st, const SpectralBasis& basis)
{
    double e = 0.0;
    for (int n = 0; n < st.u_coeffs.size(); ++n)
        e += basis.lambdas(n) * st.u_coeffs(n) * st.u_coeffs(n) + st.ut_coeffs(n) * st.ut_coeffs(n);
    return e;
}

DissipativityReport dissipativity_audit(const Eigen::VectorXd& lambdas, double delta, int trials,
                                        unsigned long long seed)
{
    if (delta < 0.0)
        throw validation_error("dissipativity_audit: delta must be nonnegative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    const int m = static_cast<int>(lambdas.size());
    DissipativityReport rep;
    rep.trials = trials;
    rep.all_nonpositive = true;
    double worst = -1e300;
    for (int trial = 0; trial < trials; ++trial) {
        double q = 0.0, nrm = 0.0;
        for (int n = 0; n < m; ++n) {
            double u1 = N(rng), u2 = N(rng);
            double lam = lambdas(n);
            // <B U, U>_H with B = -A_delta - I in modal coordinates
            q += -(1.0 + lam) * u1 * u1 + u1 * u2 - (1.0 + delta * lam) * u2 * u2;
            nrm += (1.0 + lam) * u1 * u1 + u2 * u2;
        }
        double ratio = q / nrm;
        worst = std::max(worst, ratio);
        if (!(q <= 1e-10 * nrm))
            rep.all_nonpositive = false;
    }
    rep.max_ratio = worst;
    return rep;
}

RegularityReport regularity_audit(const ExteriorControl& g, const Eigen::MatrixXd& pairings,
                                  const DampingSpectrum& spectrum, const SpectralBasis& basis,
                                  const StiffnessSystem& sys, int m_derivative, int n_t)
{
    if (m_derivative < 0 || m_derivative > 2)
        throw validation_error("regularity_audit: m_derivative must be 0..2");
    g.validate();
    RegularityReport rep;
    const int m = basis.m;
    std::vector<int> counts;
    for (int c = std::max(2, m / 4); c < m; c *= 2)
        counts.push_back(c);
    counts.push_back(m);

    // L2(ext) size of each spatial profile by the midpoint rule
    std::vector<double> spatial_norm(g.terms.size());
    for (std::size_t k = 0; k < g.terms.size(); ++k) {
        double acc = 0.0;
        for (int c = 0; c < sys.grid.n_exterior_cells(); ++c) {
            double v = g.terms[k].spatial.at(sys.grid, sys.grid.exterior_cell_mid(c));
            acc += sys.grid.he() * v * v;
        }
        spatial_norm[k] = std::sqrt(acc);
    }
    std::vector<double> qsup(g.terms.size());
    for (std::size_t k = 0; k < g.terms.size(); ++k) {
        const TimeProfile& q = g.terms[k].temporal;
        double sup = 0.0;
        for (int j = 0; j <= 400; ++j) {
            double tau = q.t0 + (q.t1 - q.t0) * j / 400.0;
            sup = std::max(sup, std::abs(q.deriv(m_derivative + 2, tau)));
        }
        qsup[k] = sup;
    }

    for (int count : counts) {
        double worst = 0.0;
        for (int j = 1; j < n_t; ++j) {
            double t = g.T * j / (n_t - 1.0);
            StatePair st = solve_controlled(g, pairings, spectrum, basis, t);
            double lhs2 = 0.0;
            for (int n = 0; n < count; ++n) {
                double lam = basis.lambdas(n);
                double val;
                if (m_derivative == 0)
                    val = st.u_coeffs(n);
                else if (m_derivative == 1)
                    val = st.ut_coeffs(n);
                else {
                    double p = 0.0, dp = 0.0;
                    for (int k = 0; k < pairings.cols(); ++k) {
                        p += pairings(n, k) * g.terms[k].temporal.value(t);
                        dp += pairings(n, k) * g.terms[k].temporal.d1(t);
                    }
                    val = -lam * st.u_coeffs(n) - spectrum.delta * lam * st.ut_coeffs(n) -
                          (p + spectrum.delta * dp);
                }
                lhs2 += (1.0 + lam) * val * val;
            }
            double rhs = 1e-300;
            for (std::size_t k = 0; k < g.terms.size(); ++k)
                rhs += spatial_norm[k] *
                       (qsup[k] + std::abs(g.terms[k].temporal.deriv(m_derivative, t)));
            worst = std::max(worst, std::sqrt(lhs2) / rhs);
        }
        rep.mode_counts.push_back(count);
        rep.ratios.push_back(worst);
    }
    // the ratios are partial sums over modes, so they can only grow; flag
    // them when the increments stop shrinking (non-converging tail)
    rep.trending_up = false;
    for (std::size_t i = 2; i < rep.ratios.size(); ++i) {
        double inc_prev = rep.ratios[i - 1] - rep.ratios[i - 2];
        double inc_last = rep.ratios[i] - rep.ratios[i - 1];
        if (inc_last > 0.75 * inc_prev && inc_last > 1e-3 * rep.ratios[i])
            rep.trending_up = true;
    }
    return rep;
}

double controlled_tail_estimate(const ExteriorControl& g, const Eigen::MatrixXd& pairings,
                                const SpectralBasis& basis)
{
    int last = basis.m - 1;
    double acc = 0.0;
    for (int k = 0; k < pairings.cols(); ++k)
        acc += std::abs(pairings(last, k)) * std::abs(g.terms[k].temporal.amplitude);
    return acc / basis.lambdas(last);
}

void export_state_csv(const std::vector<StatePair>& states, const SpectralBasis& basis,
                      const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw validation_error("export_state_csv: cannot open " + path);
    f << "t,x,u,ut\n";
    char buf[128];
    for (const auto& st : states) {
        Eigen::VectorXd u = basis.modes * st.u_coeffs;
        Eigen::VectorXd ut = basis.modes * st.ut_coeffs;
        for (int i = 0; i < u.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", st.t,
                          basis.grid.interior_node(i), u(i), ut(i));
            f << buf;
        }
    }
}

void export_modal_csv(const std::vector<StatePair>& states, const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw validation_error("export_modal_csv: cannot open " + path);
    f << "t,n,u_n,ut_n\n";
    char buf[128];
    for (const auto& st : states)
        for (int n = 0; n < st.u_coeffs.size(); ++n) {
            std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g\n", st.t, n + 1, st.u_coeffs(n),
                          st.ut_coeffs(n));
            f << buf;
        }
}

} // namespace nlwave
