#include "nlwave/scenario.hpp"

#include "nlwave/control.hpp"
#include "nlwave/evolution.hpp"
#include "nlwave/exterior.hpp"
#include "nlwave/modal.hpp"
#include "nlwave/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nlwave {

namespace {

constexpr const char* kVersion = "nlwave 1.0.0";

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    return s.substr(b, e - b + 1);
}

} // namespace

Scenario Scenario::parse_text(const std::string& text, const std::string& origin)
{
    Scenario sc;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw parse_error(origin + ":" + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw parse_error(origin + ":" + std::to_string(lineno) + ": empty section name");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw parse_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw parse_error(origin + ":" + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw parse_error(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
        sc.kv[section + "." + key] = val;
    }
    return sc;
}

Scenario Scenario::parse_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw parse_error("cannot open scenario file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_text(ss.str(), path);
}

std::string Scenario::str(const std::string& key, const std::string& fallback) const
{
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double Scenario::num(const std::string& key, double fallback) const
{
    auto it = kv.find(key);
    if (it == kv.end())
        return fallback;
    char* end = nullptr;
    double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        throw parse_error("scenario key " + key + ": not a number: '" + it->second + "'");
    return v;
}

int Scenario::integer(const std::string& key, int fallback) const
{
    double v = num(key, fallback);
    if (v != std::floor(v))
        throw parse_error("scenario key " + key + ": not an integer");
    return static_cast<int>(v);
}

namespace {

struct Setup {
    Grid1D grid;
    double s = 0.5;
    double delta = 0.0;
    int m = 16;
    double T = 2.0;
    double region_lo = 0.0, region_hi = 0.0;
    int n_t = 65;
};

Setup read_setup(const Scenario& sc)
{
    Setup st;
    st.grid.a = sc.num("domain.a", -1.0);
    st.grid.b = sc.num("domain.b", 1.0);
    st.s = sc.num("domain.s", 0.5);
    st.delta = sc.num("domain.delta", 0.0);
    st.grid.n_interior = sc.integer("grid.n_interior", 128);
    st.grid.exterior_halo = sc.num("grid.halo", 4.0 * (st.grid.b - st.grid.a));
    st.grid.n_exterior = sc.integer("grid.n_exterior", st.grid.n_interior);
    st.m = sc.integer("modes.m", 32);
    st.T = sc.num("time.T", 2.0);
    st.n_t = sc.integer("time.n_t", 65);
    double span = st.grid.b - st.grid.a;
    st.region_lo = sc.num("control_region.lo", st.grid.b + 0.125 * span);
    st.region_hi = sc.num("control_region.hi", st.grid.b + 0.375 * span);
    return st;
}

} // namespace

void Scenario::validate() const
{
    Setup st = read_setup(*this);
    st.grid.validate();
    if (!(st.s > 0.0 && st.s < 1.0))
        throw validation_error("scenario: s must lie in (0,1)");
    if (st.delta < 0.0)
        throw validation_error("scenario: delta must be nonnegative");
    if (st.m < 1 || st.m > st.grid.n_interior)
        throw validation_error("scenario: need 1 <= m <= n_interior");
    if (!(st.T > 0.0))
        throw validation_error("scenario: T must be positive");
    if (st.n_t < 2)
        throw validation_error("scenario: n_t must be at least 2");
    if (!(st.region_hi <= st.grid.a || st.region_lo >= st.grid.b))
        throw validation_error("scenario: control region must be disjoint from [a,b]");
    std::string kind = str("experiment.kind", "");
    for (const char* ok : {"spectrum", "evolve", "dual", "control", "moments", "uc", "verify"})
        if (kind == ok)
            return;
    throw validation_error("scenario: unknown experiment kind '" + kind + "'");
}

namespace {

void put_row(std::ofstream& f, std::initializer_list<double> vals)
{
    char buf[48];
    bool first = true;
    for (double v : vals) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        if (!first)
            f << ",";
        f << buf;
        first = false;
    }
    f << "\n";
}

Eigen::VectorXd parse_modal(const std::string& spec, int m)
{
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
    if (spec == "zero" || spec.empty())
        return v;
    std::istringstream is(spec);
    std::string kind;
    std::getline(is, kind, ':');
    if (kind == "unit") {
        std::string idx;
        std::getline(is, idx, ':');
        int k = std::atoi(idx.c_str());
        if (k < 1 || k > m)
            throw validation_error("modal spec: unit index out of range: " + spec);
        v(k - 1) = 1.0;
        return v;
    }
    if (kind == "bump") {
        std::string c, w;
        std::getline(is, c, ':');
        std::getline(is, w, ':');
        double center = c.empty() ? 1.0 : std::strtod(c.c_str(), nullptr);
        double width = w.empty() ? 1.5 : std::strtod(w.c_str(), nullptr);
        for (int n = 0; n < m; ++n)
            v(n) = std::exp(-0.5 * std::pow((n + 1 - center) / width, 2.0));
        v /= v.norm();
        return v;
    }
    throw validation_error("modal spec: unknown kind '" + spec + "' (use zero|unit:k|bump:c:w)");
}

struct Workspace {
    Setup st;
    StiffnessSystem sys;
    SpectralBasis basis;
    DampingSpectrum spectrum;
};

Workspace build_workspace(const Scenario& sc)
{
    Workspace w;
    w.st = read_setup(sc);
    w.sys = assemble(w.st.grid, w.st.s);
    w.basis = eigenpairs(w.sys, w.st.m);
    w.spectrum = classify(w.st.delta, w.basis.lambdas);
    return w;
}

int run_spectrum(const Scenario& sc, const std::filesystem::path& out)
{
    Workspace w = build_workspace(sc);
    std::ofstream f(out / "spectrum.csv");
    f << "n,lambda\n";
    for (int n = 0; n < w.basis.m; ++n)
        put_row(f, {double(n + 1), w.basis.lambdas(n)});
    export_basis_file(w.basis, (out / "basis.txt").string());
    export_coeff_csv(w.spectrum, w.st.T, w.st.n_t, (out / "coefficients.csv").string());
    return exit_ok;
}

ExteriorControl scenario_control(const Scenario& sc, const Workspace& w)
{
    ExteriorControl g;
    g.T = w.st.T;
    int offset = sc.integer("control.site_offset", 4);
    int d = w.st.grid.datum_index_b() + offset;
    if (d >= w.st.grid.n_datum())
        throw validation_error("control.site_offset outside the halo");
    TimeProfile q;
    q.kind = sc.str("control.kind", "poly");
    q.t0 = sc.num("control.t0", 0.1 * w.st.T);
    q.t1 = sc.num("control.t1", 0.6 * w.st.T);
    q.amplitude = sc.num("control.amplitude", 1.0);
    g.terms.push_back({ExteriorProfile::site(w.st.grid, d), q});
    return g;
}

int run_evolve(const Scenario& sc, const std::filesystem::path& out)
{
    Workspace w = build_workspace(sc);
    Eigen::VectorXd u0 = parse_modal(sc.str("experiment.u0", "unit:1"), w.st.m);
    Eigen::VectorXd u1 = parse_modal(sc.str("experiment.u1", "zero"), w.st.m);
    bool with_control = sc.integer("experiment.with_control", 0) != 0;

    std::vector<StatePair> states;
    if (with_control) {
        ExteriorControl g = scenario_control(sc, w);
        Eigen::MatrixXd P = control_pairings(g, w.basis, w.sys);
        for (int j = 0; j < w.st.n_t; ++j)
            states.push_back(
                solve_full(u0, u1, g, P, w.spectrum, w.basis, w.st.T * j / (w.st.n_t - 1.0)));
        std::ofstream rf(out / "report.txt");
        char buf[96];
        std::snprintf(buf, sizeof buf, "series_tail_estimate: %.6g\n",
                      controlled_tail_estimate(g, P, w.basis));
        rf << buf;
    } else {
        for (int j = 0; j < w.st.n_t; ++j)
            states.push_back(solve_homogeneous(u0, u1, w.spectrum, w.st.T * j / (w.st.n_t - 1.0)));
    }
    export_modal_csv(states, (out / "modal_trace.csv").string());
    export_state_csv(states, w.basis, (out / "state.csv").string());

    std::ofstream f(out / "energy.csv");
    f << "t,energy\n";
    for (const auto& stp : states)
        put_row(f, {stp.t, state_energy(stp, w.basis)});
    return exit_ok;
}

int run_dual(const Scenario& sc, const std::filesystem::path& out)
{
    Workspace w = build_workspace(sc);
    Eigen::VectorXd psi0 = parse_modal(sc.str("experiment.psi0", "unit:1"), w.st.m);
    Eigen::VectorXd psi1 = parse_modal(sc.str("experiment.psi1", "zero"), w.st.m);

    std::vector<StatePair> states;
    for (int j = 0; j < w.st.n_t; ++j)
        states.push_back(solve_dual(psi0, psi1, w.spectrum, w.st.T, w.st.T * j / (w.st.n_t - 1.0)));
    export_modal_csv(states, (out / "dual_modal.csv").string());

    Eigen::MatrixXd table = flux_table(w.basis, w.sys);
    export_flux_csv(table, w.st.grid, (out / "flux_table.csv").string());
    std::ofstream f(out / "dual_flux.csv");
    f << "t,x,flux\n";
    for (int j = 0; j < w.st.n_t; ++j) {
        double t = w.st.T * j / (w.st.n_t - 1.0);
        FluxVector fx = dual_flux(psi0, psi1, w.spectrum, w.st.T, t, table);
        for (int c = 0; c < fx.values.size(); ++c)
            put_row(f, {t, w.st.grid.exterior_cell_mid(c), fx.values(c)});
    }
    return exit_ok;
}

int run_control(const Scenario& sc, const std::filesystem::path& out)
{
    Workspace w = build_workspace(sc);
    Eigen::VectorXd target_u = parse_modal(sc.str("experiment.target", "bump:1:1.5"), w.st.m);
    Eigen::VectorXd target_ut = parse_modal(sc.str("experiment.target_ut", "zero"), w.st.m);

    int n_sites = sc.integer("experiment.n_sites", std::max(4, w.st.m));
    int n_profiles = sc.integer("experiment.n_profiles", 3);
    int enlargements = sc.integer("experiment.enlargements", 3);
    std::vector<double> eps_ladder;
    {
        std::istringstream is(sc.str("experiment.eps", "1e-8,1e-10,1e-12"));
        std::string tok;
        while (std::getline(is, tok, ','))
            eps_ladder.push_back(std::strtod(tok.c_str(), nullptr));
    }

    std::vector<std::array<double, 3>> error_rows;
    ApproximateControlResult best;
    double best_err = 1e300;
    ControlAnsatz best_ansatz;
    for (int round = 0; round < enlargements; ++round) {
        int np = n_profiles + round;
        ControlAnsatz ansatz =
            make_ansatz(w.st.grid, w.st.region_lo, w.st.region_hi, n_sites, np, w.st.T);
        Eigen::MatrixXd R = reachability_map(ansatz, w.basis, w.sys, w.spectrum);
        for (double eps : eps_ladder) {
            auto res = approximate_control(target_u, target_ut, ansatz, R, w.basis, eps);
            error_rows.push_back({double(ansatz.n_columns()), eps, res.achieved_error});
            if (res.achieved_error < best_err) {
                best_err = res.achieved_error;
                best = res;
                best_ansatz = ansatz;
            }
        }
    }
    export_control_error_csv(error_rows, (out / "control_error.csv").string());

    std::ofstream cf(out / "coefficients.csv");
    cf << "site,profile,coefficient\n";
    for (int i = 0; i < best.coefficients.rows(); ++i)
        for (int j = 0; j < best.coefficients.cols(); ++j)
            put_row(cf, {double(best_ansatz.sites[i]), double(j), best.coefficients(i, j)});

    std::ofstream rf(out / "report.txt");
    char buf[128];
    std::snprintf(buf, sizeof buf, "achieved_error: %.17g\n", best.achieved_error);
    rf << buf;
    std::snprintf(buf, sizeof buf, "residual_u: %.17g\n", best.residual_u);
    rf << buf;
    std::snprintf(buf, sizeof buf, "residual_ut: %.17g\n", best.residual_ut);
    rf << buf;
    return exit_ok;
}

int run_moments(const Scenario& sc, const std::filesystem::path& out)
{
    Workspace w = build_workspace(sc);
    int k_max = sc.integer("experiment.k_max", std::min(20, w.st.m));
    int n_sites = sc.integer("experiment.n_sites", 20);
    int n_profiles = sc.integer("experiment.n_profiles", 16);
    bool contrast = sc.integer("experiment.contrast", 1) != 0;
    bool two_sided = sc.integer("experiment.two_sided", 1) != 0;
    if (k_max > w.st.m)
        throw validation_error("moments: k_max exceeds the retained modes");

    ControlAnsatz ansatz =
        two_sided
            ? make_ansatz_two_sided(w.st.grid, w.st.region_lo, w.st.region_hi, n_sites, n_profiles,
                                    w.st.T)
            : make_ansatz(w.st.grid, w.st.region_lo, w.st.region_hi, n_sites, n_profiles, w.st.T);
    std::vector<SigmaMinSeries> series;
    series.push_back(spectral_control_diagnostic(w.spectrum, w.basis, w.sys, ansatz, k_max));
    if (contrast && w.st.delta > 0.0) {
        DampingSpectrum und = classify(0.0, w.basis.lambdas);
        series.push_back(spectral_control_diagnostic(und, w.basis, w.sys, ansatz, k_max));
    }
    export_sigma_csv(series, (out / "sigma_min.csv").string());

    std::ofstream rf(out / "report.txt");
    char buf[160];
    for (const auto& s : series) {
        double first = s.sigma_min[std::min<std::size_t>(4, s.sigma_min.size() - 1)];
        double last = s.sigma_min.back();
        std::snprintf(buf, sizeof buf, "delta: %g sigma_min(5): %.6g sigma_min(%d): %.6g decay: %.6g\n",
                      s.delta, first, s.k.back(), last, first / std::max(last, 1e-300));
        rf << buf;
    }
    if (w.st.delta > 0.0) {
        std::snprintf(buf, sizeof buf, "exponent_accumulation_point: %.6g\n", -1.0 / w.st.delta);
        rf << buf;
    }
    return exit_ok;
}

int run_uc(const Scenario& sc, const std::filesystem::path& out)
{
    Workspace w = build_workspace(sc);
    int M = sc.integer("experiment.M_modes", std::min(10, w.st.m));
    double tol = sc.num("experiment.tol", 1e-10);

    std::vector<std::pair<double, double>> windows;
    std::istringstream is(sc.str("experiment.windows", ""));
    std::string tok;
    while (std::getline(is, tok, ',')) {
        auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw parse_error("uc windows: expected lo:hi pairs");
        windows.emplace_back(std::strtod(tok.substr(0, colon).c_str(), nullptr),
                             std::strtod(tok.substr(colon + 1).c_str(), nullptr));
    }
    if (windows.empty()) {
        windows.emplace_back(w.st.grid.b, w.st.grid.b + 0.25 * (w.st.grid.b - w.st.grid.a));
        windows.emplace_back(w.st.grid.a - 0.25 * (w.st.grid.b - w.st.grid.a), w.st.grid.a);
    }

    Eigen::MatrixXd table = flux_table(w.basis, w.sys);
    std::ofstream f(out / "gram.csv");
    f << "lo,hi,sigma_min,trace,full_rank\n";
    std::ofstream rf(out / "report.txt");
    bool all = true;
    for (auto [lo, hi] : windows) {
        auto rep = unique_continuation_test(lo, hi, table, w.st.grid, M, tol);
        put_row(f, {lo, hi, rep.sigma_min, rep.trace, rep.full_rank ? 1.0 : 0.0});
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "window [%g, %g]: sigma_min %.6g trace %.6g cells %d verdict %s\n", lo, hi,
                      rep.sigma_min, rep.trace, rep.cells,
                      rep.full_rank ? "UC holds at this resolution" : "RANK DEFICIENT");
        rf << buf;
        all = all && rep.full_rank;
    }
    rf << "all_windows_full_rank: " << (all ? "yes" : "no") << "\n";
    return all ? exit_ok : exit_numerical;
}

int run_verify(const Scenario& sc, const std::filesystem::path& out, unsigned long long seed)
{
    Workspace w = build_workspace(sc);
    std::ofstream rf(out / "report.txt");
    bool all = true;
    auto check = [&](const std::string& name, bool ok, double value) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: %s (%.6g)\n", name.c_str(), ok ? "PASS" : "FAIL", value);
        rf << buf;
        all = all && ok;
    };

    // eigen residuals and orthonormality
    double worst_res = 0.0, worst_orth = 0.0;
    for (int n = 0; n < w.basis.m; ++n) {
        Eigen::VectorXd r =
            w.sys.K * w.basis.modes.col(n) - w.basis.lambdas(n) * (w.sys.M * w.basis.modes.col(n));
        worst_res = std::max(worst_res, r.norm() / (w.basis.lambdas(n) *
                                                    (w.sys.M * w.basis.modes.col(n)).norm()));
        for (int k = 0; k <= n; ++k) {
            double mij = w.basis.modes.col(n).dot(w.sys.M * w.basis.modes.col(k));
            worst_orth = std::max(worst_orth, std::abs(mij - (n == k ? 1.0 : 0.0)));
        }
    }
    check("eigen_residual", worst_res <= 1e-8, worst_res);
    check("m_orthonormality", worst_orth <= 1e-8, worst_orth);

    // constants are harmonic for the lift
    auto one = ExteriorProfile::constant(w.st.grid, 1.0);
    auto lifted = dirichlet_lift(one, w.sys);
    double dev = (lifted.interior.array() - 1.0).abs().maxCoeff();
    check("lift_constant", dev <= 1e-3, dev);

    // flux identity on a near bump
    ExteriorProfile bump = ExteriorProfile::zero(w.st.grid);
    bump.values(w.st.grid.datum_index_b() + 3) = 1.0;
    double fid = check_flux_identity(bump, w.basis, w.sys, 0);
    check("flux_identity", fid <= 5e-2, fid);

    // modal residuals across regimes
    Eigen::VectorXd ts(25);
    for (int i = 0; i < 25; ++i)
        ts(i) = 2.0 * i / 24.0;
    double worst_ode = 0.0;
    for (const ModeRegime& r : {ModeRegime(Oscillatory{0.0, 1.3}),
                                ModeRegime(Overdamped{-0.51, -97.3}), ModeRegime(Critical{-2.0})}) {
        worst_ode = std::max(worst_ode, ode_residual(r, CoeffKind::A, ts));
        worst_ode = std::max(worst_ode, ode_residual(r, CoeffKind::B, ts));
    }
    check("modal_ode_residual", worst_ode <= 1e-10, worst_ode);

    // energy conservation at delta = 0
    DampingSpectrum und = classify(0.0, w.basis.lambdas);
    Eigen::VectorXd u0 = Eigen::VectorXd::Zero(w.st.m), u1 = Eigen::VectorXd::Zero(w.st.m);
    u0(0) = 1.0;
    if (w.st.m > 2)
        u1(2) = 0.5;
    double e0 = state_energy(solve_homogeneous(u0, u1, und, 0.0), w.basis);
    double drift = 0.0;
    for (int j = 1; j <= 100; ++j) {
        double t = 4.0 * M_PI / std::sqrt(w.basis.lambdas(0)) * j / 100.0;
        drift = std::max(drift,
                         std::abs(state_energy(solve_homogeneous(u0, u1, und, t), w.basis) - e0));
    }
    check("energy_conservation", drift / e0 <= 1e-10, drift / e0);

    // dissipativity of the generator
    bool diss = true;
    double worst_ratio = -1e300;
    for (double d : {0.0, 0.5, 2.0}) {
        auto rep = dissipativity_audit(w.basis.lambdas, d, 200, seed);
        diss = diss && rep.all_nonpositive;
        worst_ratio = std::max(worst_ratio, rep.max_ratio);
    }
    check("dissipativity", diss, worst_ratio);

    // Duhamel path against direct B'' quadrature
    ExteriorControl g;
    g.T = w.st.T;
    TimeProfile q;
    q.t0 = 0.15 * w.st.T;
    q.t1 = 0.7 * w.st.T;
    g.terms.push_back({bump, q});
    Eigen::MatrixXd P = control_pairings(g, w.basis, w.sys);
    StatePair a = solve_controlled(g, P, w.spectrum, w.basis, w.st.T);
    StatePair b = solve_controlled_reference(g, P, w.spectrum, w.basis, w.st.T);
    double dmax = (a.u_coeffs - b.u_coeffs).cwiseAbs().maxCoeff() /
                  std::max(a.u_coeffs.cwiseAbs().maxCoeff(), 1e-300);
    check("duhamel_cross_check", dmax <= 1e-6, dmax);

    // dual representation
    Eigen::VectorXd psi0(w.st.m), psi1(w.st.m);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int n = 0; n < w.st.m; ++n) {
        psi0(n) = N(rng);
        psi1(n) = N(rng);
    }
    auto coeffs = dual_exponential_coeffs(psi0, psi1, w.spectrum);
    double dualdev = 0.0;
    for (int j = 0; j <= 20; ++j) {
        double t = w.st.T * j / 20.0;
        Eigen::VectorXd rec = dual_from_coeffs(coeffs, w.spectrum, w.st.T, t);
        Eigen::VectorXd ref = solve_dual(psi0, psi1, w.spectrum, w.st.T, t).u_coeffs;
        dualdev = std::max(dualdev, (rec - ref).cwiseAbs().maxCoeff());
    }
    check("dual_representation", dualdev <= 1e-10, dualdev);

    // duality identity on the scenario control
    double dres = duality_residual(u0, u1, g, psi0, psi1, w.basis, w.sys, w.spectrum);
    check("duality_identity", dres <= 1e-6, dres);

    rf << "overall: " << (all ? "PASS" : "FAIL") << "\n";
    return all ? exit_ok : exit_numerical;
}

} // namespace

int run_scenario(const Scenario& sc, const RunOptions& opt)
{
    sc.validate();
    std::string kind = sc.str("experiment.kind", "");
    if (!opt.experiment.empty() && opt.experiment != kind)
        throw validation_error("subcommand '" + opt.experiment + "' does not match scenario experiment '" +
                               kind + "'");
#ifdef _OPENMP
    if (opt.threads > 0)
        omp_set_num_threads(opt.threads);
#endif
    std::filesystem::path out = opt.out_dir.empty() ? sc.str("output.dir", "out") : opt.out_dir;
    std::filesystem::create_directories(out);

    auto t0 = std::chrono::steady_clock::now();
    int rc = exit_generic;
    if (kind == "spectrum")
        rc = run_spectrum(sc, out);
    else if (kind == "evolve")
        rc = run_evolve(sc, out);
    else if (kind == "dual")
        rc = run_dual(sc, out);
    else if (kind == "control")
        rc = run_control(sc, out);
    else if (kind == "moments")
        rc = run_moments(sc, out);
    else if (kind == "uc")
        rc = run_uc(sc, out);
    else if (kind == "verify")
        rc = run_verify(sc, out, opt.seed);
    auto t1 = std::chrono::steady_clock::now();

    std::ofstream mf(out / "manifest.txt");
    mf << "version: " << kVersion << "\n";
    mf << "experiment: " << kind << "\n";
    mf << "seed: " << opt.seed << "\n";
    mf << "threads: " << opt.threads << "\n";
    for (const auto& [k, v] : sc.kv)
        mf << "scenario " << k << " = " << v << "\n";
    mf << "wall_time_s: " << std::chrono::duration<double>(t1 - t0).count() << "\n";
    std::time_t now = std::time(nullptr);
    char tbuf[64];
    std::strftime(tbuf, sizeof tbuf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    mf << "timestamp: " << tbuf << "\n";
    return rc;
}

} // namespace nlwave
