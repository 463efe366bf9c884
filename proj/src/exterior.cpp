#include "nlwave/exterior.hpp"
#include "nlwave/p1form.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace nlwave {

namespace {

// P1-plus-tail evaluation of a datum vector at an exterior point.
double datum_at(const Grid1D& g, const Eigen::VectorXd& v, double tail, double x)
{
    const double he = g.he();
    if (x >= g.a && x <= g.b)
        throw validation_error("exterior evaluation point lies inside the closure of Omega");
    if (x < g.a) {
        double L = g.halo_left();
        if (x <= L - he)
            return tail;
        if (x < L) // ramp from the tail onto the outermost node
            return tail + (v(0) - tail) * (x - (L - he)) / he;
        int k = static_cast<int>(std::floor((x - L) / he));
        if (k > g.n_exterior - 1)
            k = g.n_exterior - 1;
        double xl = L + k * he;
        double vl = v(k);
        double vr = (k + 1 == g.n_exterior) ? v(g.datum_index_a()) : v(k + 1);
        return vl + (vr - vl) * (x - xl) / he;
    }
    double R = g.halo_right();
    if (x >= R + he)
        return tail;
    if (x > R)
        return v(g.n_datum() - 1) + (tail - v(g.n_datum() - 1)) * (x - R) / he;
    int k = static_cast<int>(std::floor((x - g.b) / he));
    if (k > g.n_exterior - 1)
        k = g.n_exterior - 1;
    int dl = g.datum_index_b() + k;
    double xl = g.b + k * he;
    double vl = v(dl);
    double vr = v(dl + 1);
    return vl + (vr - vl) * (x - xl) / he;
}

// linear piece of a field restricted to Omega on element k
p1::Piece omega_piece(const Grid1D& g, const Eigen::VectorXd& interior, double ta, double tb, int k)
{
    const int n = g.n_interior;
    const double l = g.elem_left(k);
    double vl = (k == 0) ? ta : interior(k - 1);
    double vr = (k == n) ? tb : interior(k);
    return p1::Piece{l, l + g.h(), vl, vr};
}

double ns_at_point(const Grid1D& g, double s, double cns, const Eigen::VectorXd& interior,
                   double ta, double tb, double u_at_x, double x)
{
    if (x >= g.a && x <= g.b)
        throw validation_error("nonlocal_normal_derivative: point inside the closure of Omega");
    double integral = 0.0;
    for (int k = 0; k <= g.n_interior; ++k)
        integral += p1::kernel_moment_linear(omega_piece(g, interior, ta, tb, k), x, s);
    double mass = (u_at_x != 0.0) ? u_at_x * p1::kernel_mass(g.a, g.b, x, s) : 0.0;
    return cns * (mass - integral);
}

} // namespace

ExteriorProfile ExteriorProfile::zero(const Grid1D& g)
{
    ExteriorProfile p;
    p.values = Eigen::VectorXd::Zero(g.n_datum());
    return p;
}

ExteriorProfile ExteriorProfile::constant(const Grid1D& g, double c)
{
    ExteriorProfile p;
    p.values = Eigen::VectorXd::Constant(g.n_datum(), c);
    p.tail = c;
    return p;
}

ExteriorProfile ExteriorProfile::from_function(const Grid1D& g, const std::function<double(double)>& f,
                                               double tail)
{
    ExteriorProfile p;
    p.values.resize(g.n_datum());
    for (int d = 0; d < g.n_datum(); ++d)
        p.values(d) = f(g.datum_node(d));
    p.tail = tail;
    return p;
}

ExteriorProfile ExteriorProfile::site(const Grid1D& g, int d)
{
    ExteriorProfile p = zero(g);
    p.values(d) = 1.0;
    return p;
}

double ExteriorProfile::at(const Grid1D& g, double x) const
{
    return datum_at(g, values, tail, x);
}

FullField dirichlet_lift(const ExteriorProfile& g, const StiffnessSystem& sys)
{
    if (!g.values.allFinite() || !std::isfinite(g.tail))
        throw validation_error("dirichlet_lift: non-finite datum");
    Eigen::VectorXd rhs = -(sys.Kc * g.values);
    if (g.tail != 0.0)
        rhs -= g.tail * sys.tail;
    FullField f;
    f.interior = sys.llt.solve(rhs);
    f.datum = g.values;
    f.tail = g.tail;
    return f;
}

FluxVector nonlocal_normal_derivative(const FullField& u, const StiffnessSystem& sys,
                                      const Eigen::VectorXd& points)
{
    const Grid1D& g = sys.grid;
    FluxVector out;
    out.values.resize(points.size());
    for (int i = 0; i < points.size(); ++i) {
        double x = points(i);
        double ux = datum_at(g, u.datum, u.tail, x);
        out.values(i) = ns_at_point(g, sys.s, sys.cns, u.interior, u.trace_a(g), u.trace_b(g), ux, x);
    }
    return out;
}

Eigen::MatrixXd flux_table(const SpectralBasis& basis, const StiffnessSystem& sys, bool parallel)
{
    const Grid1D& g = sys.grid;
    const int nc = g.n_exterior_cells();
    Eigen::MatrixXd table(nc, basis.m);
#pragma omp parallel for schedule(static) if (parallel)
    for (int c = 0; c < nc; ++c) {
        double x = g.exterior_cell_mid(c);
        for (int m = 0; m < basis.m; ++m)
            table(c, m) = ns_at_point(g, sys.s, sys.cns, basis.modes.col(m), 0.0, 0.0, 0.0, x);
    }
    return table;
}

double flux_pairing_direct(const ExteriorProfile& g, const Eigen::VectorXd& u_interior,
                           const StiffnessSystem& sys)
{
    const Grid1D& grid = sys.grid;
    double acc = 0.0;
    for (int c = 0; c < grid.n_exterior_cells(); ++c) {
        double x = grid.exterior_cell_mid(c);
        double gx = g.at(grid, x);
        if (gx != 0.0)
            acc += grid.he() * gx * ns_at_point(grid, sys.s, sys.cns, u_interior, 0.0, 0.0, 0.0, x);
    }
    if (g.tail != 0.0)
        acc += g.tail * u_interior.dot(sys.tail);
    return acc;
}

double flux_pairing_lifted(const SpectralBasis& basis, int mode, const StiffnessSystem& sys,
                           const FullField& lifted)
{
    double inner = sys.l2_omega(basis.modes.col(mode), lifted.interior, lifted.trace_a(sys.grid),
                                lifted.trace_b(sys.grid));
    return -basis.lambdas(mode) * inner;
}

double check_integration_by_parts(const Eigen::VectorXd& u_modal, const SpectralBasis& basis,
                                  const FullField& v, const StiffnessSystem& sys)
{
    const Grid1D& g = sys.grid;
    Eigen::VectorXd u_int = basis.modes.leftCols(u_modal.size()) * u_modal;

    double form_side = sys.form_energy(u_int, v.interior, v.datum, v.tail);

    double volume = 0.0;
    for (int n = 0; n < u_modal.size(); ++n) {
        double inner = sys.l2_omega(basis.modes.col(n), v.interior, v.trace_a(g), v.trace_b(g));
        volume += basis.lambdas(n) * u_modal(n) * inner;
    }

    double flux = 0.0;
    for (int c = 0; c < g.n_exterior_cells(); ++c) {
        double x = g.exterior_cell_mid(c);
        double vx = datum_at(g, v.datum, v.tail, x);
        if (vx != 0.0)
            flux += g.he() * vx * ns_at_point(g, sys.s, sys.cns, u_int, 0.0, 0.0, 0.0, x);
    }
    if (v.tail != 0.0)
        flux += v.tail * u_int.dot(sys.tail);

    return std::abs(form_side - (volume + flux)) / std::max(1.0, std::abs(form_side));
}

double check_flux_identity(const ExteriorProfile& g, const SpectralBasis& basis,
                           const StiffnessSystem& sys, int mode)
{
    if (mode < 0 || mode >= basis.m)
        throw validation_error("check_flux_identity: mode index out of range");
    double lhs = flux_pairing_direct(g, basis.modes.col(mode), sys);
    FullField lifted = dirichlet_lift(g, sys);

    double inner = sys.l2_omega(basis.modes.col(mode), lifted.interior, lifted.trace_a(sys.grid),
                                lifted.trace_b(sys.grid));
    double lam = basis.lambdas(mode);
    return std::abs(lhs + lam * inner) / (1.0 + lam * std::abs(inner));
}

void export_flux_csv(const Eigen::MatrixXd& table, const Grid1D& grid, const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw validation_error("export_flux_csv: cannot open " + path);
    f << "x,mode,value\n";
    char buf[96];
    for (int c = 0; c < table.rows(); ++c)
        for (int m = 0; m < table.cols(); ++m) {
            std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g\n", grid.exterior_cell_mid(c), m + 1,
                          table(c, m));
            f << buf;
        }
}

} // namespace nlwave
