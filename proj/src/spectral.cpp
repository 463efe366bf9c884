#include "nlwave/spectral.hpp"
#include "nlwave/p1form.hpp"
#include "nlwave/quad.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nlwave {

double c_ns(double s)
{
    if (!(s > 0.0 && s < 1.0))
        throw validation_error("c_ns: s must lie in (0,1)");
    return s * std::pow(2.0, 2.0 * s) * std::tgamma((2.0 * s + 1.0) / 2.0) /
           (std::sqrt(M_PI) * std::tgamma(1.0 - s));
}

namespace {

// Datum hat d as a piecewise-linear function (exterior node hats plus the
// two boundary trace hats straddling a and b).
p1::PieceFn datum_hat(const Grid1D& g, int d)
{
    const double he = g.he(), h = g.h();
    const double x = g.datum_node(d);
    if (d == g.datum_index_a())
        return p1::hat(x, he, h);
    if (d == g.datum_index_b())
        return p1::hat(x, h, he);
    return p1::hat(x, he, he);
}

p1::PieceFn interior_hat(const Grid1D& g, int i)
{
    return p1::hat(g.interior_node(i), g.h(), g.h());
}

// int of the tail weight function against the kernel at x inside Omega:
// the constant-beyond-halo profile plus its one-cell ramp, both sides.
double tail_kernel_weight(const Grid1D& g, double s, double x)
{
    const double he = g.he();
    auto one_side = [&](double dist_to_halo_end) {
        double r1 = dist_to_halo_end;
        double r2 = r1 + he;
        double far = std::pow(r2, -2.0 * s) / (2.0 * s);
        double ramp = (quad::power_diff(r2, r1, 1.0 - 2.0 * s) - r1 * quad::power_diff(r2, r1, -2.0 * s)) / he;
        return far + ramp;
    };
    return one_side(x - g.halo_left()) + one_side(g.halo_right() - x);
}

Eigen::VectorXd tail_column(const Grid1D& g, double s, double cns)
{
    const int n = g.n_interior;
    const double h = g.h();
    const auto& gq = quad::gauss(16);
    Eigen::VectorXd T(n);
    for (int i = 0; i < n; ++i) {
        double xi = g.interior_node(i);
        double acc = 0.0;
        for (int half = 0; half < 2; ++half) {
            double l = (half == 0) ? xi - h : xi;
            for (std::size_t q = 0; q < gq.x.size(); ++q) {
                double x = l + 0.5 * h * (gq.x[q] + 1.0);
                double hatv = 1.0 - std::abs(x - xi) / h;
                acc += gq.w[q] * hatv * tail_kernel_weight(g, s, x);
            }
        }
        T(i) = -cns * acc * 0.5 * h;
    }
    return T;
}

} // namespace

static StiffnessSystem assemble_impl(const Grid1D& grid, double s, bool parallel)
{
    grid.validate();
    const double cns = c_ns(s);
    const int n = grid.n_interior;
    const int nd = grid.n_datum();
    const double h = grid.h();

    StiffnessSystem sys;
    sys.grid = grid;
    sys.s = s;
    sys.cns = cns;
    sys.K.setZero(n, n);
    sys.Kc.setZero(n, nd);

    // stiffness, upper triangle entry-wise then mirrored
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
    for (int i = 0; i < n; ++i) {
        auto hi = interior_hat(grid, i);
        for (int j = i; j < n; ++j)
            sys.K(i, j) = p1::form_pairing(hi, interior_hat(grid, j), s, cns);
        for (int d = 0; d < nd; ++d)
            sys.Kc(i, d) = p1::form_pairing(hi, datum_hat(grid, d), s, cns);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
            sys.K(i, j) = sys.K(j, i);

    // quadrature self-check on sample entries (refined separated-pair rules)
    {
        int probes[] = {2, 3, 5, 17, n > 130 ? 129 : n - 1};
        for (int j : probes) {
            if (j <= 1 || j >= n)
                continue;
            double ref = p1::form_pairing(interior_hat(grid, 0), interior_hat(grid, j), s, cns, 8);
            double rel = std::abs(sys.K(0, j) - ref) / std::max(std::abs(ref), 1e-300);
            if (!(rel < 1e-7))
                throw numerical_error("assemble: quadrature not converged for element pair (0," +
                                      std::to_string(j) + "), estimated error " + std::to_string(rel));
        }
    }

    // P1 mass matrix and boundary-trace coupling
    sys.M.setZero(n, n);
    for (int i = 0; i < n; ++i) {
        sys.M(i, i) = 2.0 * h / 3.0;
        if (i + 1 < n) {
            sys.M(i, i + 1) = h / 6.0;
            sys.M(i + 1, i) = h / 6.0;
        }
    }
    sys.Mb.setZero(n, 2);
    sys.Mb(0, 0) = h / 6.0;
    sys.Mb(n - 1, 1) = h / 6.0;

    sys.tail = tail_column(grid, s, cns);

    sys.llt.compute(sys.K);
    if (sys.llt.info() != Eigen::Success)
        throw numerical_error("assemble: stiffness matrix is not positive definite");
    return sys;
}

StiffnessSystem assemble(const Grid1D& grid, double s, bool parallel)
{
    return assemble_impl(grid, s, parallel);
}

StiffnessSystem assemble_serial(const Grid1D& grid, double s)
{
    return assemble_impl(grid, s, false);
}

double StiffnessSystem::form_energy(const Eigen::VectorXd& u_int, const Eigen::VectorXd& v_int,
                                    const Eigen::VectorXd& v_datum, double v_tail) const
{
    double e = u_int.dot(K * v_int);
    if (v_datum.size() > 0)
        e += u_int.dot(Kc * v_datum);
    if (v_tail != 0.0)
        e += u_int.dot(tail) * v_tail;
    return e;
}

double StiffnessSystem::l2_omega(const Eigen::VectorXd& u_int, const Eigen::VectorXd& v_int,
                                 double v_at_a, double v_at_b) const
{
    return u_int.dot(M * v_int) + u_int.dot(Mb.col(0)) * v_at_a + u_int.dot(Mb.col(1)) * v_at_b;
}

SpectralBasis eigenpairs(const StiffnessSystem& sys, int m)
{
    const int n = sys.grid.n_interior;
    if (m < 1 || m > n)
        throw validation_error("eigenpairs: need 1 <= m <= n_interior");

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges;
    ges.compute(sys.K, sys.M, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (ges.info() != Eigen::Success)
        throw numerical_error("eigenpairs: generalized eigensolver did not converge");

    SpectralBasis basis;
    basis.grid = sys.grid;
    basis.s = sys.s;
    basis.m = m;
    basis.lambdas = ges.eigenvalues().head(m);
    basis.modes = ges.eigenvectors().leftCols(m);

    // near-degenerate clusters: re-orthonormalize in the M inner product
    for (int k = 0; k + 1 < m;) {
        int e = k + 1;
        while (e < m && std::abs(basis.lambdas(e) - basis.lambdas(e - 1)) <
                            1e-10 * std::max(1.0, std::abs(basis.lambdas(e))))
            ++e;
        if (e - k > 1) {
            for (int p = k; p < e; ++p) {
                Eigen::VectorXd v = basis.modes.col(p);
                for (int q = k; q < p; ++q)
                    v -= basis.modes.col(q) * (basis.modes.col(q).dot(sys.M * v));
                basis.modes.col(p) = v / std::sqrt(v.dot(sys.M * v));
            }
        }
        k = e;
    }

    // sign convention: first extremum from the left is positive
    for (int c = 0; c < m; ++c) {
        auto col = basis.modes.col(c);
        double maxabs = col.cwiseAbs().maxCoeff();
        int ext = -1;
        double prev = 0.0;
        for (int t = 0; t + 1 < n; ++t) {
            if ((col(t) - prev) * (col(t + 1) - col(t)) < 0.0) {
                ext = t;
                break;
            }
            prev = col(t);
        }
        if (ext < 0)
            col.cwiseAbs().maxCoeff(&ext);
        if (col(ext) < 0.0 && maxabs > 0.0)
            basis.modes.col(c) = -col;
    }

    for (int c = 0; c < m; ++c)
        if (!(basis.lambdas(c) > 0.0))
            throw numerical_error("eigenpairs: nonpositive eigenvalue " + std::to_string(basis.lambdas(c)));
    return basis;
}

double norm(const Eigen::VectorXd& coeffs, const SpectralBasis& basis, NormOrder order)
{
    if (coeffs.size() > basis.m)
        throw validation_error("norm: coefficient vector longer than the retained basis");
    double p = (order == NormOrder::plus_s) ? 1.0 : (order == NormOrder::minus_s) ? -1.0 : 0.0;
    double acc = 0.0;
    for (int i = 0; i < coeffs.size(); ++i)
        acc += std::pow(basis.lambdas(i), p) * coeffs(i) * coeffs(i);
    return std::sqrt(acc);
}

namespace {
void put(std::ostream& os, double v, bool last = false)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf << (last ? "\n" : " ");
}
} // namespace

void export_basis(const SpectralBasis& basis, std::ostream& os)
{
    put(os, basis.grid.a);
    put(os, basis.grid.b);
    put(os, basis.grid.h());
    put(os, basis.s);
    os << basis.m << "\n";
    for (int c = 0; c < basis.m; ++c) {
        put(os, basis.lambdas(c));
        for (int i = 0; i < basis.modes.rows(); ++i)
            put(os, basis.modes(i, c), i + 1 == basis.modes.rows());
    }
}

void export_basis_file(const SpectralBasis& basis, const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw validation_error("export_basis: cannot open " + path);
    export_basis(basis, f);
}

SpectralBasis import_basis(std::istream& is)
{
    double a, b, h, s;
    int m;
    if (!(is >> a >> b >> h >> s >> m))
        throw parse_error("import_basis: malformed header");
    int n = static_cast<int>(std::lround((b - a) / h)) - 1;
    if (n < 2 || m < 1)
        throw parse_error("import_basis: inconsistent header");
    SpectralBasis basis;
    basis.grid.a = a;
    basis.grid.b = b;
    basis.grid.n_interior = n;
    basis.grid.exterior_halo = 4.0 * (b - a);
    basis.grid.n_exterior = n;
    basis.s = s;
    basis.m = m;
    basis.lambdas.resize(m);
    basis.modes.resize(n, m);
    for (int c = 0; c < m; ++c) {
        if (!(is >> basis.lambdas(c)))
            throw parse_error("import_basis: truncated mode row " + std::to_string(c));
        for (int i = 0; i < n; ++i)
            if (!(is >> basis.modes(i, c)))
                throw parse_error("import_basis: truncated mode row " + std::to_string(c));
    }
    return basis;
}

SpectralBasis import_basis_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw validation_error("import_basis: cannot open " + path);
    return import_basis(f);
}

} // namespace nlwave
