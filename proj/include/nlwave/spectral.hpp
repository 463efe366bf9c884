#ifndef NLWAVE_SPECTRAL_HPP
#define NLWAVE_SPECTRAL_HPP

#include "nlwave/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <iosfwd>
#include <string>

namespace nlwave {

/// Normalization constant C_{1,s} of the fractional Laplacian kernel.
double c_ns(double s);

///
/// Discretized bilinear form of the fractional Dirichlet Laplacian on a
/// Grid1D: piecewise-linear Galerkin with singularity-split quadrature.
///
/// K      : interior x interior stiffness (dense, symmetric positive definite)
/// M      : interior mass matrix
/// Mb     : interior x {a,b} mass coupling against the boundary trace hats
/// Kc     : interior x datum coupling (exterior nodes + boundary traces)
/// tail   : interior load of a unit constant beyond the truncated halo
///
struct StiffnessSystem {
    Grid1D grid;
    double s = 0.5;
    double cns = 0.0;
    Eigen::MatrixXd K;
    Eigen::MatrixXd M;
    Eigen::MatrixXd Mb;
    Eigen::MatrixXd Kc;
    Eigen::VectorXd tail;
    Eigen::LLT<Eigen::MatrixXd> llt; // factorization of K, used by the lift

    /// F(u, v) for u supported in Omega (interior nodal values) and v a
    /// full field (interior values, datum values, constant tail).
    double form_energy(const Eigen::VectorXd& u_int, const Eigen::VectorXd& v_int,
                       const Eigen::VectorXd& v_datum, double v_tail) const;

    /// L2(Omega) product of an interior-supported function against a full
    /// field (interior values + boundary traces).
    double l2_omega(const Eigen::VectorXd& u_int, const Eigen::VectorXd& v_int,
                    double v_at_a, double v_at_b) const;
};

StiffnessSystem assemble(const Grid1D& grid, double s, bool parallel = true);

/// Serial reference of the same entry-wise computation, kept for tests and
/// the benchmark; bitwise-identical to the parallel result.
StiffnessSystem assemble_serial(const Grid1D& grid, double s);

///
/// Eigenpairs (lambda_n, phi_n) of K x = lambda M x: the discrete
/// fractional Dirichlet eigenproblem. Eigenvalues ascending, modes
/// M-orthonormal, sign fixed so the first extremum from the left is
/// positive.
///
struct SpectralBasis {
    Grid1D grid;
    double s = 0.5;
    int m = 0;
    Eigen::VectorXd lambdas;   // m ascending positive eigenvalues
    Eigen::MatrixXd modes;     // n_interior x m nodal values
};

SpectralBasis eigenpairs(const StiffnessSystem& sys, int m);

enum class NormOrder { minus_s, zero, plus_s };

/// Modal norm: sqrt(sum lambda_n^p |c_n|^2) with p = -1, 0, +1 for the
/// W^{-s,2}, L^2 and W_0^{s,2} orders.
double norm(const Eigen::VectorXd& coeffs, const SpectralBasis& basis, NormOrder order);

/// Text export/import: one header line (a, b, h, s, m), then one row per
/// mode (lambda_n followed by the nodal values), 17 significant digits.
void export_basis(const SpectralBasis& basis, std::ostream& os);
void export_basis_file(const SpectralBasis& basis, const std::string& path);
SpectralBasis import_basis(std::istream& is);
SpectralBasis import_basis_file(const std::string& path);

} // namespace nlwave

#endif
