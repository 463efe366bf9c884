#ifndef NLWAVE_EXTERIOR_HPP
#define NLWAVE_EXTERIOR_HPP

#include "nlwave/spectral.hpp"
#include "nlwave/types.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

namespace nlwave {

///
/// Dirichlet datum on the truncated exterior: nodal values on the datum
/// DOFs (halo nodes plus the boundary traces at a and b, see Grid1D) and a
/// constant tail value beyond the halo. A constant profile (values == tail
/// everywhere) represents the constant function on R \ Omega exactly.
///
struct ExteriorProfile {
    Eigen::VectorXd values; // size grid.n_datum()
    double tail = 0.0;

    static ExteriorProfile zero(const Grid1D& g);
    static ExteriorProfile constant(const Grid1D& g, double c);
    static ExteriorProfile from_function(const Grid1D& g, const std::function<double(double)>& f,
                                         double tail = 0.0);
    /// unit hat at datum DOF d
    static ExteriorProfile site(const Grid1D& g, int d);

    /// P1 value of the datum at an exterior point (tail beyond the halo)
    double at(const Grid1D& g, double x) const;
};

/// A function on the whole line: interior nodal values, datum values, tail.
struct FullField {
    Eigen::VectorXd interior;
    Eigen::VectorXd datum;
    double tail = 0.0;

    double trace_a(const Grid1D& g) const { return datum(g.datum_index_a()); }
    double trace_b(const Grid1D& g) const { return datum(g.datum_index_b()); }
};

/// Values of N_s phi at exterior points; source_mode records which
/// eigenfunction produced a table column, when one did.
struct FluxVector {
    Eigen::VectorXd values;
    std::optional<int> source_mode;
};

/// Discrete harmonic lift: solves K u = -(Kc g + tail column) so that the
/// lifted field equals the datum outside and is form-harmonic inside.
FullField dirichlet_lift(const ExteriorProfile& g, const StiffnessSystem& sys);

/// N_s u at the requested exterior points for a full field
/// (closed-form per-element kernel moments over Omega).
FluxVector nonlocal_normal_derivative(const FullField& u, const StiffnessSystem& sys,
                                      const Eigen::VectorXd& points);

/// N_s phi_n sampled at all exterior cell midpoints, one column per mode.
Eigen::MatrixXd flux_table(const SpectralBasis& basis, const StiffnessSystem& sys,
                           bool parallel = true);

/// Pairing <g, N_s u> over R \ Omega for u vanishing outside Omega:
/// midpoint rule on the halo cells plus the analytic tail term.
double flux_pairing_direct(const ExteriorProfile& g, const Eigen::VectorXd& u_interior,
                           const StiffnessSystem& sys);

/// Same pairing for an eigenmode through the lift route:
/// -lambda_n (phi_n, U_g)_{L2(Omega)} for the already lifted datum.
double flux_pairing_lifted(const SpectralBasis& basis, int mode, const StiffnessSystem& sys,
                           const FullField& lifted);

/// |F(u,v) - (volume + flux)| / max(1, |F(u,v)|) for u in the span of the
/// retained modes (modal coefficients) and v a full field.
double check_integration_by_parts(const Eigen::VectorXd& u_modal, const SpectralBasis& basis,
                                  const FullField& v, const StiffnessSystem& sys);

/// |<g, N_s phi_n> + lambda_n (phi_n, U_g)| / (1 + lambda_n |(phi_n, U_g)|)
double check_flux_identity(const ExteriorProfile& g, const SpectralBasis& basis,
                           const StiffnessSystem& sys, int mode);

/// Flux tables exported as CSV: columns x, mode, value.
void export_flux_csv(const Eigen::MatrixXd& table, const Grid1D& grid, const std::string& path);

} // namespace nlwave

#endif
