#ifndef NLWAVE_CONTROL_HPP
#define NLWAVE_CONTROL_HPP

#include "nlwave/evolution.hpp"

#include <complex>
#include <string>
#include <vector>

namespace nlwave {

///
/// Finite-dimensional control ansatz: hat profiles at exterior sites inside
/// the control region, times a family of temporal bumps. Element (i,j) of
/// the coefficient matrix scales site i with profile j.
///
struct ControlAnsatz {
    std::vector<int> sites;               // datum DOF indices inside the region
    std::vector<TimeProfile> profiles;    // unit-amplitude temporal bumps
    Eigen::MatrixXd coefficients;         // sites x profiles
    double T = 1.0;

    int n_columns() const { return static_cast<int>(sites.size() * profiles.size()); }
    ExteriorControl to_control(const Grid1D& g) const;
    /// single element (site i, profile j) with unit coefficient
    ExteriorControl element(const Grid1D& g, int i, int j) const;
};

/// Evenly spaced sites inside (lo,hi) and `n_profiles` translated
/// equal-width bumps on (0,T). Throws if the region intersects [a,b] or
/// holds fewer datum nodes than sites.
ControlAnsatz make_ansatz(const Grid1D& g, double lo, double hi, int n_sites, int n_profiles,
                          double T);

/// Sites split between (lo,hi) and its mirror across the domain center;
/// a two-sided region resolves mode parity, which a one-sided one cannot.
ControlAnsatz make_ansatz_two_sided(const Grid1D& g, double lo, double hi, int n_sites,
                                    int n_profiles, double T);

/// Moment system of the steering equations: one exponent per row, the
/// observation matrix against the ansatz columns, and the data side
/// u_{1,n} + mu u_{0,n} + delta lambda_n u_{0,n}.
struct MomentSystem {
    std::vector<std::complex<double>> exponents; // per row
    Eigen::MatrixXd observation_rows;            // rows x (sites*profiles)
    Eigen::VectorXd rhs;
    std::vector<int> row_mode;    // mode index of each row
    std::vector<bool> confluent;  // critical-pair rows
    /// rows are stored scaled by e^{mu t_ref} (t_ref = latest support end)
    /// so that e^{-mu(t - t_ref)} never overflows for strongly decaying
    /// exponents; a pure per-row scaling, irrelevant after normalization
    double t_ref = 0.0;
};

MomentSystem moment_matrix(const DampingSpectrum& spectrum, const SpectralBasis& basis,
                           const StiffnessSystem& sys, const ControlAnsatz& ansatz, int M_modes,
                           const Eigen::VectorXd& u0 = Eigen::VectorXd(),
                           const Eigen::VectorXd& u1 = Eigen::VectorXd());

/// F(z) = int_0^T (int (g + delta g_t) N_s phi_n) e^{izt} dt for a single
/// separable control term, by direct quadrature.
std::complex<double> moment_transform(const TimeProfile& q, double pairing, double delta,
                                      std::complex<double> z);

/// Tables behind the input-to-final-state map: site pairings and the
/// per-profile modal time integrals at t = T.
struct ReachabilityTables {
    Eigen::MatrixXd P;  // m x sites: <hat_site, N_s phi_n>
    Eigen::MatrixXd I;  // m x profiles: int q'' B_n(T-tau)
    Eigen::MatrixXd dI; // m x profiles: int q'' B_n'(T-tau)
};

ReachabilityTables reachability_tables(const ControlAnsatz& ansatz, const SpectralBasis& basis,
                                       const StiffnessSystem& sys, const DampingSpectrum& spectrum);

/// Input-to-final-state map in modal coordinates: 2m x n_columns, u-rows
/// weighted 1 and u_t-rows lambda^{-1/2} (the L2 x W^{-s,2} metric).
Eigen::MatrixXd reachability_map(const ControlAnsatz& ansatz, const SpectralBasis& basis,
                                 const StiffnessSystem& sys, const DampingSpectrum& spectrum);

struct ApproximateControlResult {
    Eigen::MatrixXd coefficients; // sites x profiles
    double achieved_error = 0.0;  // ||u(T)-target_u||_0 + ||u_t(T)-target_ut||_{-s}
    double residual_u = 0.0;
    double residual_ut = 0.0;
};

/// Regularized least squares min ||R c - target||_metric^2 + eps ||c||^2.
ApproximateControlResult approximate_control(const Eigen::VectorXd& target_u,
                                             const Eigen::VectorXd& target_ut,
                                             const ControlAnsatz& ansatz,
                                             const Eigen::MatrixXd& map,
                                             const SpectralBasis& basis, double eps_reg);

/// Relative gap of the duality identity between (u0,u1,g) and (psi0,psi1).
double duality_residual(const Eigen::VectorXd& u0, const Eigen::VectorXd& u1,
                        const ExteriorControl& g, const Eigen::VectorXd& psi0,
                        const Eigen::VectorXd& psi1, const SpectralBasis& basis,
                        const StiffnessSystem& sys, const DampingSpectrum& spectrum);

struct SigmaMinSeries {
    double delta = 0.0;
    std::vector<int> k;
    std::vector<double> sigma_min; // rows normalized to unit length first
};

/// sigma_min of the moment matrix restricted to the first k exponent pairs.
SigmaMinSeries spectral_control_diagnostic(const DampingSpectrum& spectrum,
                                           const SpectralBasis& basis, const StiffnessSystem& sys,
                                           const ControlAnsatz& ansatz, int k_max);

struct DualCoeff {
    std::complex<double> a, b;
    bool confluent = false;
};

/// Exponential-pair representation of the dual series; reproduces
/// solve_dual exactly.
std::vector<DualCoeff> dual_exponential_coeffs(const Eigen::VectorXd& psi0,
                                               const Eigen::VectorXd& psi1,
                                               const DampingSpectrum& spectrum);

/// psi_n(t) reconstructed from the exponential representation.
Eigen::VectorXd dual_from_coeffs(const std::vector<DualCoeff>& coeffs,
                                 const DampingSpectrum& spectrum, double T, double t);

struct UniqueContinuationReport {
    double sigma_min = 0.0;
    double trace = 0.0;
    int modes = 0;
    int cells = 0;
    bool full_rank = false; // sigma_min > tol * trace / modes
};

/// Gram test of the flux traces N_s phi_n restricted to an open exterior
/// region (a union of windows, each disjoint from [a,b]), with midpoint
/// weights.
UniqueContinuationReport unique_continuation_test(const std::vector<std::pair<double, double>>& region,
                                                  const Eigen::MatrixXd& flux,
                                                  const Grid1D& grid, int M_modes,
                                                  double tol = 1e-10);
UniqueContinuationReport unique_continuation_test(double lo, double hi,
                                                  const Eigen::MatrixXd& flux,
                                                  const Grid1D& grid, int M_modes,
                                                  double tol = 1e-10);

void export_sigma_csv(const std::vector<SigmaMinSeries>& series, const std::string& path);
void export_control_error_csv(const std::vector<std::array<double, 3>>& rows,
                              const std::string& path);

} // namespace nlwave

#endif
