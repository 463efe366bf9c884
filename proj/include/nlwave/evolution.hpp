#ifndef NLWAVE_EVOLUTION_HPP
#define NLWAVE_EVOLUTION_HPP

#include "nlwave/exterior.hpp"
#include "nlwave/modal.hpp"
#include "nlwave/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nlwave {

///
/// C^2 temporal bump supported on [t0,t1], vanishing to second order at
/// both ends. "poly" is the degree-six polynomial bump (xi(1-xi))^3,
/// "cinf" the exponential bump exp(4 - 1/(xi(1-xi))); both are normalized
/// to peak value `amplitude`.
///
struct TimeProfile {
    std::string kind = "poly";
    double t0 = 0.0;
    double t1 = 1.0;
    double amplitude = 1.0;

    double value(double t) const { return deriv(0, t); }
    double d1(double t) const { return deriv(1, t); }
    double d2(double t) const { return deriv(2, t); }
    /// k-th derivative, k <= 4 (orders 3,4 of "cinf" by central differences)
    double deriv(int k, double t) const;
};

/// Exterior control as a sum of separable terms (spatial profile) x
/// (temporal bump) on a horizon [0,T].
struct ExteriorControl {
    struct Term {
        ExteriorProfile spatial;
        TimeProfile temporal;
    };
    std::vector<Term> terms;
    double T = 1.0;

    /// throws contract_error unless every temporal profile is supported
    /// strictly inside (0,T) and vanishes to the required order
    void validate() const;
    /// g(.,t) as a profile on the exterior grid
    ExteriorProfile trace_at(const Grid1D& g, double t) const;
};

/// State (u, u_t) in modal coordinates at time t.
struct StatePair {
    Eigen::VectorXd u_coeffs;
    Eigen::VectorXd ut_coeffs;
    double t = 0.0;
    std::optional<ExteriorProfile> exterior_trace;
};

/// <spatial_k, N_s phi_n> for every control term, through the harmonic
/// lift route (one lift per term); m x n_terms.
Eigen::MatrixXd control_pairings(const ExteriorControl& g, const SpectralBasis& basis,
                                 const StiffnessSystem& sys);

StatePair solve_homogeneous(const Eigen::VectorXd& u0, const Eigen::VectorXd& u1,
                            const DampingSpectrum& spectrum, double t);

/// Controlled evolution from rest: the Duhamel series with both time
/// derivatives moved onto the control profile,
///   v_n(t) = (1/lambda_n) [ int_0^t p_n''(tau) B_n(t-tau) dtau - p_n(t) ].
StatePair solve_controlled(const ExteriorControl& g, const Eigen::MatrixXd& pairings,
                           const DampingSpectrum& spectrum, const SpectralBasis& basis, double t);
StatePair solve_controlled(const ExteriorControl& g, const SpectralBasis& basis,
                           const StiffnessSystem& sys, const DampingSpectrum& spectrum, double t);

/// Direct quadrature of the B'' kernel form; cross-validation path only.
StatePair solve_controlled_reference(const ExteriorControl& g, const Eigen::MatrixXd& pairings,
                                     const DampingSpectrum& spectrum, const SpectralBasis& basis,
                                     double t);

StatePair solve_full(const Eigen::VectorXd& u0, const Eigen::VectorXd& u1, const ExteriorControl& g,
                     const Eigen::MatrixXd& pairings, const DampingSpectrum& spectrum,
                     const SpectralBasis& basis, double t);

/// Backward dual state with final data psi(T) = psi0, psi_t(T) = -psi1.
StatePair solve_dual(const Eigen::VectorXd& psi0, const Eigen::VectorXd& psi1,
                     const DampingSpectrum& spectrum, double T, double t);

/// N_s psi(.,t) on the exterior cell midpoints from a precomputed flux table.
FluxVector dual_flux(const Eigen::VectorXd& psi0, const Eigen::VectorXd& psi1,
                     const DampingSpectrum& spectrum, double T, double t,
                     const Eigen::MatrixXd& table);

/// E(t) = ||u||_{+s}^2 + ||u_t||_0^2
double state_energy(const StatePair& st, const SpectralBasis& basis);

struct DissipativityReport {
    int trials = 0;
    double max_ratio = 0.0; // max <B U, U>_H / ||U||_H^2 over trials
    bool all_nonpositive = false;
};

/// <B_delta U, U>_H <= 0 for random modal pairs, with
/// B_delta = -A_delta - I and the W_0^{s,2} x L^2 product.
DissipativityReport dissipativity_audit(const Eigen::VectorXd& lambdas, double delta, int trials,
                                        unsigned long long seed);

struct RegularityReport {
    std::vector<int> mode_counts;
    std::vector<double> ratios; // max_t LHS/RHS at each mode count
    bool trending_up = false;
};

/// Empirical check of ||d_t^m v|| <= C(||d_t^{m+2} g|| + ||d_t^m g(.,t)||)
/// over a t-lattice, at a ladder of retained mode counts.
RegularityReport regularity_audit(const ExteriorControl& g, const Eigen::MatrixXd& pairings,
                                  const DampingSpectrum& spectrum, const SpectralBasis& basis,
                                  const StiffnessSystem& sys, int m_derivative, int n_t);

/// rough series-tail size: |p_m| max over terms scaled by 1/lambda_m
double controlled_tail_estimate(const ExteriorControl& g, const Eigen::MatrixXd& pairings,
                                const SpectralBasis& basis);

/// State snapshot CSV (t, x, u, ut) and modal trace CSV (t, n, u_n, ut_n).
void export_state_csv(const std::vector<StatePair>& states, const SpectralBasis& basis,
                      const std::string& path);
void export_modal_csv(const std::vector<StatePair>& states, const std::string& path);

} // namespace nlwave

#endif
