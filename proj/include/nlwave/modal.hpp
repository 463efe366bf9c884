#ifndef NLWAVE_MODAL_HPP
#define NLWAVE_MODAL_HPP

#include "nlwave/types.hpp"

#include <Eigen/Dense>

#include <string>
#include <variant>
#include <vector>

namespace nlwave {

/// delta^2 lambda^2 - 4 lambda < 0: complex root pair alpha +- i beta
struct Oscillatory {
    double alpha; // -delta*lambda/2, <= 0
    double beta;  // sqrt(-D)/2, > 0
};

/// discriminant > 0: two real negative roots
struct Overdamped {
    double lambda_plus;  // larger root
    double lambda_minus; // smaller root
};

/// discriminant == 0 within tolerance: double root -delta*lambda/2
struct Critical {
    double root;
};

using ModeRegime = std::variant<Oscillatory, Overdamped, Critical>;

struct DampingSpectrum {
    double delta = 0.0;
    std::vector<ModeRegime> regimes;
    int n0 = 0; // oscillatory block length (all modes when delta == 0)
};

/// Regime classification by the sign of D_n = delta^2 lambda_n^2 - 4 lambda_n;
/// |D_n| <= tol * lambda_n^2 counts as critical.
DampingSpectrum classify(double delta, const Eigen::VectorXd& lambdas, double tol = 1e-12);

/// Characteristic quantities recovered from a regime: the roots have
/// product lambda and sum -delta*lambda.
double regime_lambda(const ModeRegime& r);
double regime_delta_lambda(const ModeRegime& r);

// Coefficient functions of the homogeneous solution, per branch, with
// analytic derivatives. A(0)=1, A'(0)=0, B(0)=0, B'(0)=1. Overdamped
// branches use the expm1 form: exponentials are differenced as
// e^{l+ t}(expm1((l- - l+)t)) to avoid cancellation for small t.
double coeff_A(const ModeRegime& r, double t);
double coeff_dA(const ModeRegime& r, double t);
double coeff_B(const ModeRegime& r, double t);
double coeff_dB(const ModeRegime& r, double t);
double coeff_d2B(const ModeRegime& r, double t);

/// dual-side coefficients: C = A and D = -B
double coeff_C(const ModeRegime& r, double t);
double coeff_D(const ModeRegime& r, double t);
double coeff_dD(const ModeRegime& r, double t);

/// max over samples of |f'' + lambda f + delta lambda f'| / (lambda max|f|)
enum class CoeffKind { A, B };
double ode_residual(const ModeRegime& r, CoeffKind f, const Eigen::VectorXd& t_samples);

///
/// Empirical audit of the uniform coefficient bounds on an (n,t) lattice.
/// For each family it records the per-mode maximum, the global maximum,
/// and the least-squares slope of max vs n over the overdamped block.
///
struct BoundFamily {
    std::string name;
    Eigen::VectorXd per_mode_max;
    double global_max = 0.0;
    double trend_slope = 0.0; // LS slope of per-mode max vs n for n > N_0
    bool bounded_claim = true; // false for the two members that grow like sqrt(lambda)
};

struct BoundAuditReport {
    std::vector<BoundFamily> families;
    double lamB_case_bound = 0.0;   // case-analysis bound for |lambda B| (delta > 0)
    double sqrtlamB_delta0 = 0.0;   // max |sqrt(lambda) B| (the exact <= 1 family at delta = 0)
    const BoundFamily& family(const std::string& name) const;
};

BoundAuditReport bound_audit(const DampingSpectrum& spectrum, const Eigen::VectorXd& lambdas,
                             double T, int n_t);

/// Coefficient traces as CSV: columns n, t, A, B, Bp, Bpp, regime.
void export_coeff_csv(const DampingSpectrum& spectrum, double T, int n_t, const std::string& path);

} // namespace nlwave

#endif
