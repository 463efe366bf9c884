#include "nlwave/quad.hpp"
#include "nlwave/types.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <array>
#include <mutex>

namespace nlwave::quad {

namespace {

GaussRule compute_gauss(int n)
{
    // Newton iteration on Legendre P_n; standard symmetric construction.
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return r;
}

} // namespace

const GaussRule& gauss(int order)
{
    constexpr int max_order = 64;
    if (order < 1 || order > max_order)
        throw validation_error("gauss: order out of range");
    static std::array<GaussRule, max_order + 1> table;
    static std::array<std::once_flag, max_order + 1> flags;
    std::call_once(flags[order], [order] { table[order] = compute_gauss(order); });
    return table[order];
}

double power_diff(double y, double x, double p)
{
    if (x == 0.0) {
        if (p <= 0.0)
            throw numerical_error("power_diff: divergent moment (p <= 0 at x = 0)");
        return std::pow(y, p) / p;
    }
    if (p == 0.0)
        return std::log(y / x);
    // x^p * expm1(p*log(y/x))/p: stable for y ~ x and for |p| small
    return std::pow(x, p) * std::expm1(p * std::log(y / x)) / p;
}

double corner_moment(int a, int b, double wx, double wy, double s)
{
    if (a + b < 1 && s >= 0.5)
        throw numerical_error("corner_moment: divergent (a=b=0, s >= 1/2)");
    auto triangle = [&](int al, int be, double wa, double wb) {
        // {(xi,zeta): 0<=zeta<=xi*wb/wa}; zeta = xi*(wb/wa)*t with t in [0,1]
        const double c = wb / wa;
        const double p = al + be + 1 - 2.0 * s; // > 0 by the guard above
        auto f = [&](double t) { return std::pow(t, be) * std::pow(1.0 + c * t, -1.0 - 2.0 * s); };
        double err = 0.0;
        double I = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 12, 1e-14, &err);
        return std::pow(wa, p) / p * std::pow(c, be + 1) * I;
    };
    return triangle(a, b, wx, wy) + triangle(b, a, wy, wx);
}

} // namespace nlwave::quad
