#ifndef NLWAVE_QUAD_HPP
#define NLWAVE_QUAD_HPP

#include <vector>

namespace nlwave::quad {

/// Gauss-Legendre rule on [-1,1]; nodes/weights cached per order.
struct GaussRule {
    std::vector<double> x, w;
};
const GaussRule& gauss(int order);

/// (y^p - x^p)/p with the p -> 0 limit log(y/x). Requires y >= x > 0,
/// or x == 0 with p > 0.
double power_diff(double y, double x, double p);

///
/// Corner moment M_{ab} = int_0^wx int_0^wy xi^a zeta^b (xi+zeta)^{-1-2s}
/// dzeta dxi. This is the building block for element pairs sharing one
/// vertex: the Duffy split along the diagonal reduces each triangle to an
/// exact power of the width times a smooth 1-D integral.
/// Requires a+b >= 1 unless s < 1/2 (a=b=0 diverges otherwise).
///
double corner_moment(int a, int b, double wx, double wy, double s);

} // namespace nlwave::quad

#endif
