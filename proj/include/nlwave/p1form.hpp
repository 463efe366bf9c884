#ifndef NLWAVE_P1FORM_HPP
#define NLWAVE_P1FORM_HPP

#include <array>

namespace nlwave::p1 {

/// One linear piece of a continuous piecewise-linear function:
/// values vl at l and vr at r, zero outside unless adjacent pieces say
/// otherwise.
struct Piece {
    double l, r, vl, vr;
    double slope() const { return (vr - vl) / (r - l); }
    double at(double x) const { return vl + slope() * (x - l); }
};

/// A compactly supported piecewise-linear function with a small number of
/// pieces (hats have two, merged entry supports at most six).
struct PieceFn {
    int n = 0;
    std::array<Piece, 8> p{};
    void add(double l, double r, double vl, double vr)
    {
        p[n++] = Piece{l, r, vl, vr};
    }
    double hull_l() const { return p[0].l; }
    double hull_r() const { return p[n - 1].r; }
};

PieceFn hat(double center, double wl, double wr);

///
/// Full-line bilinear form of the kernel |x-y|^{-1-2s} for two compactly
/// supported piecewise-linear functions:
///
///   F(u,v) = (cns/2) * II (u(x)-u(y))(v(x)-v(y)) |x-y|^{-1-2s} dy dx.
///
/// Disjoint supports reduce to product integrals; overlapping supports are
/// split into element pairs (same / vertex-sharing / separated) plus the
/// exact complement mass term. Same-element and vertex pairs are evaluated
/// through the substitution that removes the singularity (closed form /
/// corner moments); separated pairs by tensor Gauss rules graded by gap.
///
/// `refine` bumps the Gauss orders of the separated-pair rules; assembly
/// uses it to estimate its own quadrature error on sample entries.
double form_pairing(const PieceFn& u, const PieceFn& v, double s, double cns, int refine = 0);

/// Product integral  II u(x) v(y) |x-y|^{-1-2s} dy dx  for u, v supported
/// on intervals that are disjoint or share a single endpoint. If they
/// share an endpoint, both functions must vanish there unless s < 1/2.
double product_pairing(const PieceFn& u, const PieceFn& v, double s, int refine = 0);

/// Exact integral of a linear-times-linear product against
/// |x - x0|^{-2s} over one interval [l,r] that has x0 <= l or x0 >= r
/// (x0 == endpoint allowed when the product vanishes there).
double singular_mass(const Piece& u, const Piece& v, double x0, double s);

/// int_elem u(y) |x-y|^{-1-2s} dy for x outside [l,r], closed form.
double kernel_moment_linear(const Piece& u, double x, double s);

/// int_l^r |x-y|^{-1-2s} dy for x outside [l,r], closed form.
double kernel_mass(double l, double r, double x, double s);

} // namespace nlwave::p1

#endif
