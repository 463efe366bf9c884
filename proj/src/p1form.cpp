#include "nlwave/p1form.hpp"
#include "nlwave/quad.hpp"
#include "nlwave/types.hpp"

#include <algorithm>
#include <cmath>

namespace nlwave::p1 {

namespace {

int far_order(double gap, double wu, double wv, int refine)
{
    double q = gap / std::max(wu, wv);
    int n;
    if (q <= 1.0)
        n = 24;
    else if (q <= 2.0)
        n = 20;
    else if (q <= 4.0)
        n = 14;
    else if (q <= 10.0)
        n = 10;
    else if (q <= 40.0)
        n = 6;
    else
        n = 4;
    return n + refine;
}

struct MergedPiece {
    double l, r, ul, ur, vl, vr;
    double uslope() const { return (ur - ul) / (r - l); }
    double vslope() const { return (vr - vl) / (r - l); }
};

double eval(const PieceFn& f, double x)
{
    // Snap to stored endpoint values: merged breakpoints may differ from the
    // piece endpoints by one ulp, and hull-endpoint values must stay exact
    // zeros for the singular mass terms.
    for (int i = 0; i < f.n; ++i) {
        const Piece& p = f.p[i];
        double tol = 1e-9 * (p.r - p.l);
        if (x < p.l - tol || x > p.r + tol)
            continue;
        if (std::abs(x - p.l) <= tol)
            return p.vl;
        if (std::abs(x - p.r) <= tol)
            return p.vr;
        return p.at(x);
    }
    return 0.0;
}

// Breakpoint merge of two piecewise-linear functions over the union hull.
// Both are linear on every merged subinterval.
int merge(const PieceFn& u, const PieceFn& v, std::array<MergedPiece, 16>& out)
{
    std::array<double, 18> bp{};
    int nb = 0;
    for (int i = 0; i < u.n; ++i) {
        bp[nb++] = u.p[i].l;
        bp[nb++] = u.p[i].r;
    }
    for (int i = 0; i < v.n; ++i) {
        bp[nb++] = v.p[i].l;
        bp[nb++] = v.p[i].r;
    }
    std::sort(bp.begin(), bp.begin() + nb);
    nb = static_cast<int>(std::unique(bp.begin(), bp.begin() + nb,
                                      [](double x, double y) { return std::abs(x - y) < 1e-14 * (1.0 + std::abs(x)); }) -
                          bp.begin());
    int m = 0;
    for (int i = 0; i + 1 < nb; ++i) {
        double l = bp[i], r = bp[i + 1];
        out[m++] = MergedPiece{l, r, eval(u, l), eval(u, r), eval(v, l), eval(v, r)};
    }
    return m;
}

// int_e int_f (u(x)-u(y))(v(x)-v(y)) |x-y|^{-1-2s} dy dx for separated
// intervals e (left) and f (right), u,v linear on both.
double far_form(const MergedPiece& e, const MergedPiece& f, double s, int refine)
{
    const double we = e.r - e.l, wf = f.r - f.l;
    const auto& gx = quad::gauss(far_order(f.l - e.r, we, wf, refine));
    const double ex = -1.0 - 2.0 * s;
    double total = 0.0;
    for (std::size_t i = 0; i < gx.x.size(); ++i) {
        double x = e.l + 0.5 * we * (gx.x[i] + 1.0);
        double ux = e.ul + e.uslope() * (x - e.l);
        double vx = e.vl + e.vslope() * (x - e.l);
        double inner = 0.0;
        for (std::size_t j = 0; j < gx.x.size(); ++j) {
            double y = f.l + 0.5 * wf * (gx.x[j] + 1.0);
            double uy = f.ul + f.uslope() * (y - f.l);
            double vy = f.vl + f.vslope() * (y - f.l);
            inner += gx.w[j] * (ux - uy) * (vx - vy) * std::pow(y - x, ex);
        }
        total += gx.w[i] * inner;
    }
    return total * 0.25 * we * wf;
}

// Same with e.r == f.l: corner-moment expansion in distances from the
// shared vertex.
double adjacent_form(const MergedPiece& e, const MergedPiece& f, double s)
{
    const double we = e.r - e.l, wf = f.r - f.l;
    const double se = e.uslope(), te = e.vslope();
    const double sf = f.uslope(), tf = f.vslope();
    const double ju = e.ur - f.ul; // jump of u at the vertex (0 for continuous u)
    const double jv = e.vr - f.vl;
    double total = 0.0;
    auto term = [&](double coeff, int a, int b) {
        if (coeff != 0.0)
            total += coeff * quad::corner_moment(a, b, we, wf, s);
    };
    term(ju * jv, 0, 0);
    term(-(ju * te + jv * se), 1, 0);
    term(-(ju * tf + jv * sf), 0, 1);
    term(se * te, 2, 0);
    term(se * tf + sf * te, 1, 1);
    term(sf * tf, 0, 2);
    return total;
}

double same_form(const MergedPiece& e, double s)
{
    double w = e.r - e.l;
    return e.uslope() * e.vslope() * 2.0 * std::pow(w, 3.0 - 2.0 * s) /
           ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
}

// int_e int_f u(x) v(y) |x-y|^{-1-2s}, e and f disjoint with gap > 0.
double far_product(const Piece& e, const Piece& f, double s, int refine)
{
    const Piece& pl = (e.l <= f.l) ? e : f;
    const Piece& pr = (e.l <= f.l) ? f : e;
    const double wl = pl.r - pl.l, wr = pr.r - pr.l;
    const auto& g = quad::gauss(far_order(pr.l - pl.r, wl, wr, refine));
    const double ex = -1.0 - 2.0 * s;
    double total = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        double x = pl.l + 0.5 * wl * (g.x[i] + 1.0);
        double inner = 0.0;
        for (std::size_t j = 0; j < g.x.size(); ++j) {
            double y = pr.l + 0.5 * wr * (g.x[j] + 1.0);
            inner += g.w[j] * pr.at(y) * std::pow(y - x, ex);
        }
        total += g.w[i] * pl.at(x) * inner;
    }
    return total * 0.25 * wl * wr;
}

// Same with the two intervals sharing one endpoint.
double corner_product(const Piece& e, const Piece& f, double s)
{
    const Piece& pl = (e.l <= f.l) ? e : f;
    const Piece& pr = (e.l <= f.l) ? f : e;
    const double wl = pl.r - pl.l, wr = pr.r - pr.l;
    const double uc = pl.vr, au = (pl.vl - pl.vr) / wl; // value/growth away from corner
    const double vc = pr.vl, bv = (pr.vr - pr.vl) / wr;
    double total = 0.0;
    auto term = [&](double coeff, int a, int b) {
        if (coeff != 0.0)
            total += coeff * quad::corner_moment(a, b, wl, wr, s);
    };
    term(uc * vc, 0, 0);
    term(uc * bv, 0, 1);
    term(vc * au, 1, 0);
    term(au * bv, 1, 1);
    return total;
}

} // namespace

PieceFn hat(double center, double wl, double wr)
{
    PieceFn f;
    f.add(center - wl, center, 0.0, 1.0);
    f.add(center, center + wr, 1.0, 0.0);
    return f;
}

double singular_mass(const Piece& u, const Piece& v, double x0, double s)
{
    double d0, d1, su, tv, A, B;
    if (x0 <= u.l + 1e-15 * (1.0 + std::abs(u.l))) {
        d0 = u.l - x0;
        d1 = u.r - x0;
        su = u.slope();
        tv = v.slope();
        A = u.vl - su * d0;
        B = v.vl - tv * d0;
    } else {
        d0 = x0 - u.r;
        d1 = x0 - u.l;
        su = -u.slope();
        tv = -v.slope();
        A = u.vr - su * d0;
        B = v.vr - tv * d0;
    }
    if (d0 < 0.0)
        d0 = 0.0;
    double total = 0.0;
    const double c0 = A * B, c1 = A * tv + B * su, c2 = su * tv;
    if (c0 != 0.0)
        total += c0 * quad::power_diff(d1, d0, 1.0 - 2.0 * s);
    if (c1 != 0.0)
        total += c1 * quad::power_diff(d1, d0, 2.0 - 2.0 * s);
    if (c2 != 0.0)
        total += c2 * quad::power_diff(d1, d0, 3.0 - 2.0 * s);
    return total;
}

double kernel_moment_linear(const Piece& u, double x, double s)
{
    double t1, t2, A, su;
    if (x >= u.r) {
        t1 = x - u.r;
        t2 = x - u.l;
        A = u.vl + u.slope() * (x - u.l);
        su = -u.slope();
    } else if (x <= u.l) {
        t1 = u.l - x;
        t2 = u.r - x;
        A = u.vl + u.slope() * (x - u.l);
        su = u.slope();
    } else {
        throw validation_error("kernel_moment_linear: evaluation point inside the element");
    }
    if (t1 <= 0.0)
        throw validation_error("kernel_moment_linear: evaluation point touches the element");
    return A * quad::power_diff(t2, t1, -2.0 * s) + su * quad::power_diff(t2, t1, 1.0 - 2.0 * s);
}

double kernel_mass(double l, double r, double x, double s)
{
    double t1 = (x >= r) ? x - r : l - x;
    double t2 = (x >= r) ? x - l : r - x;
    if (t1 <= 0.0)
        throw validation_error("kernel_mass: evaluation point touches the interval");
    return quad::power_diff(t2, t1, -2.0 * s);
}

double product_pairing(const PieceFn& u, const PieceFn& v, double s, int refine)
{
    double total = 0.0;
    for (int i = 0; i < u.n; ++i) {
        for (int j = 0; j < v.n; ++j) {
            const Piece& pu = u.p[i];
            const Piece& pv = v.p[j];
            double gap = std::max(pu.l, pv.l) - std::min(pu.r, pv.r);
            double tol = 1e-13 * (1.0 + std::abs(pu.l) + std::abs(pv.l));
            if (gap < -tol)
                throw validation_error("product_pairing: overlapping supports");
            if (gap <= tol)
                total += corner_product(pu, pv, s);
            else
                total += far_product(pu, pv, s, refine);
        }
    }
    return total;
}

double form_pairing(const PieceFn& u, const PieceFn& v, double s, double cns, int refine)
{
    double tol = 1e-13 * (1.0 + std::abs(u.hull_l()) + std::abs(v.hull_l()));
    bool disjoint = (u.hull_r() <= v.hull_l() + tol) || (v.hull_r() <= u.hull_l() + tol);
    if (disjoint)
        return -cns * product_pairing(u, v, s, refine);

    std::array<MergedPiece, 16> mp;
    int m = merge(u, v, mp);
    double pairs = 0.0;
    for (int i = 0; i < m; ++i) {
        pairs += same_form(mp[i], s);
        for (int j = i + 1; j < m; ++j) {
            // pieces are ordered; j == i+1 shares a vertex with i
            double contrib = (j == i + 1) ? adjacent_form(mp[i], mp[j], s) : far_form(mp[i], mp[j], s, refine);
            pairs += 2.0 * contrib;
        }
    }
    const double L = mp[0].l, R = mp[m - 1].r;
    double mass = 0.0;
    for (int i = 0; i < m; ++i) {
        Piece pu{mp[i].l, mp[i].r, mp[i].ul, mp[i].ur};
        Piece pv{mp[i].l, mp[i].r, mp[i].vl, mp[i].vr};
        mass += singular_mass(pu, pv, L, s) + singular_mass(pu, pv, R, s);
    }
    return 0.5 * cns * (pairs + mass / s); // 2 * mass / (2s)
}

} // namespace nlwave::p1
