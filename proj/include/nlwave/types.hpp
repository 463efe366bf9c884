#ifndef NLWAVE_TYPES_HPP
#define NLWAVE_TYPES_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace nlwave {

/// Scenario/argument validation failures (bad ranges, malformed inputs).
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failures (solver breakdown, quadrature non-convergence).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Violations of an operation's input contract (e.g. a control profile
/// that does not vanish to the required order).
struct contract_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scenario-file syntax errors.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

///
/// Uniform 1-D grid for the interval Omega = (a,b) plus a truncated
/// exterior collar of length `exterior_halo` on each side.
///
/// Interior nodes are strictly inside (a,b); exterior nodes strictly
/// outside [a,b]. The Dirichlet datum space additionally carries the two
/// boundary trace values at a and b (the innermost collar DOFs), so the
/// datum vector has 2*(n_exterior+1) entries ordered ascending by
/// coordinate: halo-left nodes, a, b, halo-right nodes.
///
struct Grid1D {
    double a = -1.0;
    double b = 1.0;
    int n_interior = 128;
    double exterior_halo = 8.0;
    int n_exterior = 128;

    void validate() const;

    double h() const { return (b - a) / (n_interior + 1); }
    double he() const { return exterior_halo / n_exterior; }

    // interior nodes x_i, i in [0, n_interior)
    double interior_node(int i) const { return a + (i + 1) * h(); }
    // interior elements E_k = [elem_left(k), elem_left(k)+h], k in [0, n_interior]
    int n_elements() const { return n_interior + 1; }
    double elem_left(int k) const { return a + k * h(); }

    // Dirichlet datum DOFs (exterior nodes plus the two boundary traces)
    int n_datum() const { return 2 * (n_exterior + 1); }
    int datum_index_a() const { return n_exterior; }
    int datum_index_b() const { return n_exterior + 1; }
    double datum_node(int d) const;

    // exterior cells for midpoint rules, c in [0, 2*n_exterior), ascending
    int n_exterior_cells() const { return 2 * n_exterior; }
    double exterior_cell_left(int c) const;
    double exterior_cell_mid(int c) const { return exterior_cell_left(c) + 0.5 * he(); }

    // ends of the truncated collar; the analytic tail lives beyond these
    double halo_left() const { return a - exterior_halo; }
    double halo_right() const { return b + exterior_halo; }
};

} // namespace nlwave

#endif
