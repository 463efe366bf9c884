#include "nlwave/types.hpp"

#include <cmath>

namespace nlwave {

void Grid1D::validate() const
{
    if (!(b > a))
        throw validation_error("Grid1D: requires b > a");
    if (n_interior < 2)
        throw validation_error("Grid1D: requires n_interior >= 2");
    if (!(exterior_halo > 0.0))
        throw validation_error("Grid1D: requires exterior_halo > 0");
    if (n_exterior < 1)
        throw validation_error("Grid1D: requires n_exterior >= 1");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(exterior_halo))
        throw validation_error("Grid1D: non-finite geometry");
}

double Grid1D::datum_node(int d) const
{
    if (d < 0 || d >= n_datum())
        throw validation_error("Grid1D: datum index out of range");
    if (d < n_exterior)
        return a - (n_exterior - d) * he();
    if (d == datum_index_a())
        return a;
    if (d == datum_index_b())
        return b;
    return b + (d - datum_index_b()) * he();
}

double Grid1D::exterior_cell_left(int c) const
{
    if (c < 0 || c >= n_exterior_cells())
        throw validation_error("Grid1D: exterior cell index out of range");
    if (c < n_exterior)
        return a - (n_exterior - c) * he();
    return b + (c - n_exterior) * he();
}

} // namespace nlwave
