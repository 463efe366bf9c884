// Benchmark of the OpenMP kernels against the serial reference.
#include "nlwave/exterior.hpp"
#include "nlwave/spectral.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>

using namespace nlwave;
namespace chrono = std::chrono;

namespace {
double seconds_since(chrono::steady_clock::time_point t0)
{
    return chrono::duration<double>(chrono::steady_clock::now() - t0).count();
}
} // namespace

int main(int argc, char** argv)
{
    int n = (argc > 1) ? std::atoi(argv[1]) : 256;
    double s = (argc > 2) ? std::atof(argv[2]) : 0.5;
    Grid1D g;
    g.n_interior = n;
    g.n_exterior = n;
    g.exterior_halo = 8.0;

    std::printf("assembly n=%d s=%g\n", n, s);
    auto t0 = chrono::steady_clock::now();
    auto serial = assemble_serial(g, s);
    double ts = seconds_since(t0);
    std::printf("  serial   %8.3f s\n", ts);

    t0 = chrono::steady_clock::now();
    auto par = assemble(g, s, true);
    double tp = seconds_since(t0);
    std::printf("  openmp   %8.3f s   speedup %.2fx\n", tp, ts / tp);

    double dev = (par.K - serial.K).cwiseAbs().maxCoeff();
    std::printf("  max |K_par - K_serial| = %g\n", dev);

    auto basis = eigenpairs(par, std::min(16, n));
    std::printf("flux table (%d cells x %d modes)\n", g.n_exterior_cells(), basis.m);
    t0 = chrono::steady_clock::now();
    auto fs = flux_table(basis, par, false);
    double tfs = seconds_since(t0);
    std::printf("  serial   %8.3f s\n", tfs);
    t0 = chrono::steady_clock::now();
    auto fp = flux_table(basis, par, true);
    double tfp = seconds_since(t0);
    std::printf("  openmp   %8.3f s   speedup %.2fx\n", tfp, tfs / tfp);
    std::printf("  max |flux_par - flux_serial| = %g\n", (fp - fs).cwiseAbs().maxCoeff());
    return 0;
}
