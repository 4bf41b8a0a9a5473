#pragma once

// Independent numerical oracles used only by tests and the oracle suite.
// Nothing in the training path depends on this header.

#include <vector>

#include "pinn/common.hpp"

namespace pinn::oracle {

// Grid solution of viscous Burgers on [-1,1] with u(x,0) = -sin(pi x) and
// homogeneous Dirichlet ends: Crank-Nicolson diffusion, Adams-Bashforth 2
// advection, Thomas solves. Snapshots are taken at the requested times
// (rounded to the nearest step).
struct BurgersGrid {
    std::vector<double> xs;
    std::vector<double> times;
    std::vector<std::vector<double>> u;  // one row per requested time

    // Linear interpolation in x on the snapshot closest to t.
    double at(double x, double t) const;
};

BurgersGrid crank_nicolson_burgers(double nu, int nx, int nt,
                                   const std::vector<double>& snapshot_times);

}  // namespace pinn::oracle
