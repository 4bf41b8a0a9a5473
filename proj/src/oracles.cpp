#include "pinn/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace pinn::oracle {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Solves (diag(b) with off-diagonals a, c) u = d in place.
void thomas(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c,
            std::vector<double>& d) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

}  // namespace

double BurgersGrid::at(double x, double t) const {
    std::size_t row = 0;
    double best = 1e300;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (std::abs(times[i] - t) < best) {
            best = std::abs(times[i] - t);
            row = i;
        }
    }
    const double dx = xs[1] - xs[0];
    const double pos = (x - xs.front()) / dx;
    const auto i = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(pos))),
                            xs.size() - 2);
    const double f = pos - static_cast<double>(i);
    return (1.0 - f) * u[row][i] + f * u[row][i + 1];
}

BurgersGrid crank_nicolson_burgers(double nu, int nx, int nt,
                                   const std::vector<double>& snapshot_times) {
    const double dx = 2.0 / nx;
    const double dt = 1.0 / nt;
    BurgersGrid out;
    out.xs.resize(nx + 1);
    for (int i = 0; i <= nx; ++i) out.xs[i] = -1.0 + i * dx;

    std::vector<double> u(nx + 1), adv(nx - 1), adv_prev(nx - 1);
    for (int i = 0; i <= nx; ++i) u[i] = -std::sin(kPi * out.xs[i]);

    std::vector<int> snap_steps;
    for (double t : snapshot_times) snap_steps.push_back(static_cast<int>(std::lround(t * nt)));

    auto take_snapshots = [&](int step) {
        for (std::size_t s = 0; s < snap_steps.size(); ++s) {
            if (snap_steps[s] == step) {
                out.times.push_back(step * dt);
                out.u.push_back(u);
            }
        }
    };
    take_snapshots(0);

    const double mu = nu * dt / (2.0 * dx * dx);
    std::vector<double> a(nx - 1), b(nx - 1), c(nx - 1), d(nx - 1);
    for (int step = 1; step <= nt; ++step) {
        for (int i = 1; i < nx; ++i)
            adv[i - 1] = u[i] * (u[i + 1] - u[i - 1]) / (2.0 * dx);
        for (int i = 1; i < nx; ++i) {
            const double nonlin = (step == 1)
                                      ? adv[i - 1]
                                      : 1.5 * adv[i - 1] - 0.5 * adv_prev[i - 1];
            d[i - 1] = u[i] + mu * (u[i + 1] - 2.0 * u[i] + u[i - 1]) - dt * nonlin;
            a[i - 1] = -mu;
            b[i - 1] = 1.0 + 2.0 * mu;
            c[i - 1] = -mu;
        }
        thomas(a, b, c, d);
        adv_prev = adv;
        for (int i = 1; i < nx; ++i) u[i] = d[i - 1];
        u[0] = u[nx] = 0.0;
        take_snapshots(step);
    }
    return out;
}

}  // namespace pinn::oracle
