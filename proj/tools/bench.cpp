// Kernel benchmark: serial per-point reference vs the batched OpenMP kernels
// at 1 and N threads, on each problem's typical shapes. Also reports the
// forward agreement between the two implementations.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pinn/kernels.hpp"
#include "pinn/network.hpp"
#include "pinn/reference.hpp"

using namespace pinn;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <int P>
double run_reference(const NetworkConfig& cfg, const ParameterVector& params,
                     const std::vector<double>& xs, const std::vector<double>& ys,
                     std::vector<double>& out) {
    const double t0 = now_ms();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto j = ref::forward_jet<P>(cfg, params, xs[i], ys[i]);
        for (int c = 0; c < jet_ncoef(P); ++c) out[i * jet_ncoef(P) + c] = j.c[c];
    }
    return now_ms() - t0;
}

struct Shape {
    const char* name;
    int width, layers, order, npts;
};

}  // namespace

int main() {
    const Shape shapes[] = {
        {"burgers  (order 2)", 64, 4, 2, 1024},
        {"helmholtz(order 2)", 64, 2, 2, 1024},
        {"kirchhoff(order 4)", 48, 4, 4, 512},
    };
#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
#else
    const int max_threads = 1;
#endif
    std::printf("forward only:           serial ref | omp(1) | omp(%d);  forward+backward: omp(1) | omp(%d)\n\n",
                max_threads, max_threads);
    std::printf("%-20s %10s %10s %10s %12s %12s %8s %10s\n", "shape", "ref", "fwd(1)",
                "fwd(N)", "fwd+bwd(1)", "fwd+bwd(N)", "speedup", "max|diff|");

    for (const auto& s : shapes) {
        NetworkConfig cfg;
        cfg.hidden_layers = s.layers;
        cfg.width = s.width;
        const ParameterVector params = init_xavier(cfg, 42);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> uni(-1, 1);
        std::vector<double> xs(s.npts), ys(s.npts);
        for (int i = 0; i < s.npts; ++i) {
            xs[i] = uni(rng);
            ys[i] = uni(rng);
        }
        const int ncoef = jet_ncoef(s.order);
        std::vector<double> ref_out(static_cast<std::size_t>(s.npts) * ncoef);
        double t_ref = 0.0;
        switch (s.order) {
            case 2: t_ref = run_reference<2>(cfg, params, xs, ys, ref_out); break;
            case 4: t_ref = run_reference<4>(cfg, params, xs, ys, ref_out); break;
        }

        JetBatchStore store;
        std::vector<double> adj(ref_out.size(), 0.5);
        std::vector<double> grad(params.layout.total());

        auto fwd = [&](int threads) {
            const double t0 = now_ms();
            forward_jets(cfg, params, xs.data(), ys.data(), s.npts, s.order, store, {threads});
            return now_ms() - t0;
        };
        auto fwd_bwd = [&](int threads) {
            const double t0 = now_ms();
            forward_jets(cfg, params, xs.data(), ys.data(), s.npts, s.order, store, {threads});
            std::fill(grad.begin(), grad.end(), 0.0);
            backward_jets(cfg, params, store, adj.data(), grad.data(), {threads});
            return now_ms() - t0;
        };
        fwd_bwd(1);  // warm up allocations
        const double f1 = fwd(1);
        const double fn = fwd(max_threads);
        const double b1 = fwd_bwd(1);
        const double bn = fwd_bwd(max_threads);

        double max_diff = 0.0;
        for (std::size_t i = 0; i < ref_out.size(); ++i)
            max_diff = std::max(max_diff, std::abs(ref_out[i] - store.out[i]));

        std::printf("%-20s %8.1fms %8.1fms %8.1fms %10.1fms %10.1fms %7.2fx %10.2e\n", s.name,
                    t_ref, f1, fn, b1, bn, b1 / bn, max_diff);
    }
    return 0;
}
