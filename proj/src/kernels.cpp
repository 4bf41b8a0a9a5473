#include "pinn/kernels.hpp"

#include <cmath>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pinn/activation.hpp"

// Batched jet propagation with plane-major buffers: a layer's activations
// are stored as [neuron][coeff][point] with the point index contiguous and
// padded to the SIMD tile, so the affine transforms become blocked
// matrix-matrix contractions over the point dimension.

namespace pinn {

namespace {

constexpr double kInvFact[6] = {1.0, 1.0, 1.0 / 2.0, 1.0 / 6.0, 1.0 / 24.0, 1.0 / 120.0};
constexpr int kTile = 16;  // points per inner vector block

int resolve_threads(const ExecPolicy& exec) {
#ifdef _OPENMP
    return exec.threads > 0 ? exec.threads : omp_get_max_threads();
#else
    (void)exec;
    return 1;
#endif
}

inline int padded(int npts) { return (npts + kTile - 1) / kTile * kTile; }

constexpr int kPtBlock = 128;  // L2 tile over the point dimension

// out[i][c][p0:p1] = sum_j L[i][j] * in[j][c][p0:p1]
// L is row-major [rows][cols]; in/out are plane-major with `pp` points.
// p0/p1 are kTile-aligned. Register accumulation over j, point-blocked so
// the in-planes stay resident in L2 while every output row is formed.
void plane_gemm_range(const double* __restrict L, int rows, int cols,
                      const double* __restrict in, double* __restrict out, int ncoef, int pp,
                      int p0, int p1) {
    constexpr int IB = 4;  // output rows formed per pass over the j-planes
    for (int pb = p0; pb < p1; pb += kPtBlock) {
        const int pe = pb + kPtBlock < p1 ? pb + kPtBlock : p1;
        for (int i0 = 0; i0 < rows; i0 += IB) {
            const int ib = rows - i0 < IB ? rows - i0 : IB;
            for (int c = 0; c < ncoef; ++c) {
                const double* __restrict srcc = in + static_cast<std::size_t>(c) * pp;
                for (int p = pb; p < pe; p += kTile) {
                    if (ib == IB) {
                        double a0[kTile] = {}, a1[kTile] = {}, a2[kTile] = {}, a3[kTile] = {};
                        const double* __restrict l0 = L + static_cast<std::size_t>(i0) * cols;
                        const double* __restrict l1 = l0 + cols;
                        const double* __restrict l2 = l1 + cols;
                        const double* __restrict l3 = l2 + cols;
                        for (int j = 0; j < cols; ++j) {
                            const double* __restrict sj =
                                srcc + static_cast<std::size_t>(j) * ncoef * pp + p;
                            const double w0 = l0[j], w1 = l1[j], w2 = l2[j], w3 = l3[j];
                            for (int q = 0; q < kTile; ++q) {
                                const double s = sj[q];
                                a0[q] += w0 * s;
                                a1[q] += w1 * s;
                                a2[q] += w2 * s;
                                a3[q] += w3 * s;
                            }
                        }
                        double* __restrict d0 =
                            out + (static_cast<std::size_t>(i0) * ncoef + c) * pp + p;
                        double* __restrict d1 = d0 + static_cast<std::size_t>(ncoef) * pp;
                        double* __restrict d2 = d1 + static_cast<std::size_t>(ncoef) * pp;
                        double* __restrict d3 = d2 + static_cast<std::size_t>(ncoef) * pp;
                        for (int q = 0; q < kTile; ++q) {
                            d0[q] = a0[q];
                            d1[q] = a1[q];
                            d2[q] = a2[q];
                            d3[q] = a3[q];
                        }
                    } else {
                        for (int ii = 0; ii < ib; ++ii) {
                            double acc[kTile] = {};
                            const double* __restrict lrow =
                                L + static_cast<std::size_t>(i0 + ii) * cols;
                            for (int j = 0; j < cols; ++j) {
                                const double* __restrict sj =
                                    srcc + static_cast<std::size_t>(j) * ncoef * pp + p;
                                const double w = lrow[j];
                                for (int q = 0; q < kTile; ++q) acc[q] += w * sj[q];
                            }
                            double* __restrict dst =
                                out + (static_cast<std::size_t>(i0 + ii) * ncoef + c) * pp + p;
                            for (int q = 0; q < kTile; ++q) dst[q] = acc[q];
                        }
                    }
                }
            }
        }
    }
}

// C[k][m] += sum over the plane slice [c, p0:p1) of A[k][c][:] * B[m][c][:]
void plane_outer_acc_range(const double* __restrict A, int rows_a, const double* __restrict B,
                           int rows_b, double* __restrict C, int ncoef, int pp, int p0,
                           int p1) {
    constexpr int KB = 2, MB = 2;
    const std::size_t plane = static_cast<std::size_t>(ncoef) * pp;
    for (int pb = p0; pb < p1; pb += kPtBlock) {
        const int pe = pb + kPtBlock < p1 ? pb + kPtBlock : p1;
        for (int k0 = 0; k0 < rows_a; k0 += KB) {
            for (int m0 = 0; m0 < rows_b; m0 += MB) {
                if (k0 + KB <= rows_a && m0 + MB <= rows_b) {
                    double l00[kTile] = {}, l01[kTile] = {}, l10[kTile] = {}, l11[kTile] = {};
                    const double* __restrict a0 = A + static_cast<std::size_t>(k0) * plane;
                    const double* __restrict a1 = a0 + plane;
                    const double* __restrict b0 = B + static_cast<std::size_t>(m0) * plane;
                    const double* __restrict b1 = b0 + plane;
                    for (int c = 0; c < ncoef; ++c) {
                        const std::size_t coff = static_cast<std::size_t>(c) * pp;
                        for (int p = pb; p < pe; p += kTile) {
                            const double* __restrict pa0 = a0 + coff + p;
                            const double* __restrict pa1 = a1 + coff + p;
                            const double* __restrict pb0 = b0 + coff + p;
                            const double* __restrict pb1 = b1 + coff + p;
                            for (int q = 0; q < kTile; ++q) {
                                l00[q] += pa0[q] * pb0[q];
                                l01[q] += pa0[q] * pb1[q];
                                l10[q] += pa1[q] * pb0[q];
                                l11[q] += pa1[q] * pb1[q];
                            }
                        }
                    }
                    double s00 = 0, s01 = 0, s10 = 0, s11 = 0;
                    for (int q = 0; q < kTile; ++q) {
                        s00 += l00[q];
                        s01 += l01[q];
                        s10 += l10[q];
                        s11 += l11[q];
                    }
                    C[static_cast<std::size_t>(k0) * rows_b + m0] += s00;
                    C[static_cast<std::size_t>(k0) * rows_b + m0 + 1] += s01;
                    C[static_cast<std::size_t>(k0 + 1) * rows_b + m0] += s10;
                    C[static_cast<std::size_t>(k0 + 1) * rows_b + m0 + 1] += s11;
                } else {
                    const int kb = rows_a - k0 < KB ? rows_a - k0 : KB;
                    const int mb = rows_b - m0 < MB ? rows_b - m0 : MB;
                    for (int kk = 0; kk < kb; ++kk)
                        for (int mm = 0; mm < mb; ++mm) {
                            double lanes[kTile] = {};
                            const double* __restrict pa =
                                A + static_cast<std::size_t>(k0 + kk) * plane;
                            const double* __restrict pbm =
                                B + static_cast<std::size_t>(m0 + mm) * plane;
                            for (int c = 0; c < ncoef; ++c) {
                                const std::size_t coff = static_cast<std::size_t>(c) * pp;
                                for (int p = pb; p < pe; p += kTile)
                                    for (int q = 0; q < kTile; ++q)
                                        lanes[q] += pa[coff + p + q] * pbm[coff + p + q];
                            }
                            double acc = 0.0;
                            for (int q = 0; q < kTile; ++q) acc += lanes[q];
                            C[static_cast<std::size_t>(k0 + kk) * rows_b + m0 + mm] += acc;
                        }
                }
            }
        }
    }
}

template <int P>
struct KernelImpl {
    static constexpr int N = jet_ncoef(P);

    static void activation_block(Activation act, double* z, double* a, int width, int pp,
                                 int p0, int p1) {
        double w[N], out[N], raw[P + 1], fz[P + 1];
        for (int k = 0; k < width; ++k) {
            double* zk = z + static_cast<std::size_t>(k) * N * pp;
            double* ak = a + static_cast<std::size_t>(k) * N * pp;
            for (int p = p0; p < p1; ++p) {
                for (int c = 0; c < N; ++c) w[c] = zk[static_cast<std::size_t>(c) * pp + p];
                activation_derivs(act, w[0], P, raw);
                for (int n = 0; n <= P; ++n) fz[n] = raw[n] * kInvFact[n];
                jet_compose<P>(fz, w, out);
                for (int c = 0; c < N; ++c) ak[static_cast<std::size_t>(c) * pp + p] = out[c];
            }
        }
    }

    static void forward(const NetworkConfig& cfg, const ParameterVector& params,
                        const double* xs, const double* ys, int npts, JetBatchStore& st,
                        int nthreads) {
        const int H = cfg.hidden_layers;
        const int width = cfg.width;
        const int pp = padded(npts);
        st.order = P;
        st.ncoef = N;
        st.npts = npts;
        st.npts_padded = pp;
        st.in.assign(static_cast<std::size_t>(cfg.input_dim) * N * pp, 0.0);
        st.z.resize(H);
        st.a.resize(H);
        for (int l = 0; l < H; ++l) {
            st.z[l].assign(static_cast<std::size_t>(width) * N * pp, 0.0);
            st.a[l].assign(static_cast<std::size_t>(width) * N * pp, 0.0);
        }
        st.out.assign(static_cast<std::size_t>(npts) * N, 0.0);

#pragma omp parallel num_threads(nthreads)
        {
#ifdef _OPENMP
            const int tid = omp_get_thread_num();
            const int nth = omp_get_num_threads();
#else
            const int tid = 0, nth = 1;
#endif
            // Even tile split; every phase below uses the same ranges.
            const int ntiles = pp / kTile;
            const int t0 = static_cast<int>(static_cast<long>(ntiles) * tid / nth) * kTile;
            const int t1 = static_cast<int>(static_cast<long>(ntiles) * (tid + 1) / nth) * kTile;

            if (t1 > t0) {
                // Input jets: value plus the input-map scale in the first-order
                // slot, so derivatives refer to the physical coordinates.
                double* in0 = st.in.data();
                for (int p = t0; p < t1 && p < npts; ++p) in0[p] = cfg.input_map[0](xs[p]);
                if constexpr (P >= 1) {
                    double* d10 = st.in.data() + static_cast<std::size_t>(jet_index(1, 0)) * pp;
                    for (int p = t0; p < t1 && p < npts; ++p) d10[p] = cfg.input_map[0].scale;
                }
                if (cfg.input_dim > 1) {
                    double* in1 = st.in.data() + static_cast<std::size_t>(N) * pp;
                    for (int p = t0; p < t1 && p < npts; ++p) in1[p] = cfg.input_map[1](ys[p]);
                    if constexpr (P >= 1) {
                        double* d01 = st.in.data() +
                                      (static_cast<std::size_t>(N) + jet_index(0, 1)) * pp;
                        for (int p = t0; p < t1 && p < npts; ++p)
                            d01[p] = cfg.input_map[1].scale;
                    }
                }
            }
#pragma omp barrier

            for (int l = 0; l < H; ++l) {
                const auto& lay = params.layout.layers[l];
                const double* W = params.weights(l);
                const double* b = params.biases(l);
                const double* src = (l == 0) ? st.in.data() : st.a[l - 1].data();
                double* zl = st.z[l].data();
                if (t1 > t0) {
                    plane_gemm_range(W, width, lay.in, src, zl, N, pp, t0, t1);
                    for (int k = 0; k < width; ++k) {
                        double* zk = zl + static_cast<std::size_t>(k) * N * pp;
                        for (int p = t0; p < t1; ++p) zk[p] += b[k];
                    }
                    activation_block(cfg.activation, zl, st.a[l].data(), width, pp, t0, t1);
                }
#pragma omp barrier
            }

            {
                const auto& lay = params.layout.layers[H];
                const double* W = params.weights(H);
                const double* b = params.biases(H);
                const double* src = st.a[H - 1].data();
                for (int p = t0; p < t1 && p < npts; ++p) {
                    double acc[N] = {};
                    for (int m = 0; m < lay.in; ++m) {
                        const double w = W[m];
                        const double* am = src + static_cast<std::size_t>(m) * N * pp;
                        for (int c = 0; c < N; ++c)
                            acc[c] += w * am[static_cast<std::size_t>(c) * pp + p];
                    }
                    acc[0] += b[0];
                    double* op = st.out.data() + static_cast<std::size_t>(p) * N;
                    for (int c = 0; c < N; ++c) op[c] = acc[c];
                }
            }
        }
    }

    static void activation_vjp_block(Activation act, const double* z, double* bar, int width,
                                     int pp, int p0, int p1) {
        double w[N], ybar[N], zbar[N], raw[P + 2], fz1[P + 1];
        for (int k = 0; k < width; ++k) {
            const double* zk = z + static_cast<std::size_t>(k) * N * pp;
            double* bk = bar + static_cast<std::size_t>(k) * N * pp;
            for (int p = p0; p < p1; ++p) {
                for (int c = 0; c < N; ++c) {
                    w[c] = zk[static_cast<std::size_t>(c) * pp + p];
                    ybar[c] = bk[static_cast<std::size_t>(c) * pp + p];
                }
                activation_derivs(act, w[0], P + 1, raw);
                for (int n = 0; n <= P; ++n) fz1[n] = raw[n + 1] * kInvFact[n];
                for (int c = 0; c < N; ++c) zbar[c] = 0.0;
                jet_compose_vjp<P>(fz1, w, ybar, zbar);
                for (int c = 0; c < N; ++c) bk[static_cast<std::size_t>(c) * pp + p] = zbar[c];
            }
        }
    }

    static void backward(const NetworkConfig& cfg, const ParameterVector& params,
                         const JetBatchStore& st, const double* out_adj, double* grad,
                         int nthreads) {
        const int H = cfg.hidden_layers;
        const int width = cfg.width;
        const int npts = st.npts;
        const int pp = st.npts_padded;
        const int theta = params.layout.theta_count;

        std::vector<std::vector<double>> tgrad(nthreads, std::vector<double>(theta, 0.0));
        std::vector<double> bar_cur(static_cast<std::size_t>(width) * N * pp, 0.0);
        std::vector<double> bar_prev(static_cast<std::size_t>(width) * N * pp, 0.0);
        // Transposed weights per hidden layer for the adjoint propagation.
        std::vector<std::vector<double>> wt(H);
        for (int l = 0; l < H; ++l) {
            const auto& lay = params.layout.layers[l];
            wt[l].resize(static_cast<std::size_t>(lay.in) * lay.out);
            const double* W = params.weights(l);
            for (int k = 0; k < lay.out; ++k)
                for (int m = 0; m < lay.in; ++m)
                    wt[l][static_cast<std::size_t>(m) * lay.out + k] =
                        W[static_cast<std::size_t>(k) * lay.in + m];
        }

#pragma omp parallel num_threads(nthreads)
        {
#ifdef _OPENMP
            const int tid = omp_get_thread_num();
            const int nth = omp_get_num_threads();
#else
            const int tid = 0, nth = 1;
#endif
            const int ntiles = pp / kTile;
            const int t0 = static_cast<int>(static_cast<long>(ntiles) * tid / nth) * kTile;
            const int t1 = static_cast<int>(static_cast<long>(ntiles) * (tid + 1) / nth) * kTile;
            double* g = tgrad[tid].data();

            {
                // Output layer: bar_{H-1} = W_out^T ybar, gW_out += <ybar, a>.
                const auto& lay = params.layout.layers[H];
                const double* W = params.weights(H);
                const double* src = st.a[H - 1].data();
                double* gW = g + lay.w_offset;
                for (int p = t0; p < t1 && p < npts; ++p) {
                    const double* ybar = out_adj + static_cast<std::size_t>(p) * N;
                    for (int m = 0; m < lay.in; ++m) {
                        const double w = W[m];
                        const double* am = src + static_cast<std::size_t>(m) * N * pp;
                        double* bm = bar_cur.data() + static_cast<std::size_t>(m) * N * pp;
                        double dot = 0.0;
                        for (int c = 0; c < N; ++c) {
                            bm[static_cast<std::size_t>(c) * pp + p] = w * ybar[c];
                            dot += ybar[c] * am[static_cast<std::size_t>(c) * pp + p];
                        }
                        gW[m] += dot;
                    }
                    g[lay.b_offset] += ybar[0];
                }
            }
#pragma omp barrier

            for (int l = H - 1; l >= 0; --l) {
                const auto& lay = params.layout.layers[l];
                const double* src = (l == 0) ? st.in.data() : st.a[l - 1].data();
                if (t1 > t0) {
                    activation_vjp_block(cfg.activation, st.z[l].data(), bar_cur.data(), width,
                                         pp, t0, t1);
                    double* gb = g + lay.b_offset;
                    for (int k = 0; k < width; ++k) {
                        const double* bk =
                            bar_cur.data() + static_cast<std::size_t>(k) * N * pp;
                        double acc = 0.0;
                        for (int p = t0; p < t1; ++p) acc += bk[p];
                        gb[k] += acc;
                    }
                    plane_outer_acc_range(bar_cur.data(), width, src, lay.in,
                                          g + lay.w_offset, N, pp, t0, t1);
                    if (l > 0)
                        plane_gemm_range(wt[l].data(), lay.in, width, bar_cur.data(),
                                         bar_prev.data(), N, pp, t0, t1);
                }
#pragma omp barrier
                if (l > 0) {
#pragma omp single
                    bar_cur.swap(bar_prev);
                }
            }
        }

        for (int t = 0; t < nthreads; ++t)
            for (int i = 0; i < theta; ++i) grad[i] += tgrad[t][i];
    }
};

}  // namespace

double JetBatchStore::deriv(int pt, int ix, int iy) const {
    const int idx = jet_index(ix, iy);
    const double fact = jet_factorial(ix) * jet_factorial(iy);
    return out[static_cast<std::size_t>(pt) * ncoef + idx] * fact;
}

void forward_jets(const NetworkConfig& cfg, const ParameterVector& params, const double* xs,
                  const double* ys, int npts, int order, JetBatchStore& store,
                  const ExecPolicy& exec) {
    if (order < 0 || order > kMaxJetOrder) throw ConfigError("jet order must be in 0..4");
    const int nthreads = resolve_threads(exec);
    switch (order) {
        case 0: KernelImpl<0>::forward(cfg, params, xs, ys, npts, store, nthreads); break;
        case 1: KernelImpl<1>::forward(cfg, params, xs, ys, npts, store, nthreads); break;
        case 2: KernelImpl<2>::forward(cfg, params, xs, ys, npts, store, nthreads); break;
        case 3: KernelImpl<3>::forward(cfg, params, xs, ys, npts, store, nthreads); break;
        case 4: KernelImpl<4>::forward(cfg, params, xs, ys, npts, store, nthreads); break;
    }
}

void backward_jets(const NetworkConfig& cfg, const ParameterVector& params,
                   const JetBatchStore& store, const double* out_adj, double* grad,
                   const ExecPolicy& exec) {
    const int nthreads = resolve_threads(exec);
    switch (store.order) {
        case 0: KernelImpl<0>::backward(cfg, params, store, out_adj, grad, nthreads); break;
        case 1: KernelImpl<1>::backward(cfg, params, store, out_adj, grad, nthreads); break;
        case 2: KernelImpl<2>::backward(cfg, params, store, out_adj, grad, nthreads); break;
        case 3: KernelImpl<3>::backward(cfg, params, store, out_adj, grad, nthreads); break;
        case 4: KernelImpl<4>::backward(cfg, params, store, out_adj, grad, nthreads); break;
    }
}

}  // namespace pinn
