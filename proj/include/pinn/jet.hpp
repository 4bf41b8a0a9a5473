#pragma once

// Truncated bivariate Taylor arithmetic ("jets") up to total order 4.
//
// A jet stores the coefficients c[(ix,iy)] of u(x0+dx, y0+dy) = sum c_ij dx^i dy^j,
// i.e. mixed partial derivatives divided by ix!*iy!, in graded-lex order:
//   (0,0) | (1,0) (0,1) | (2,0) (1,1) (0,2) | ... | (4,0) (3,1) (2,2) (1,3) (0,4)
// Multiplication is the truncated 2-D convolution; composition with a smooth
// univariate function uses its Taylor table at the jet's constant term.

#include <array>
#include <cstdint>

namespace pinn {

inline constexpr int kMaxJetOrder = 4;

constexpr int jet_ncoef(int order) { return (order + 1) * (order + 2) / 2; }

constexpr int jet_index(int ix, int iy) {
    const int d = ix + iy;
    return d * (d + 1) / 2 + iy;
}

constexpr int jet_order_of_index(int idx) {
    int d = 0;
    while ((d + 1) * (d + 2) / 2 <= idx) ++d;
    return d;
}

// (ix, iy) for a flat coefficient index.
constexpr std::pair<int, int> jet_multi_index(int idx) {
    const int d = jet_order_of_index(idx);
    const int iy = idx - d * (d + 1) / 2;
    return {d - iy, iy};
}

struct ConvTriple {
    std::uint8_t t, a, b;  // out[t] += a[a] * b[b]
};

constexpr int conv_triple_count(int order) {
    int n = 0;
    for (int tx = 0; tx <= order; ++tx)
        for (int ty = 0; tx + ty <= order; ++ty) n += (tx + 1) * (ty + 1);
    return n;
}

template <int P>
constexpr auto make_conv_triples() {
    std::array<ConvTriple, conv_triple_count(P)> out{};
    int n = 0;
    for (int ax = 0; ax <= P; ++ax)
        for (int ay = 0; ax + ay <= P; ++ay)
            for (int bx = 0; ax + ay + bx <= P; ++bx)
                for (int by = 0; ax + ay + bx + by <= P; ++by)
                    out[n++] = {static_cast<std::uint8_t>(jet_index(ax + bx, ay + by)),
                                static_cast<std::uint8_t>(jet_index(ax, ay)),
                                static_cast<std::uint8_t>(jet_index(bx, by))};
    return out;
}

template <int P>
inline constexpr auto kConvTriples = make_conv_triples<P>();

constexpr double jet_factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

template <int P>
constexpr auto make_deriv_scale() {
    std::array<double, jet_ncoef(P)> out{};
    for (int i = 0; i < jet_ncoef(P); ++i) {
        auto [ix, iy] = jet_multi_index(i);
        out[i] = jet_factorial(ix) * jet_factorial(iy);
    }
    return out;
}

// Multiplies Taylor coefficient (ix,iy) to recover the mixed partial derivative.
template <int P>
inline constexpr auto kDerivScale = make_deriv_scale<P>();

// out = a * b (truncated). out must not alias a or b.
template <int P>
inline void jet_mul(const double* a, const double* b, double* out) {
    for (int i = 0; i < jet_ncoef(P); ++i) out[i] = 0.0;
    for (const auto& tr : kConvTriples<P>) out[tr.t] += a[tr.a] * b[tr.b];
}

// vbar[b] += q[a] * ybar[t]: adjoint of jet_mul with respect to its second factor.
template <int P>
inline void jet_corr_acc(const double* q, const double* ybar, double* vbar) {
    for (const auto& tr : kConvTriples<P>) vbar[tr.b] += q[tr.a] * ybar[tr.t];
}

// out = f(w) where fz[n] = f^(n)(w0) / n! for n = 0..P and w0 = w[0].
// Horner evaluation in what = w - w0*e0; truncation makes this exact.
template <int P>
inline void jet_compose(const double* fz, const double* w, double* out) {
    constexpr int N = jet_ncoef(P);
    if constexpr (P == 0) {
        out[0] = fz[0];
        return;
    }
    double what[N], tmp[N];
    for (int i = 0; i < N; ++i) what[i] = w[i];
    what[0] = 0.0;
    for (int i = 0; i < N; ++i) out[i] = 0.0;
    out[0] = fz[P];
    for (int n = P - 1; n >= 0; --n) {
        jet_mul<P>(out, what, tmp);
        tmp[0] += fz[n];
        for (int i = 0; i < N; ++i) out[i] = tmp[i];
    }
}

// wbar += d(f o w)^T ybar. fz1[n] = f^(n+1)(w0) / n! for n = 0..P.
// The Frechet derivative of w -> f(w) in the truncated algebra is
// multiplication by f'(w), so the adjoint is a correlation with f'(w).
template <int P>
inline void jet_compose_vjp(const double* fz1, const double* w, const double* ybar,
                            double* wbar) {
    double q[jet_ncoef(P)];
    jet_compose<P>(fz1, w, q);
    jet_corr_acc<P>(q, ybar, wbar);
}

// Value-semantics jet used by the serial reference path and tests.
template <int P>
struct Jet {
    static constexpr int N = jet_ncoef(P);
    std::array<double, N> c{};

    static Jet constant(double v) {
        Jet j;
        j.c[0] = v;
        return j;
    }
    // Seed for input coordinate `axis` (0 = x, 1 = y); `scale` is the derivative
    // of the (possibly normalized) coordinate with respect to the physical one.
    static Jet variable(double v, int axis, double scale = 1.0) {
        Jet j;
        j.c[0] = v;
        if constexpr (P >= 1) j.c[axis == 0 ? jet_index(1, 0) : jet_index(0, 1)] = scale;
        return j;
    }

    double value() const { return c[0]; }
    // Mixed partial derivative d^(ix+iy) u / dx^ix dy^iy.
    double deriv(int ix, int iy) const {
        return c[jet_index(ix, iy)] * kDerivScale<P>[jet_index(ix, iy)];
    }

    Jet operator+(const Jet& o) const {
        Jet r;
        for (int i = 0; i < N; ++i) r.c[i] = c[i] + o.c[i];
        return r;
    }
    Jet operator-(const Jet& o) const {
        Jet r;
        for (int i = 0; i < N; ++i) r.c[i] = c[i] - o.c[i];
        return r;
    }
    Jet operator*(const Jet& o) const {
        Jet r;
        jet_mul<P>(c.data(), o.c.data(), r.c.data());
        return r;
    }
    Jet operator*(double s) const {
        Jet r;
        for (int i = 0; i < N; ++i) r.c[i] = c[i] * s;
        return r;
    }
    Jet& operator+=(const Jet& o) {
        for (int i = 0; i < N; ++i) c[i] += o.c[i];
        return *this;
    }
};

}  // namespace pinn
