#pragma once

// Closed-form derivative tables for the supported activations.
//
// d^n tanh(z)/dz^n is a polynomial in t = tanh(z); likewise for the logistic
// sigmoid in s = sigma(z). The polynomials below follow from the recursion
// P_{n+1} = P_n'(t) * (1 - t^2) resp. Q_{n+1} = Q_n'(s) * (s - s^2).
// Order 5 is required: the gradient of an order-4 jet touches sigma^(5).

#include <cmath>
#include <string>

#include "pinn/common.hpp"

namespace pinn {

enum class Activation { Tanh, Sigmoid };

inline constexpr int kMaxActivationDeriv = 5;

inline const char* activation_name(Activation a) {
    return a == Activation::Tanh ? "tanh" : "sigmoid";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "sigmoid") return Activation::Sigmoid;
    throw ConfigError("unknown activation: " + s);
}

// Fills out[0..max_order] with sigma^(n)(z), max_order <= 5.
inline void activation_derivs(Activation act, double z, int max_order, double* out) {
    if (act == Activation::Tanh) {
        const double t = std::tanh(z);
        const double t2 = t * t;
        out[0] = t;
        if (max_order >= 1) out[1] = 1.0 - t2;
        if (max_order >= 2) out[2] = t * (-2.0 + 2.0 * t2);
        if (max_order >= 3) out[3] = -2.0 + t2 * (8.0 - 6.0 * t2);
        if (max_order >= 4) out[4] = t * (16.0 + t2 * (-40.0 + 24.0 * t2));
        if (max_order >= 5) out[5] = 16.0 + t2 * (-136.0 + t2 * (240.0 - 120.0 * t2));
    } else {
        const double s = 1.0 / (1.0 + std::exp(-z));
        out[0] = s;
        if (max_order >= 1) out[1] = s * (1.0 - s);
        if (max_order >= 2) out[2] = s * (1.0 + s * (-3.0 + 2.0 * s));
        if (max_order >= 3) out[3] = s * (1.0 + s * (-7.0 + s * (12.0 - 6.0 * s)));
        if (max_order >= 4) out[4] = s * (1.0 + s * (-15.0 + s * (50.0 + s * (-60.0 + 24.0 * s))));
        if (max_order >= 5)
            out[5] =
                s * (1.0 + s * (-31.0 + s * (180.0 + s * (-390.0 + s * (360.0 - 120.0 * s)))));
    }
}

inline double activation_value(Activation act, double z) {
    return act == Activation::Tanh ? std::tanh(z) : 1.0 / (1.0 + std::exp(-z));
}

}  // namespace pinn
