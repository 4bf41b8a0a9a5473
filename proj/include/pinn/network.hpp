#pragma once

// Fully-connected feed-forward approximator U(x, y; theta) with a flat
// parameter layout shared by the autodiff kernels and the optimizers.
//
// Layout, in order: for each layer l = 0..L (L-1 hidden couplings plus the
// scalar output layer): W_l row-major (out x in), then b_l. An optional
// trailing slot holds the trainable PDE parameter mu.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pinn/activation.hpp"
#include "pinn/common.hpp"

namespace pinn {

// Affine map applied to one input coordinate before the first layer:
// xin = (x - center) * scale. Identity by default; problems on domains far
// from [-1,1] remap so tanh does not saturate. Derivatives reported by the
// jet engine remain with respect to the physical coordinate.
struct InputMap {
    double center = 0.0;
    double scale = 1.0;
    double operator()(double x) const { return (x - center) * scale; }
};

struct NetworkConfig {
    int input_dim = 2;
    int hidden_layers = 2;  // d_K
    int width = 32;         // w_K
    Activation activation = Activation::Tanh;
    int output_dim = 1;
    std::array<InputMap, 2> input_map{};

    void validate() const {
        if (input_dim < 1 || input_dim > 2) throw ConfigError("input_dim must be 1 or 2");
        if (hidden_layers < 1) throw ConfigError("hidden_layers must be >= 1");
        if (width < 1) throw ConfigError("width must be >= 1");
        if (output_dim != 1) throw ConfigError("output_dim must be 1");
    }
};

// Offsets of each layer's weight/bias block inside the flat parameter vector.
struct ParamLayout {
    struct Layer {
        int w_offset, b_offset, in, out;
    };
    std::vector<Layer> layers;
    int theta_count = 0;  // network parameters only
    int mu_index = -1;    // trailing PDE-parameter slot, -1 if absent
    int total() const { return theta_count + (mu_index >= 0 ? 1 : 0); }
};

ParamLayout make_layout(const NetworkConfig& cfg, bool with_mu);

struct ParameterVector {
    std::vector<double> v;
    ParamLayout layout;

    bool has_mu() const { return layout.mu_index >= 0; }
    double mu() const { return v[layout.mu_index]; }
    void set_mu(double m) { v[layout.mu_index] = m; }
    const double* weights(int layer) const { return v.data() + layout.layers[layer].w_offset; }
    const double* biases(int layer) const { return v.data() + layout.layers[layer].b_offset; }
};

// Glorot-uniform weights with bound sqrt(6/(fan_in+fan_out)), zero biases.
// Identical (config, seed) pairs produce bitwise-identical vectors.
ParameterVector init_xavier(const NetworkConfig& cfg, std::uint64_t seed, bool with_mu = false,
                            double mu0 = 0.0);

// Plain scalar evaluation; agrees with the jet engine's zero multi-index.
double forward(const NetworkConfig& cfg, const ParameterVector& params, double x, double y);

// Text checkpoint: one JSON header line (config + layout version), then one
// parameter per line at full precision.
void save_checkpoint(const std::string& path, const NetworkConfig& cfg,
                     const ParameterVector& params);
ParameterVector load_checkpoint(const std::string& path, NetworkConfig& cfg_out);

}  // namespace pinn
