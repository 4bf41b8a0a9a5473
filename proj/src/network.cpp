#include "pinn/network.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace pinn {

ParamLayout make_layout(const NetworkConfig& cfg, bool with_mu) {
    cfg.validate();
    ParamLayout lay;
    int off = 0;
    int in = cfg.input_dim;
    for (int l = 0; l < cfg.hidden_layers; ++l) {
        lay.layers.push_back({off, off + cfg.width * in, in, cfg.width});
        off += cfg.width * in + cfg.width;
        in = cfg.width;
    }
    lay.layers.push_back({off, off + cfg.output_dim * in, in, cfg.output_dim});
    off += cfg.output_dim * in + cfg.output_dim;
    lay.theta_count = off;
    lay.mu_index = with_mu ? off : -1;
    return lay;
}

ParameterVector init_xavier(const NetworkConfig& cfg, std::uint64_t seed, bool with_mu,
                            double mu0) {
    ParameterVector p;
    p.layout = make_layout(cfg, with_mu);
    p.v.assign(p.layout.total(), 0.0);
    std::mt19937_64 rng(seed);
    for (const auto& lay : p.layout.layers) {
        const double bound = std::sqrt(6.0 / (lay.in + lay.out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (int i = 0; i < lay.out * lay.in; ++i) p.v[lay.w_offset + i] = dist(rng);
        // biases stay zero
    }
    if (with_mu) p.v[p.layout.mu_index] = mu0;
    return p;
}

double forward(const NetworkConfig& cfg, const ParameterVector& params, double x, double y) {
    std::vector<double> a(cfg.input_dim), z;
    a[0] = cfg.input_map[0](x);
    if (cfg.input_dim > 1) a[1] = cfg.input_map[1](y);
    const int L = static_cast<int>(params.layout.layers.size());
    for (int l = 0; l < L; ++l) {
        const auto& lay = params.layout.layers[l];
        const double* W = params.weights(l);
        const double* b = params.biases(l);
        z.assign(lay.out, 0.0);
        for (int k = 0; k < lay.out; ++k) {
            double acc = b[k];
            for (int m = 0; m < lay.in; ++m) acc += W[k * lay.in + m] * a[m];
            z[k] = acc;
        }
        if (l + 1 < L) {
            a.resize(lay.out);
            for (int k = 0; k < lay.out; ++k) a[k] = activation_value(cfg.activation, z[k]);
        } else {
            a = z;
        }
    }
    return a[0];
}

void save_checkpoint(const std::string& path, const NetworkConfig& cfg,
                     const ParameterVector& params) {
    nlohmann::json hdr;
    hdr["layout_version"] = 1;
    hdr["input_dim"] = cfg.input_dim;
    hdr["hidden_layers"] = cfg.hidden_layers;
    hdr["width"] = cfg.width;
    hdr["activation"] = activation_name(cfg.activation);
    hdr["input_map"] = {{cfg.input_map[0].center, cfg.input_map[0].scale},
                        {cfg.input_map[1].center, cfg.input_map[1].scale}};
    hdr["has_mu"] = params.has_mu();
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open checkpoint for writing: " + path);
    f << hdr.dump() << "\n";
    f.precision(17);
    for (double w : params.v) f << w << "\n";
}

ParameterVector load_checkpoint(const std::string& path, NetworkConfig& cfg_out) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open checkpoint: " + path);
    std::string line;
    std::getline(f, line);
    nlohmann::json hdr = nlohmann::json::parse(line);
    if (hdr.value("layout_version", 0) != 1) throw ConfigError("unsupported checkpoint version");
    cfg_out.input_dim = hdr["input_dim"];
    cfg_out.hidden_layers = hdr["hidden_layers"];
    cfg_out.width = hdr["width"];
    cfg_out.activation = activation_from_name(hdr["activation"]);
    for (int i = 0; i < 2; ++i) {
        cfg_out.input_map[i].center = hdr["input_map"][i][0];
        cfg_out.input_map[i].scale = hdr["input_map"][i][1];
    }
    ParameterVector p;
    p.layout = make_layout(cfg_out, hdr.value("has_mu", false));
    p.v.reserve(p.layout.total());
    double w;
    while (f >> w) p.v.push_back(w);
    if (static_cast<int>(p.v.size()) != p.layout.total())
        throw ConfigError("checkpoint size does not match its header");
    return p;
}

}  // namespace pinn
