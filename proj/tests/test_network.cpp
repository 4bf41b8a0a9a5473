#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "pinn/autodiff.hpp"
#include "pinn/network.hpp"

using namespace pinn;

TEST_CASE("xavier init is deterministic and respects the Glorot bound") {
    NetworkConfig cfg;
    cfg.hidden_layers = 3;
    cfg.width = 64;
    const ParameterVector a = init_xavier(cfg, 77);
    const ParameterVector b = init_xavier(cfg, 77);
    CHECK(a.v == b.v);
    const ParameterVector c = init_xavier(cfg, 78);
    CHECK(a.v != c.v);

    for (std::size_t l = 0; l < a.layout.layers.size(); ++l) {
        const auto& lay = a.layout.layers[l];
        const double bound = std::sqrt(6.0 / (lay.in + lay.out));
        for (int i = 0; i < lay.out * lay.in; ++i) {
            CHECK(std::abs(a.v[lay.w_offset + i]) <= bound);
        }
        for (int i = 0; i < lay.out; ++i) CHECK(a.v[lay.b_offset + i] == 0.0);
    }
}

TEST_CASE("forward with a zeroed output layer is the output bias") {
    NetworkConfig cfg;
    cfg.hidden_layers = 2;
    cfg.width = 8;
    ParameterVector p = init_xavier(cfg, 5);
    const auto& out = p.layout.layers.back();
    for (int m = 0; m < out.in; ++m) p.v[out.w_offset + m] = 0.0;
    p.v[out.b_offset] = 7.0;
    CHECK(forward(cfg, p, 0.1, 0.9) == doctest::Approx(7.0));
    CHECK(forward(cfg, p, -1.0, 0.0) == doctest::Approx(7.0));
}

TEST_CASE("forward agrees with the jet value entry") {
    NetworkConfig cfg;
    cfg.hidden_layers = 3;
    cfg.width = 12;
    const ParameterVector p = init_xavier(cfg, 21);
    for (double x : {-0.7, 0.0, 0.4})
        for (double y : {-0.2, 0.8}) {
            const double f = forward(cfg, p, x, y);
            const auto j = input_jet(cfg, p, x, y, 1);
            CHECK(std::abs(f - j.value()) <= 1e-14 * std::max(1.0, std::abs(f)));
        }
}

TEST_CASE("single-path tanh net with zero biases is odd") {
    NetworkConfig cfg;
    cfg.hidden_layers = 2;
    cfg.width = 1;
    ParameterVector p = init_xavier(cfg, 33);  // biases already zero
    for (double x : {0.2, 0.5, 1.3}) {
        const double up = forward(cfg, p, x, 0.7 * x);
        const double um = forward(cfg, p, -x, -0.7 * x);
        CHECK(up == doctest::Approx(-um).epsilon(1e-14));
    }
}

TEST_CASE("output responds continuously to a single-weight perturbation") {
    NetworkConfig cfg;
    cfg.hidden_layers = 2;
    cfg.width = 10;
    ParameterVector p = init_xavier(cfg, 8);
    const double base = forward(cfg, p, 0.3, -0.4);
    const double eps = 1e-6;
    p.v[3] += eps;
    const double d1 = std::abs(forward(cfg, p, 0.3, -0.4) - base);
    p.v[3] += eps;
    const double d2 = std::abs(forward(cfg, p, 0.3, -0.4) - base);
    CHECK(d2 <= 2.5 * d1 + 1e-12);  // smoke check, not a proof
}

TEST_CASE("checkpoint round-trips parameters and config") {
    NetworkConfig cfg;
    cfg.hidden_layers = 2;
    cfg.width = 5;
    cfg.activation = Activation::Sigmoid;
    cfg.input_map[0] = {5.0, 0.2};
    const ParameterVector p = init_xavier(cfg, 4, true, 0.37);
    const auto path = (std::filesystem::temp_directory_path() / "pinn_ckpt_test.txt").string();
    save_checkpoint(path, cfg, p);
    NetworkConfig cfg2;
    const ParameterVector q = load_checkpoint(path, cfg2);
    CHECK(q.v == p.v);
    CHECK(cfg2.width == cfg.width);
    CHECK(cfg2.activation == Activation::Sigmoid);
    CHECK(cfg2.input_map[0].center == doctest::Approx(5.0));
    CHECK(q.has_mu());
    CHECK(q.mu() == doctest::Approx(0.37));
    std::filesystem::remove(path);
}

TEST_CASE("config validation") {
    NetworkConfig cfg;
    cfg.hidden_layers = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.hidden_layers = 2;
    cfg.width = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
