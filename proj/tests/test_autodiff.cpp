#include <cmath>
#include <random>

#include "doctest.h"
#include "pinn/autodiff.hpp"
#include "pinn/balancing.hpp"
#include "pinn/problems.hpp"

using namespace pinn;

namespace {

NetworkConfig tiny_net() {
    NetworkConfig cfg;
    cfg.hidden_layers = 2;
    cfg.width = 6;
    return cfg;
}

}  // namespace

TEST_CASE("gradient of mu^2 is 2*mu") {
    const NetworkConfig cfg = tiny_net();
    ParameterVector p = init_xavier(cfg, 1, true, 3.0);
    Tape tape;
    const NodeId mu = tape.mu_leaf(p.mu());
    const NodeId root = tape.square(mu);
    StepTerms terms;
    const auto grad = parameter_gradient(tape, root, cfg, p, terms, {});
    CHECK(grad[p.layout.mu_index] == doctest::Approx(6.0));
    for (int i = 0; i < p.layout.theta_count; ++i) CHECK(grad[i] == 0.0);
}

TEST_CASE("loss disconnected from mu has exactly zero mu-gradient") {
    const NetworkConfig cfg = tiny_net();
    ParameterVector p = init_xavier(cfg, 1, true, 0.5);
    Tape tape;
    (void)tape.mu_leaf(p.mu());
    const NodeId c = tape.constant(2.0);
    const NodeId root = tape.square(c);
    StepTerms terms;
    const auto grad = parameter_gradient(tape, root, cfg, p, terms, {});
    CHECK(grad[p.layout.mu_index] == 0.0);
}

TEST_CASE("nodes not reachable from the root do not affect the sweep") {
    const NetworkConfig cfg = tiny_net();
    ParameterVector p = init_xavier(cfg, 1, true, 2.0);
    Tape tape;
    const NodeId mu = tape.mu_leaf(p.mu());
    const NodeId root = tape.square(mu);
    StepTerms terms;
    const auto g1 = parameter_gradient(tape, root, cfg, p, terms, {});
    // dead arithmetic recorded after the root
    (void)tape.mul(tape.constant(5.0), mu);
    (void)tape.square(mu);
    const auto g2 = parameter_gradient(tape, root, cfg, p, terms, {});
    CHECK(g1 == g2);
}

TEST_CASE("replay reproduces recorded values bit-identically") {
    const ProblemSpec spec = make_problem(ProblemId::Burgers, Mode::Forward);
    NetworkConfig cfg = tiny_net();
    const ParameterVector p = init_xavier(cfg, 7);
    std::mt19937_64 rng(3);
    const CollocationBatch batch = sample_collocation(spec, {12, 6, 6, 6}, rng);
    StepComputation comp;
    compute_term_losses(spec, cfg, p, batch, {}, comp);
    std::vector<double> before;
    for (NodeId n : comp.term_loss_nodes) before.push_back(comp.tape.value(n));
    comp.tape.replay();
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(comp.tape.value(comp.term_loss_nodes[i]) == before[i]);
}

TEST_CASE("one reverse sweep per parameter_gradient call") {
    const NetworkConfig cfg = tiny_net();
    ParameterVector p = init_xavier(cfg, 1, true, 1.0);
    Tape tape;
    const NodeId root = tape.square(tape.mu_leaf(p.mu()));
    StepTerms terms;
    reset_reverse_sweep_count();
    for (int i = 0; i < 3; ++i) (void)parameter_gradient(tape, root, cfg, p, terms, {});
    CHECK(reverse_sweep_count() == 3);
}

TEST_CASE("non-finite loss is rejected") {
    const NetworkConfig cfg = tiny_net();
    ParameterVector p = init_xavier(cfg, 1, true, 0.0);
    Tape tape;
    const NodeId root = tape.div(tape.constant(1.0), tape.constant(0.0));
    StepTerms terms;
    CHECK_THROWS_AS(parameter_gradient(tape, root, cfg, p, terms, {}), NumericError);
}

TEST_CASE("Burgers residual loss gradient matches finite differences") {
    const ProblemSpec spec = make_problem(ProblemId::Burgers, Mode::Forward);
    NetworkConfig cfg = tiny_net();
    ParameterVector params = init_xavier(cfg, 5);
    std::mt19937_64 rng(9);
    const CollocationBatch batch = sample_collocation(spec, {16, 4, 4, 4}, rng);

    StepComputation comp;
    compute_term_losses(spec, cfg, params, batch, {}, comp);
    const auto grad =
        parameter_gradient(comp.tape, comp.term_loss_nodes[0], cfg, params, comp.terms, {});

    auto pde_loss = [&](const ParameterVector& pv) {
        StepComputation c;
        compute_term_losses(spec, cfg, pv, batch, {}, c);
        return c.losses.values[0];
    };
    const double h = 1e-5;
    ParameterVector pv = params;
    std::mt19937_64 pick(17);
    for (int probe = 0; probe < 25; ++probe) {
        const int j = static_cast<int>(pick() % params.layout.theta_count);
        pv.v[j] = params.v[j] + h;
        const double fp = pde_loss(pv);
        pv.v[j] = params.v[j] - h;
        const double fm = pde_loss(pv);
        pv.v[j] = params.v[j];
        const double fd = (fp - fm) / (2 * h);
        CHECK(std::abs(fd - grad[j]) <= 1e-5 * std::max(1.0, std::abs(grad[j])));
    }
}

TEST_CASE("scalarised gradient is the lambda-weighted sum of term gradients") {
    const ProblemSpec spec = make_problem(ProblemId::Helmholtz, Mode::Forward);
    NetworkConfig cfg = tiny_net();
    ParameterVector params = init_xavier(cfg, 12);
    std::mt19937_64 rng(4);
    const CollocationBatch batch = sample_collocation(spec, {8, 5, 5, 5}, rng);
    StepComputation comp;
    compute_term_losses(spec, cfg, params, batch, {}, comp);

    const std::vector<double> lambdas = {1.5, 0.25, 2.0, 0.8, 1.1};
    std::vector<std::vector<double>> per_term;
    for (NodeId n : comp.term_loss_nodes)
        per_term.push_back(parameter_gradient(comp.tape, n, cfg, params, comp.terms, {}));
    const NodeId root = scalarise(comp.tape, comp.term_loss_nodes, lambdas);
    const auto grad = parameter_gradient(comp.tape, root, cfg, params, comp.terms, {});

    for (int j = 0; j < params.layout.total(); ++j) {
        double want = 0.0;
        for (std::size_t t = 0; t < lambdas.size(); ++t) want += lambdas[t] * per_term[t][j];
        CHECK(std::abs(grad[j] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("finite_difference_check utility") {
    auto square = [](const std::vector<double>& x) { return x[0] * x[0]; };
    CHECK(finite_difference_check(square, {1.0}, 1e-5, {2.0}) < 1e-9);

    auto affine = [](const std::vector<double>& x) { return 3.0 * x[0] - 2.0 * x[1] + 1.0; };
    CHECK(finite_difference_check(affine, {0.4, -0.7}, 1e-4, {3.0, -2.0}) < 1e-12);

    CHECK_THROWS_AS(finite_difference_check(square, {1.0}, 0.0, {2.0}), ConfigError);
    auto blows = [](const std::vector<double>& x) {
        return x[0] > 1.0 ? std::numeric_limits<double>::infinity() : x[0];
    };
    CHECK_THROWS_AS(finite_difference_check(blows, {1.0}, 1e-3, {1.0}), NumericError);
}

TEST_CASE("kernel gradients are independent of thread count") {
    NetworkConfig cfg;
    cfg.hidden_layers = 2;
    cfg.width = 10;
    const ParameterVector params = init_xavier(cfg, 2024);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> uni(-1, 1);
    const int npts = 64;
    std::vector<double> xs(npts), ys(npts), adj(npts * jet_ncoef(3));
    for (auto& v : xs) v = uni(rng);
    for (auto& v : ys) v = uni(rng);
    for (auto& v : adj) v = uni(rng);

    JetBatchStore st;
    forward_jets(cfg, params, xs.data(), ys.data(), npts, 3, st, {1});
    std::vector<double> g1(params.layout.total(), 0.0), g2 = g1;
    backward_jets(cfg, params, st, adj.data(), g1.data(), {1});
    forward_jets(cfg, params, xs.data(), ys.data(), npts, 3, st, {2});
    backward_jets(cfg, params, st, adj.data(), g2.data(), {2});
    for (std::size_t i = 0; i < g1.size(); ++i)
        CHECK(std::abs(g1[i] - g2[i]) <= 1e-12 * std::max(1.0, std::abs(g1[i])));
}
