#include <cmath>

#include "doctest.h"
#include "pinn/autodiff.hpp"
#include "pinn/training.hpp"

using namespace pinn;

namespace {

TrainConfig tiny_config(BalancerId id, long steps = 20) {
    TrainConfig cfg;
    cfg.max_steps = steps;
    cfg.balancer.id = id;
    cfg.net.hidden_layers = 2;
    cfg.net.width = 8;
    cfg.batch = {12, 6, 6, 6};
    cfg.record_every = 1;
    cfg.exec.threads = 1;
    return cfg;
}

bool rows_equal(const RunRecord& a, const RunRecord& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto& ra = a.rows[i];
        const auto& rb = b.rows[i];
        if (ra.step != rb.step || ra.losses != rb.losses || ra.lambdas != rb.lambdas ||
            ra.scalarised != rb.scalarised || ra.mu != rb.mu || ra.lr != rb.lr ||
            ra.sweeps != rb.sweeps)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("adam first step moves by lr in the sign direction") {
    AdamState st(2);
    double params[2] = {0.5, -1.0};
    const double grad[2] = {0.25, -3.0};
    adam_step(st, params, grad, 2, 0.01);
    CHECK(params[0] == doctest::Approx(0.5 - 0.01).epsilon(1e-4));
    CHECK(params[1] == doctest::Approx(-1.0 + 0.01).epsilon(1e-4));
}

TEST_CASE("adam leaves parameters alone under zero gradient") {
    AdamState st(2);
    double params[2] = {0.5, -1.0};
    const double grad[2] = {0.0, 0.0};
    for (int i = 0; i < 5; ++i) adam_step(st, params, grad, 2, 0.1);
    CHECK(params[0] == 0.5);
    CHECK(params[1] == -1.0);
}

TEST_CASE("adam descends a 1-D quadratic") {
    AdamState st(1);
    double th = 1.0;
    double prev = 1.0;
    for (int i = 0; i < 10; ++i) {
        const double g = 2.0 * th;
        adam_step(st, &th, &g, 1, 0.1);
        CHECK(th * th < prev);
        prev = th * th;
    }
}

TEST_CASE("adam rejects non-finite gradients with the step index") {
    AdamState st(1);
    double th = 1.0;
    const double g = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(adam_step(st, &th, &g, 1, 0.1, 17), NumericError);
}

TEST_CASE("plateau scheduler follows the 3000-step protocol") {
    ProgressTracker tr;
    PlateauScheduler pl{3000, 0.1};
    // monotone improvement: never reduced
    for (long s = 0; s < 10000; ++s) {
        tr.observe(1.0 / (s + 1.0), s);
        pl.update(tr, s);
    }
    CHECK(pl.scale == doctest::Approx(1.0));

    // constant loss: one reduction after 3000 flat steps, two after 6000
    ProgressTracker tr2;
    PlateauScheduler pl2{3000, 0.1};
    double lr = 1e-3;
    for (long s = 0; s <= 3001; ++s) {
        tr2.observe(5.0, s);
        lr = 1e-3 * pl2.update(tr2, s);
    }
    CHECK(lr == doctest::Approx(1e-4));
    for (long s = 3002; s <= 6001; ++s) {
        tr2.observe(5.0, s);
        lr = 1e-3 * pl2.update(tr2, s);
    }
    CHECK(lr == doctest::Approx(1e-5));
}

TEST_CASE("early stopper follows the 9000-step protocol") {
    ProgressTracker tr;
    const EarlyStopper es{9000};
    tr.observe(1.0, 0);
    for (long s = 1; s <= 8999; ++s) {
        tr.observe(2.0, s);
        if (s == 8999) {
            CHECK(tr.steps_since_best == 8999);
            CHECK_FALSE(es.should_stop(tr));
        }
    }
    tr.observe(0.5, 9000);  // improvement at the wire
    CHECK_FALSE(es.should_stop(tr));
    for (long s = 9001; s <= 18000; ++s) tr.observe(2.0, s);
    CHECK(es.should_stop(tr));
}

TEST_CASE("training stops with reason budget when max_steps hits first") {
    const ProblemSpec spec = make_problem(ProblemId::Burgers, Mode::Forward);
    const RunRecord rec = train(spec, tiny_config(BalancerId::Manual, 5));
    CHECK(rec.steps_run == 5);
    CHECK(rec.stop_reason == "budget");
    CHECK_FALSE(rec.failed);
    CHECK(std::isfinite(rec.val_mse));
}

TEST_CASE("fixed seed and manual balancing reproduce the run exactly") {
    const ProblemSpec spec = make_problem(ProblemId::Burgers, Mode::Forward);
    const TrainConfig cfg = tiny_config(BalancerId::Manual, 15);
    const RunRecord a = train(spec, cfg);
    const RunRecord b = train(spec, cfg);
    CHECK(rows_equal(a, b));
    CHECK(a.val_mse == b.val_mse);
    CHECK(a.rel_max_err == b.rel_max_err);
}

TEST_CASE("learning rate never increases across a run") {
    const ProblemSpec spec = make_problem(ProblemId::Helmholtz, Mode::Forward);
    TrainConfig cfg = tiny_config(BalancerId::Relobralo, 40);
    cfg.plateau_patience = 10;  // provoke reductions
    const RunRecord rec = train(spec, cfg);
    for (std::size_t i = 1; i < rec.rows.size(); ++i)
        CHECK(rec.rows[i].lr <= rec.rows[i - 1].lr + 1e-18);
}

TEST_CASE("recorded scalarised loss equals the lambda-weighted sum") {
    for (auto id : {BalancerId::Manual, BalancerId::Relobralo, BalancerId::SoftAdapt,
                    BalancerId::LrAnnealing, BalancerId::GradNorm}) {
        const ProblemSpec spec = make_problem(ProblemId::Burgers, Mode::Forward);
        const RunRecord rec = train(spec, tiny_config(id, 8));
        for (const auto& row : rec.rows) {
            double want = 0.0;
            for (std::size_t t = 0; t < row.losses.size(); ++t)
                want += row.lambdas[t] * row.losses[t];
            CHECK(std::abs(row.scalarised - want) <= 1e-12 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("vanishing learning rate freezes the parameters") {
    const ProblemSpec spec = make_problem(ProblemId::Helmholtz, Mode::Forward);
    TrainConfig cfg = tiny_config(BalancerId::Manual, 100);
    cfg.initial_lr = 1e-12;
    NetworkConfig net = cfg.net;
    net.input_map = spec.input_map;
    const ParameterVector initial = init_xavier(net, cfg.seed);
    const RunRecord rec = train(spec, cfg);
    double max_move = 0.0;
    for (int i = 0; i < initial.layout.theta_count; ++i)
        max_move = std::max(max_move, std::abs(rec.final_params.v[i] - initial.v[i]));
    CHECK(max_move < 1e-8);
}

TEST_CASE("reverse sweep accounting per balancer and problem") {
    struct Case {
        ProblemId id;
        Mode mode;
        int k;
    };
    const Case cases[] = {{ProblemId::Burgers, Mode::Forward, 4},
                          {ProblemId::Kirchhoff, Mode::Forward, 9},
                          {ProblemId::Helmholtz, Mode::Forward, 5},
                          {ProblemId::Burgers, Mode::Inverse, 2}};
    for (const auto& c : cases) {
        const ProblemSpec spec = make_problem(c.id, c.mode);
        for (auto bal : {BalancerId::Manual, BalancerId::SoftAdapt, BalancerId::Relobralo,
                         BalancerId::LrAnnealing, BalancerId::GradNorm}) {
            TrainConfig cfg = tiny_config(bal, 3);
            cfg.batch = {6, 4, 4, 4};
            const RunRecord rec = train(spec, cfg);
            const long per_step = (bal == BalancerId::LrAnnealing || bal == BalancerId::GradNorm)
                                      ? c.k
                                      : 1;
            REQUIRE(rec.rows.size() == 3);
            CHECK(rec.rows[0].sweeps == per_step);
            CHECK(rec.rows[1].sweeps == 2 * per_step);
            CHECK(rec.rows[2].sweeps == 3 * per_step);
        }
    }
}

TEST_CASE("the data term has exactly zero mu-gradient") {
    const ProblemSpec spec = make_problem(ProblemId::Burgers, Mode::Inverse);
    NetworkConfig cfg;
    cfg.hidden_layers = 2;
    cfg.width = 6;
    const ParameterVector p = init_xavier(cfg, 11, true, spec.mu_init);
    std::mt19937_64 rng(2);
    const CollocationBatch batch = sample_collocation(spec, {8, 4, 4, 8}, rng);
    StepComputation comp;
    compute_term_losses(spec, cfg, p, batch, {}, comp);
    const auto g_data =
        parameter_gradient(comp.tape, comp.term_loss_nodes[1], cfg, p, comp.terms, {});
    CHECK(g_data[p.layout.mu_index] == 0.0);
    const auto g_pde =
        parameter_gradient(comp.tape, comp.term_loss_nodes[0], cfg, p, comp.terms, {});
    CHECK(g_pde[p.layout.mu_index] != 0.0);
}

TEST_CASE("validation of the zero network against helmholtz") {
    const ProblemSpec spec = make_problem(ProblemId::Helmholtz, Mode::Forward);
    NetworkConfig cfg;
    cfg.hidden_layers = 1;
    cfg.width = 4;
    ParameterVector p = init_xavier(cfg, 6);
    const auto& out = p.layout.layers.back();
    for (int m = 0; m < out.in; ++m) p.v[out.w_offset + m] = 0.0;
    const Validation v = validate(cfg, p, spec);
    // grid mean of sin^2(pi x) sin^2(4 pi y) is about 1/4
    CHECK(v.mse == doctest::Approx(0.25).epsilon(0.02));
    CHECK(v.rel_max_err == doctest::Approx(1.0).epsilon(1e-12));
    const Validation v2 = validate(cfg, p, spec);
    CHECK(v.mse == v2.mse);  // deterministic grid
}

TEST_CASE("inverse training with a separate mu optimizer moves mu") {
    const ProblemSpec spec = make_problem(ProblemId::Kirchhoff, Mode::Inverse);
    TrainConfig cfg = tiny_config(BalancerId::Manual, 5);
    cfg.batch = {6, 4, 4, 6};
    const RunRecord rec = train(spec, cfg);  // Kirchhoff inverse defaults to separate
    CHECK(rec.rows.back().mu != doctest::Approx(spec.mu_init));
    CHECK(std::isfinite(rec.mu_sqerr));
}

TEST_CASE("diverging runs are reported, not dropped") {
    const ProblemSpec spec = make_problem(ProblemId::Burgers, Mode::Forward);
    TrainConfig cfg = tiny_config(BalancerId::Manual, 2000);
    cfg.initial_lr = 1e160;  // guaranteed overflow on the next forward
    const RunRecord rec = train(spec, cfg);
    CHECK(rec.failed);
    CHECK(rec.stop_reason == "failure");
    CHECK(!rec.fail_msg.empty());
    CHECK(rec.steps_run < 2000);
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    cfg.max_steps = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.plateau_factor = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.precision = "f32";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
