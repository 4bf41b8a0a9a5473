#include <cmath>
#include <random>

#include "doctest.h"
#include "pinn/balancing.hpp"
#include "pinn/tape.hpp"

using namespace pinn;

namespace {

LossVector lv(std::vector<double> vals) {
    LossVector v;
    v.values = std::move(vals);
    v.labels.resize(v.values.size(), "t");
    return v;
}

BalancerState state_for(BalancerId id, int k, double alpha = 0.999, double T = 0.1,
                        double rho = 1.0) {
    BalancerConfig cfg;
    cfg.id = id;
    cfg.alpha = alpha;
    cfg.temperature = T;
    cfg.expected_rho = rho;
    return BalancerState::init(cfg, k, 42);
}

}  // namespace

TEST_CASE("scalarise sums lambda-weighted losses on the tape") {
    Tape tape;
    std::vector<NodeId> terms = {tape.constant(1.0), tape.constant(2.0), tape.constant(3.0)};
    CHECK(tape.value(scalarise(tape, terms, {1, 1, 1})) == doctest::Approx(6.0));
    std::vector<NodeId> t2 = {tape.constant(1.0), tape.constant(4.0)};
    CHECK(tape.value(scalarise(tape, t2, {2.0, 0.5})) == doctest::Approx(4.0));
    CHECK_THROWS_AS(scalarise(tape, t2, {1.0}), ConfigError);
}

TEST_CASE("relative_softmax basics") {
    // equal ratios -> all ones, any temperature
    for (double T : {1e-3, 1.0, 50.0}) {
        const auto l = relative_softmax(lv({3, 3, 3}), lv({3, 3, 3}), T, 3);
        for (double x : l) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
    }
    // huge temperature -> uniform
    {
        const auto l = relative_softmax(lv({5, 0.01, 2}), lv({1, 3, 0.2}), 1e8, 3);
        for (double x : l) CHECK(std::abs(x - 1.0) < 1e-6);
    }
    // tiny temperature -> winner takes all (least relative progress)
    {
        const auto l = relative_softmax(lv({2, 1, 1}), lv({1, 1, 1}), 1e-8, 3);
        CHECK(l[0] == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(l[1] == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(l[2] == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("relative_softmax invariants") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(0.1, 4.0);
    for (int i = 0; i < 50; ++i) {
        const int m = 2 + static_cast<int>(rng() % 7);
        std::vector<double> cur(m), ref(m);
        for (auto& v : cur) v = uni(rng);
        for (auto& v : ref) v = uni(rng);
        const double T = std::pow(10.0, -2.0 + 4.0 * (i % 5) / 4.0);
        const auto l = relative_softmax(lv(cur), lv(ref), T, m);
        double sum = 0;
        for (double x : l) {
            // open interval in exact arithmetic; the closure is reachable
            // only when a tiny temperature saturates exp() in doubles
            CHECK(x >= 0.0);
            CHECK(x <= m);
            sum += x;
        }
        CHECK(sum == doctest::Approx(m).epsilon(1e-12));
        if (T >= 1.0)
            for (double x : l) {
                CHECK(x > 0.0);
                CHECK(x < m);
            }

        // scale covariance: lambda(cur, ref, T) == lambda(cur, c*ref, T/c)
        const double c = 3.7;
        std::vector<double> ref_scaled = ref;
        for (auto& v : ref_scaled) v *= c;
        const auto l2 = relative_softmax(lv(cur), lv(ref_scaled), T / c, m);
        for (int j = 0; j < m; ++j)
            CHECK(std::abs(l[j] - l2[j]) <= 1e-12 * std::max(1.0, std::abs(l[j])));
    }
}

TEST_CASE("relative_softmax is shift invariant in its arguments") {
    // With unit references and T = 1 the softmax arguments are the losses
    // themselves; adding a common constant must not change the output.
    const auto a = relative_softmax(lv({0.3, 1.4, 0.9}), lv({1, 1, 1}), 1.0, 3);
    const auto b = relative_softmax(lv({100.3, 101.4, 100.9}), lv({1, 1, 1}), 1.0, 3);
    for (int i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
}

TEST_CASE("relative_softmax guards zero references") {
    const auto l = relative_softmax(lv({1.0, 1.0}), lv({0.0, 1.0}), 1.0, 2);
    for (double x : l) CHECK(std::isfinite(x));
    CHECK(l[0] == doctest::Approx(2.0).epsilon(1e-6));  // 1/eps dominates
}

TEST_CASE("relobralo with alpha=0 reduces to the previous-step softmax") {
    for (double rho : {0.0, 0.5, 1.0}) {
        auto st = state_for(BalancerId::Relobralo, 3, 0.0, 0.5, rho);
        st.observe_initial(lv({1, 2, 3}));
        const LossVector cur = lv({0.5, 2.5, 2.0});
        const auto expect = relative_softmax(cur, lv({1, 2, 3}), 0.5, 3);
        const auto got = relobralo_update(st, cur);
        for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-15));
    }
}

TEST_CASE("relobralo with alpha=1 and rho=1 freezes lambda at one") {
    auto st = state_for(BalancerId::Relobralo, 4, 1.0, 0.1, 1.0);
    st.observe_initial(lv({1, 2, 3, 4}));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> uni(0.1, 5.0);
    for (int step = 0; step < 50; ++step) {
        std::vector<double> cur(4);
        for (auto& v : cur) v = uni(rng);
        const auto l = relobralo_update(st, lv(cur));
        for (double x : l) CHECK(x == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("relobralo composes the EMA and lookback exactly") {
    const double alpha = 0.9, T = 0.25;
    auto st = state_for(BalancerId::Relobralo, 3, alpha, T, 1.0);  // rho == 1 surely
    st.observe_initial(lv({1, 1, 1}));
    const LossVector c1 = lv({2.0, 0.5, 1.0});
    const auto hat_prev = relative_softmax(c1, lv({1, 1, 1}), T, 3);
    const auto got = relobralo_update(st, c1);
    for (int i = 0; i < 3; ++i)
        CHECK(got[i] == doctest::Approx(alpha * 1.0 + (1 - alpha) * hat_prev[i]).epsilon(1e-15));

    // rho == 0 surely: the decayed part uses the lookback to L(0)
    auto st0 = state_for(BalancerId::Relobralo, 3, alpha, T, 0.0);
    st0.observe_initial(lv({1, 1, 1}));
    (void)relobralo_update(st0, c1);
    const LossVector c2 = lv({0.7, 0.9, 2.2});
    const auto hat_hist = relative_softmax(c2, lv({1, 1, 1}), T, 3);
    const auto hat_p2 = relative_softmax(c2, c1, T, 3);
    const auto got2 = relobralo_update(st0, c2);
    for (int i = 0; i < 3; ++i)
        CHECK(got2[i] ==
              doctest::Approx(alpha * hat_hist[i] + (1 - alpha) * hat_p2[i]).epsilon(1e-15));
}

TEST_CASE("relobralo EMA keeps lambda in (0, m) when rho is certain") {
    auto st = state_for(BalancerId::Relobralo, 5, 0.7, 0.3, 1.0);
    st.observe_initial(lv({1, 1, 1, 1, 1}));
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> uni(0.05, 8.0);
    for (int step = 0; step < 200; ++step) {
        std::vector<double> cur(5);
        for (auto& v : cur) v = uni(rng);
        const auto l = relobralo_update(st, lv(cur));
        for (double x : l) {
            CHECK(x > 0.0);
            CHECK(x < 5.0);
        }
    }
}

TEST_CASE("softadapt basics") {
    auto st = state_for(BalancerId::SoftAdapt, 4);
    st.observe_initial(lv({2, 2, 2, 2}));
    const auto l = softadapt_update(st, lv({2, 2, 2, 2}));
    for (double x : l) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));

    auto st2 = state_for(BalancerId::SoftAdapt, 2);
    st2.observe_initial(lv({1, 1}));
    const auto l2 = softadapt_update(st2, lv({1, 2}));
    const double e = std::exp(1.0);
    CHECK(l2[0] == doctest::Approx(1.0 / (1.0 + e)).epsilon(1e-12));
    CHECK(l2[1] == doctest::Approx(e / (1.0 + e)).epsilon(1e-12));
    CHECK(l2[0] + l2[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("softadapt is continuous as ratios coincide") {
    auto st = state_for(BalancerId::SoftAdapt, 2);
    st.observe_initial(lv({1, 1}));
    const auto l = softadapt_update(st, lv({1.0, 1.0 + 1e-9}));
    CHECK(std::abs(l[0] - 0.5) < 1e-8);
    CHECK(std::abs(l[1] - 0.5) < 1e-8);
}

TEST_CASE("lr annealing update") {
    auto st = state_for(BalancerId::LrAnnealing, 2);
    st.cfg.lr_annealing_alpha = 0.9;
    st.observe_initial(lv({1, 1}));
    // max|grad_pde| = 1.0, mean|grad_term| = 0.1 -> hat = 10, lambda = 1.9
    const std::vector<std::vector<double>> grads = {{1.0, 0.5}, {0.1, 0.1}};
    const auto l = lr_annealing_update(st, grads, 2);
    CHECK(l[0] == doctest::Approx(1.0));
    CHECK(l[1] == doctest::Approx(1.9).epsilon(1e-12));

    // identical constant gradients -> hat = 1, lambda stays 1
    auto st2 = state_for(BalancerId::LrAnnealing, 2);
    st2.cfg.lr_annealing_alpha = 0.9;
    st2.observe_initial(lv({1, 1}));
    const std::vector<std::vector<double>> same = {{0.3, 0.3}, {0.3, 0.3}};
    const auto l2 = lr_annealing_update(st2, same, 2);
    CHECK(l2[1] == doctest::Approx(1.0).epsilon(1e-12));

    // scale invariance of hat
    auto st3 = state_for(BalancerId::LrAnnealing, 2);
    st3.cfg.lr_annealing_alpha = 0.9;
    st3.observe_initial(lv({1, 1}));
    std::vector<std::vector<double>> scaled = grads;
    for (auto& g : scaled)
        for (auto& v : g) v *= 7.3;
    const auto l3 = lr_annealing_update(st3, scaled, 2);
    CHECK(l3[1] == doctest::Approx(1.9).epsilon(1e-12));

    // EMA fixed point: repeated identical statistics converge with ratio alpha
    auto st4 = state_for(BalancerId::LrAnnealing, 2);
    st4.cfg.lr_annealing_alpha = 0.9;
    st4.observe_initial(lv({1, 1}));
    const double c = 10.0;
    double prev_gap = std::abs(1.0 - c);
    for (int i = 0; i < 5; ++i) {
        const auto li = lr_annealing_update(st4, grads, 2);
        const double gap = std::abs(li[1] - c);
        CHECK(gap == doctest::Approx(0.9 * prev_gap).epsilon(1e-9));
        prev_gap = gap;
    }

    // stalled term: zero gradient -> capped scaling
    auto st5 = state_for(BalancerId::LrAnnealing, 2);
    st5.cfg.lr_annealing_alpha = 0.0;
    st5.observe_initial(lv({1, 1}));
    const std::vector<std::vector<double>> stalled = {{1.0, 1.0}, {0.0, 0.0}};
    const auto l5 = lr_annealing_update(st5, stalled, 2);
    CHECK(l5[1] == doctest::Approx(kLrAnnealingLambdaMax));
}

TEST_CASE("gradnorm lambda loss and update") {
    auto st = state_for(BalancerId::GradNorm, 2);
    st.observe_initial(lv({1, 1}));
    // G = (2,1), mean 1.5, equal rates -> |2-1.5| + |1-1.5| = 1.0
    CHECK(gradnorm_lambda_loss(st, lv({1, 1}), {2.0, 1.0}) == doctest::Approx(1.0));

    // balanced case: equal norms and equal relative rates -> loss 0, fixed point
    CHECK(gradnorm_lambda_loss(st, lv({0.5, 0.5}), {1.3, 1.3}) == doctest::Approx(0.0));
    const auto l = gradnorm_update(st, lv({0.5, 0.5}), {1.3, 1.3});
    CHECK(l[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l[1] == doctest::Approx(1.0).epsilon(1e-12));

    // renormalization invariant
    auto st2 = state_for(BalancerId::GradNorm, 3);
    st2.observe_initial(lv({1, 2, 3}));
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uni(0.1, 3.0);
    for (int i = 0; i < 20; ++i) {
        const auto li =
            gradnorm_update(st2, lv({uni(rng), uni(rng), uni(rng)}),
                            {uni(rng), uni(rng), uni(rng)});
        double sum = 0;
        for (double x : li) {
            CHECK(x > 0.0);
            sum += x;
        }
        CHECK(sum == doctest::Approx(3.0).epsilon(1e-12));
    }
}

TEST_CASE("pareto dominance") {
    CHECK_FALSE(pareto_dominates(lv({1, 1}), lv({1, 1})));
    CHECK(pareto_dominates(lv({1, 2}), lv({2, 2})));
    CHECK_FALSE(pareto_dominates(lv({1, 3}), lv({2, 2})));
    CHECK_THROWS_AS(pareto_dominates(lv({1}), lv({1, 2})), ConfigError);
}

TEST_CASE("balancer state bookkeeping") {
    auto st = state_for(BalancerId::Relobralo, 3);
    for (double x : st.lambdas) CHECK(x == 1.0);
    st.observe_initial(lv({4, 5, 6}));
    const std::vector<double> l0 = st.initial_losses;
    (void)relobralo_update(st, lv({1, 1, 1}));
    (void)relobralo_update(st, lv({0.1, 9, 3}));
    CHECK(st.initial_losses == l0);  // L(0) never mutates
    CHECK(st.previous_losses == std::vector<double>{0.1, 9, 3});
}

TEST_CASE("manual lambdas must match the term count") {
    BalancerConfig cfg;
    cfg.id = BalancerId::Manual;
    cfg.manual_lambdas = {1.0, 2.0};
    CHECK_THROWS_AS(BalancerState::init(cfg, 3, 1), ConfigError);
    cfg.manual_lambdas = {1.0, 2.0, 0.5};
    const auto st = BalancerState::init(cfg, 3, 1);
    CHECK(st.lambdas[1] == doctest::Approx(2.0));
}
