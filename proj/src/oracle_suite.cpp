#include "pinn/oracle_suite.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "pinn/autodiff.hpp"
#include "pinn/balancing.hpp"
#include "pinn/oracles.hpp"
#include "pinn/problems.hpp"
#include "pinn/reference.hpp"
#include "pinn/training.hpp"

namespace pinn {

namespace {
constexpr double kPi = 3.14159265358979323846;

OracleCheck make_check(const std::string& name, double measured, double tol,
                       const std::string& detail = "") {
    return {name, measured, tol, measured < tol, detail};
}

NetworkConfig random_net(std::mt19937_64& rng) {
    NetworkConfig cfg;
    cfg.hidden_layers = 1 + static_cast<int>(rng() % 3);
    cfg.width = 4 + static_cast<int>(rng() % 7);
    cfg.activation = (rng() % 2) ? Activation::Tanh : Activation::Sigmoid;
    return cfg;
}

// Jet entries of every order checked against central differences of the
// next-lower-order jets (which the engine computes exactly).
double jet_fd_worst(int instances) {
    std::mt19937_64 rng(20240811);
    std::uniform_real_distribution<double> uni(-0.9, 0.9);
    const double h = 1e-4;
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        const NetworkConfig cfg = random_net(rng);
        const ParameterVector p = init_xavier(cfg, rng());
        const double x = uni(rng), y = uni(rng);
        auto lower = [&](double xx, double yy, int order) {
            DerivativeJet j;
            if (order == 0) {
                j.order = 0;
                j.d[0] = forward(cfg, p, xx, yy);
            } else {
                j = input_jet(cfg, p, xx, yy, order);
            }
            return j;
        };
        for (int order = 1; order <= 4; ++order) {
            const auto j = input_jet(cfg, p, x, y, order);
            const auto xp = lower(x + h, y, order - 1);
            const auto xm = lower(x - h, y, order - 1);
            const auto yp = lower(x, y + h, order - 1);
            const auto ym = lower(x, y - h, order - 1);
            for (int ix = 0; ix < order; ++ix)
                for (int iy = 0; ix + iy < order; ++iy) {
                    const double fdx = (xp(ix, iy) - xm(ix, iy)) / (2 * h);
                    const double fdy = (yp(ix, iy) - ym(ix, iy)) / (2 * h);
                    worst = std::max(worst, std::abs(fdx - j(ix + 1, iy)) /
                                                std::max(1.0, std::abs(j(ix + 1, iy))));
                    worst = std::max(worst, std::abs(fdy - j(ix, iy + 1)) /
                                                std::max(1.0, std::abs(j(ix, iy + 1))));
                }
        }
    }
    return worst;
}

// Scalarised-loss parameter gradients against central differences, cycling
// through every problem and mode with tiny nets and batches.
double grad_fd_worst(int instances) {
    std::mt19937_64 rng(77001);
    std::uniform_real_distribution<double> uni(0.2, 1.5);
    double worst = 0.0;
    const ProblemId pids[] = {ProblemId::Burgers, ProblemId::Kirchhoff, ProblemId::Helmholtz};
    for (int i = 0; i < instances; ++i) {
        const ProblemSpec spec = make_problem(pids[i % 3], (i % 2) ? Mode::Inverse : Mode::Forward);
        NetworkConfig cfg = random_net(rng);
        cfg.input_map = spec.input_map;
        ParameterVector params = init_xavier(cfg, rng(), spec.mu_trainable,
                                             spec.mu_trainable ? spec.mu_init : 0.0);
        std::mt19937_64 srng(1000 + i);
        BatchSizes sizes{6, 4, 4, 5};
        const CollocationBatch batch = sample_collocation(spec, sizes, srng);
        std::vector<double> lambdas(spec.terms.size());
        for (auto& l : lambdas) l = uni(rng);

        auto loss_at = [&](const ParameterVector& pv) {
            StepComputation comp;
            compute_term_losses(spec, cfg, pv, batch, {}, comp);
            double acc = 0.0;
            for (std::size_t t = 0; t < lambdas.size(); ++t)
                acc += lambdas[t] * comp.losses.values[t];
            return acc;
        };

        StepComputation comp;
        compute_term_losses(spec, cfg, params, batch, {}, comp);
        const NodeId root = scalarise(comp.tape, comp.term_loss_nodes, lambdas);
        const auto grad = parameter_gradient(comp.tape, root, cfg, params, comp.terms, {});

        const double h = 1e-5;
        ParameterVector pv = params;
        const int total = params.layout.total();
        for (int probe = 0; probe < 10; ++probe) {
            const int j = static_cast<int>(rng() % total);
            pv.v[j] = params.v[j] + h;
            const double fp = loss_at(pv);
            pv.v[j] = params.v[j] - h;
            const double fm = loss_at(pv);
            pv.v[j] = params.v[j];
            const double fd = (fp - fm) / (2 * h);
            worst = std::max(worst,
                             std::abs(fd - grad[j]) / std::max(1.0, std::abs(grad[j])));
        }
    }
    return worst;
}

// d^(i+j) U / dx^i dy^j must equal the (j,i) entry of the x<->y mirrored
// network evaluated at the mirrored point.
double jet_symmetry_worst() {
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> uni(-0.8, 0.8);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const NetworkConfig cfg = random_net(rng);
        ParameterVector p = init_xavier(cfg, rng());
        ParameterVector ps = p;
        const auto& l0 = p.layout.layers[0];
        for (int k = 0; k < l0.out; ++k)
            std::swap(ps.v[l0.w_offset + k * 2], ps.v[l0.w_offset + k * 2 + 1]);
        const double x = uni(rng), y = uni(rng);
        const auto a = input_jet(cfg, p, x, y, 4);
        const auto b = input_jet(cfg, ps, y, x, 4);
        for (int ix = 0; ix <= 4; ++ix)
            for (int iy = 0; ix + iy <= 4; ++iy)
                worst = std::max(worst, std::abs(a(ix, iy) - b(iy, ix)) /
                                            std::max(1.0, std::abs(a(ix, iy))));
    }
    return worst;
}

// jet(a*u1 + b*u2) == a*jet(u1) + b*jet(u2), realized as one block-diagonal
// network so the combination is itself a network evaluation.
double jet_linearity_worst() {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> uni(-0.8, 0.8);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        NetworkConfig cfg;
        cfg.hidden_layers = 1 + static_cast<int>(rng() % 2);
        cfg.width = 4;
        cfg.activation = Activation::Tanh;
        const ParameterVector p1 = init_xavier(cfg, rng());
        const ParameterVector p2 = init_xavier(cfg, rng());
        const double ca = uni(rng) * 2.0, cb = uni(rng) * 2.0;

        // Block-diagonal hidden layers, combined output row.
        NetworkConfig cfg2 = cfg;
        cfg2.width = 8;
        ParameterVector pc = init_xavier(cfg2, 0);
        for (auto& w : pc.v) w = 0.0;
        const int w1 = cfg.width;
        for (int l = 0; l < cfg.hidden_layers; ++l) {
            const auto& ls = p1.layout.layers[l];
            const auto& ld = pc.layout.layers[l];
            for (int k = 0; k < w1; ++k) {
                for (int m = 0; m < ls.in; ++m) {
                    const int m2 = (l == 0) ? m : m + w1;
                    pc.v[ld.w_offset + k * ld.in + m] = p1.v[ls.w_offset + k * ls.in + m];
                    pc.v[ld.w_offset + (k + w1) * ld.in + m2] =
                        p2.v[ls.w_offset + k * ls.in + m];
                }
                pc.v[ld.b_offset + k] = p1.v[ls.b_offset + k];
                pc.v[ld.b_offset + k + w1] = p2.v[ls.b_offset + k];
            }
        }
        {
            const int l = cfg.hidden_layers;
            const auto& ls = p1.layout.layers[l];
            const auto& ld = pc.layout.layers[l];
            for (int m = 0; m < ls.in; ++m) {
                pc.v[ld.w_offset + m] = ca * p1.v[ls.w_offset + m];
                pc.v[ld.w_offset + m + ls.in] = cb * p2.v[ls.w_offset + m];
            }
            pc.v[ld.b_offset] = ca * p1.v[ls.b_offset] + cb * p2.v[ls.b_offset];
        }

        const double x = uni(rng), y = uni(rng);
        const auto j1 = input_jet(cfg, p1, x, y, 4);
        const auto j2 = input_jet(cfg, p2, x, y, 4);
        const auto jc = input_jet(cfg2, pc, x, y, 4);
        for (int ix = 0; ix <= 4; ++ix)
            for (int iy = 0; ix + iy <= 4; ++iy) {
                const double want = ca * j1(ix, iy) + cb * j2(ix, iy);
                worst = std::max(worst, std::abs(jc(ix, iy) - want) /
                                            std::max(1.0, std::abs(want)));
            }
    }
    return worst;
}

// Composition through a (possibly corrupted) tanh derivative table against
// finite differences of plain tanh; the negative control must trip this.
double activation_composition_worst(bool corrupt) {
    double worst = 0.0;
    for (double z0 : {-1.2, -0.3, 0.0, 0.4, 1.7}) {
        double raw[5];
        activation_derivs(Activation::Tanh, z0, 4, raw);
        if (corrupt) raw[3] = -raw[3];
        double fz[5];
        double fact = 1.0;
        for (int n = 0; n <= 4; ++n) {
            if (n > 1) fact *= n;
            fz[n] = raw[n] / fact;
        }
        // w = z0 + dx  (seed jet), out = tanh(w): coefficient n is tanh^(n)(z0)/n!
        double w[15] = {};
        w[0] = z0;
        w[jet_index(1, 0)] = 1.0;
        double out[15];
        jet_compose<4>(fz, w, out);
        const double h = 1e-3;
        // third derivative of tanh via 5-point second differences of tanh'.
        auto d1 = [&](double z) {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        };
        const double fd3 =
            (d1(z0 + h) - 2.0 * d1(z0) + d1(z0 - h)) / (h * h);
        const double an3 = out[jet_index(3, 0)] * 6.0;
        worst = std::max(worst, std::abs(fd3 - an3) / std::max(1.0, std::abs(an3)));
    }
    return worst;
}

double cole_hopf_vs_cn(double* at_half) {
    const double nu = 1.0 / (100.0 * kPi);
    const std::vector<double> times = {0.25, 0.5, 0.75, 1.0};
    const auto grid = oracle::crank_nicolson_burgers(nu, 4096, 8192, times);
    double worst = 0.0;
    for (double t : times)
        for (int i = 0; i <= 32; ++i) {
            const double x = -1.0 + 2.0 * i / 32.0;
            const double a = burgers_reference(x, t, nu);
            const double b = grid.at(x, t);
            worst = std::max(worst, std::abs(a - b));
        }
    if (at_half) *at_half = burgers_reference(0.5, 0.5, nu);
    return worst;
}

double burgers_residual_on_reference() {
    const double nu = 1.0 / (100.0 * kPi);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ux(-0.9, 0.9), ut(0.05, 0.95);
    double worst = 0.0;
    int used = 0;
    while (used < 20) {
        const double x = ux(rng), t = ut(rng);
        if (std::abs(x) < 0.25 && t > 0.3) continue;  // shock strip: FD jets unusable
        ++used;
        const double hx = 0.01, ht = 0.005;
        auto u = [&](double xx, double tt) { return burgers_reference(xx, tt, nu); };
        // 4th-order central stencils
        const double uxv = (-u(x + 2 * hx, t) + 8 * u(x + hx, t) - 8 * u(x - hx, t) +
                            u(x - 2 * hx, t)) /
                           (12 * hx);
        const double uxx = (-u(x + 2 * hx, t) + 16 * u(x + hx, t) - 30 * u(x, t) +
                            16 * u(x - hx, t) - u(x - 2 * hx, t)) /
                           (12 * hx * hx);
        const double utv = (-u(x, t + 2 * ht) + 8 * u(x, t + ht) - 8 * u(x, t - ht) +
                            u(x, t - 2 * ht)) /
                           (12 * ht);
        const double r = utv + u(x, t) * uxv - nu * uxx;
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

DerivativeJet kirchhoff_exact_jet(double x, double y, const KirchhoffMaterial& mat, int order) {
    // u = A sin(pi x / a) sin(pi y / b): closed-form mixed partials.
    const double inv = 1.0 / (mat.a * mat.a) + 1.0 / (mat.b * mat.b);
    const double A = mat.p0 / (kPi * kPi * kPi * kPi * mat.D() * inv * inv);
    const double wx = kPi / mat.a, wy = kPi / mat.b;
    DerivativeJet j;
    j.order = order;
    auto trig = [](double w, double v, int n) {
        switch (n % 4) {
            case 0: return std::pow(w, n) * std::sin(v);
            case 1: return std::pow(w, n) * std::cos(v);
            case 2: return -std::pow(w, n) * std::sin(v);
            default: return -std::pow(w, n) * std::cos(v);
        }
    };
    for (int ix = 0; ix <= order; ++ix)
        for (int iy = 0; ix + iy <= order; ++iy)
            j.d[jet_index(ix, iy)] = A * trig(wx, wx * x, ix) * trig(wy, wy * y, iy);
    return j;
}

DerivativeJet helmholtz_exact_jet(double x, double y, int order) {
    const double wx = kPi, wy = 4.0 * kPi;
    DerivativeJet j;
    j.order = order;
    auto trig = [](double w, double v, int n) {
        switch (n % 4) {
            case 0: return std::pow(w, n) * std::sin(v);
            case 1: return std::pow(w, n) * std::cos(v);
            case 2: return -std::pow(w, n) * std::sin(v);
            default: return -std::pow(w, n) * std::cos(v);
        }
    };
    for (int ix = 0; ix <= order; ++ix)
        for (int iy = 0; ix + iy <= order; ++iy)
            j.d[jet_index(ix, iy)] = trig(wx, wx * x, ix) * trig(wy, wy * y, iy);
    return j;
}

double analytic_substitution_worst(ProblemId id, Mode mode) {
    const ProblemSpec spec = make_problem(id, mode);
    std::mt19937_64 rng(31337);
    BatchSizes sizes{100, 50, 50, 50};
    const CollocationBatch batch = sample_collocation(spec, sizes, rng);
    AnalyticField field;
    if (id == ProblemId::Kirchhoff) {
        const KirchhoffMaterial mat = spec.mat;
        field = [mat](double x, double y, int order) {
            return kirchhoff_exact_jet(x, y, mat, order);
        };
    } else {
        field = [](double x, double y, int order) { return helmholtz_exact_jet(x, y, order); };
    }
    StepComputation comp;
    compute_term_losses_with_field(spec, field, batch, comp);
    double worst = 0.0;
    for (double v : comp.losses.values) worst = std::max(worst, v);
    return worst;
}

}  // namespace

std::vector<OracleCheck> oracle_suite(const OracleOptions& opts) {
    std::vector<OracleCheck> out;

    out.push_back(make_check("jet_vs_finite_differences", jet_fd_worst(100), 1e-5,
                             "100 random nets, all orders"));
    out.push_back(make_check("gradient_vs_finite_differences", grad_fd_worst(100), 1e-5,
                             "100 scalarised losses across problems"));
    out.push_back(make_check("jet_mixed_partial_symmetry", jet_symmetry_worst(), 1e-12));
    out.push_back(make_check("jet_linearity", jet_linearity_worst(), 1e-12));
    out.push_back(make_check("jet_tanh_composition", activation_composition_worst(
                                                          opts.corrupt_tanh_third),
                             1e-4, opts.corrupt_tanh_third ? "corrupted 3rd derivative" : ""));

    {
        const double nu = 1.0 / (100.0 * kPi);
        double worst = 0.0;
        for (int i = 0; i <= 20; ++i) {
            const double x = -1.0 + 2.0 * i / 20.0;
            worst = std::max(worst,
                             std::abs(burgers_reference(x, 0.0, nu) + std::sin(kPi * x)));
        }
        out.push_back(make_check("cole_hopf_initial_condition", worst, 1e-14));
        worst = 0.0;
        for (int i = 1; i <= 10; ++i) {
            const double t = i / 10.0;
            worst = std::max({worst, std::abs(burgers_reference(0.0, t, nu)),
                              std::abs(burgers_reference(-1.0, t, nu)),
                              std::abs(burgers_reference(1.0, t, nu))});
        }
        out.push_back(make_check("cole_hopf_odd_symmetry", worst, 1e-10));

        double at_half = 0.0;
        const double disc = cole_hopf_vs_cn(&at_half);
        std::ostringstream det;
        det << "u(0.5,0.5) = " << at_half;
        out.push_back(make_check("cole_hopf_vs_crank_nicolson", disc, 1e-3, det.str()));
    }

    out.push_back(
        make_check("burgers_residual_on_reference", burgers_residual_on_reference(), 1e-4,
                   "finite-difference jets of the quadrature field"));
    out.push_back(make_check("kirchhoff_analytic_substitution",
                             analytic_substitution_worst(ProblemId::Kirchhoff, Mode::Forward),
                             1e-9, "all 9 terms"));
    out.push_back(make_check("kirchhoff_inverse_substitution",
                             analytic_substitution_worst(ProblemId::Kirchhoff, Mode::Inverse),
                             1e-9));
    out.push_back(make_check("helmholtz_analytic_substitution",
                             analytic_substitution_worst(ProblemId::Helmholtz, Mode::Forward),
                             1e-9, "all 5 terms"));
    out.push_back(make_check("helmholtz_inverse_substitution",
                             analytic_substitution_worst(ProblemId::Helmholtz, Mode::Inverse),
                             1e-9));

    {
        const KirchhoffMaterial mat;
        out.push_back(make_check("kirchhoff_flexural_stiffness",
                                 std::abs(mat.D() - (20.0 + 5.0 / 6.0)) / mat.D(), 1e-12,
                                 "D = 20.83(3) MN m"));
        const double direct = 0.015 / (97.40909103400243 * mat.D() * 0.02 * 0.02);
        out.push_back(make_check(
            "kirchhoff_center_deflection",
            std::abs(kirchhoff_analytical(5.0, 5.0, mat) - direct) / direct, 1e-12));
    }

    {
        // Adam first step is -lr*sign(g) up to the eps regularizer.
        AdamState st(3);
        double params[3] = {1.0, -2.0, 0.5};
        const double grad[3] = {0.3, -2.0, 1e-3};
        adam_step(st, params, grad, 3, 0.1);
        double worst = 0.0;
        worst = std::max(worst, std::abs(params[0] - (1.0 - 0.1)));
        worst = std::max(worst, std::abs(params[1] - (-2.0 + 0.1)));
        worst = std::max(worst, std::abs(params[2] - (0.5 - 0.1)));
        out.push_back(make_check("adam_first_step_identity", worst, 1e-4));

        AdamState st2(1);
        double th = 1.0;
        double prev = th * th;
        bool monotone = true;
        for (int i = 0; i < 10; ++i) {
            const double g = 2.0 * th;
            adam_step(st2, &th, &g, 1, 0.1);
            if (th * th >= prev) monotone = false;
            prev = th * th;
        }
        out.push_back(make_check("adam_quadratic_descent", monotone ? 0.0 : 1.0, 0.5,
                                 "f strictly decreases for 10 steps"));
    }

    return out;
}

}  // namespace pinn
