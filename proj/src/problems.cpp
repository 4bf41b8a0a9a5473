#include "pinn/problems.hpp"

#include <cmath>

namespace pinn {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr NodeId kNoNode = static_cast<NodeId>(-1);
}  // namespace

const char* problem_name(ProblemId id) {
    switch (id) {
        case ProblemId::Burgers: return "burgers";
        case ProblemId::Kirchhoff: return "kirchhoff";
        case ProblemId::Helmholtz: return "helmholtz";
    }
    return "?";
}

ProblemId problem_from_name(const std::string& s) {
    if (s == "burgers") return ProblemId::Burgers;
    if (s == "kirchhoff") return ProblemId::Kirchhoff;
    if (s == "helmholtz") return ProblemId::Helmholtz;
    throw ConfigError("unknown problem: " + s);
}

const char* mode_name(Mode m) { return m == Mode::Forward ? "forward" : "inverse"; }

Mode mode_from_name(const std::string& s) {
    if (s == "forward") return Mode::Forward;
    if (s == "inverse") return Mode::Inverse;
    throw ConfigError("unknown mode: " + s);
}

std::vector<std::string> ProblemSpec::term_labels() const {
    std::vector<std::string> out;
    out.reserve(terms.size());
    for (const auto& t : terms) out.push_back(t.label);
    return out;
}

double ProblemSpec::reference(double x, double y) const {
    switch (id) {
        case ProblemId::Burgers: return burgers_reference(x, y, nu_burgers);
        case ProblemId::Kirchhoff: return kirchhoff_analytical(x, y, mat);
        case ProblemId::Helmholtz: return helmholtz_analytical(x, y);
    }
    return 0.0;
}

// --- residual / reference evaluators ---------------------------------------

double burgers_residual(const DerivativeJet& jet, double nu) {
    return jet(0, 1) + jet(0, 0) * jet(1, 0) - nu * jet(2, 0);
}

double kirchhoff_residual(const DerivativeJet& jet, double D, double load) {
    if (D <= 0.0) throw ConfigError("kirchhoff_residual: flexural stiffness must be positive");
    return jet(4, 0) + 2.0 * jet(2, 2) + jet(0, 4) - load / D;
}

std::pair<double, double> kirchhoff_moments(const DerivativeJet& jet, double D, double nu_p) {
    const double uxx = jet(2, 0), uyy = jet(0, 2);
    return {-D * (uxx + nu_p * uyy), -D * (nu_p * uxx + uyy)};
}

double kirchhoff_analytical(double x, double y, const KirchhoffMaterial& mat) {
    const double inv = 1.0 / (mat.a * mat.a) + 1.0 / (mat.b * mat.b);
    const double amp = mat.p0 / (kPi * kPi * kPi * kPi * mat.D() * inv * inv);
    return amp * std::sin(kPi * x / mat.a) * std::sin(kPi * y / mat.b);
}

double kirchhoff_load(double x, double y, const KirchhoffMaterial& mat) {
    return mat.p0 * std::sin(kPi * x / mat.a) * std::sin(kPi * y / mat.b);
}

double helmholtz_residual(const DerivativeJet& jet, double k, double forcing) {
    return jet(2, 0) + jet(0, 2) + k * k * jet(0, 0) - forcing;
}

double helmholtz_forcing(double x, double y, double k) {
    return (k * k - 17.0 * kPi * kPi) * std::sin(kPi * x) * std::sin(4.0 * kPi * y);
}

double helmholtz_analytical(double x, double y) {
    return std::sin(kPi * x) * std::sin(4.0 * kPi * y);
}

// --- problem construction ----------------------------------------------------

namespace {

void generate_measurements(ProblemSpec& spec) {
    const int n = spec.measurement_grid;
    spec.meas_x.reserve(static_cast<size_t>(n) * n);
    spec.meas_y.reserve(static_cast<size_t>(n) * n);
    spec.meas_u.reserve(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        const double x = spec.lo[0] + (spec.hi[0] - spec.lo[0]) * i / (n - 1.0);
        for (int j = 0; j < n; ++j) {
            const double y = spec.lo[1] + (spec.hi[1] - spec.lo[1]) * j / (n - 1.0);
            spec.meas_x.push_back(x);
            spec.meas_y.push_back(y);
            spec.meas_u.push_back(spec.reference(x, y));
        }
    }
}

}  // namespace

ProblemSpec make_problem(ProblemId id, Mode mode) {
    ProblemSpec s;
    s.id = id;
    s.mode = mode;
    s.name = std::string(problem_name(id)) + "_" + mode_name(mode);
    using TD = TermDef;
    switch (id) {
        case ProblemId::Burgers: {
            s.lo[0] = -1.0; s.hi[0] = 1.0;  // x
            s.lo[1] = 0.0;  s.hi[1] = 1.0;  // t
            s.terms.push_back({"PDE", TD::Sampler::Interior, TD::Residual::BurgersPde, 2});
            if (mode == Mode::Forward) {
                s.terms.push_back(
                    {"BC_left", TD::Sampler::Edge, TD::Residual::DirichletZero, 0, 0, -1.0});
                s.terms.push_back(
                    {"BC_right", TD::Sampler::Edge, TD::Residual::DirichletZero, 0, 0, 1.0});
                s.terms.push_back({"IC", TD::Sampler::Initial, TD::Residual::BurgersInitial, 0});
            } else {
                s.terms.push_back({"DATA", TD::Sampler::Data, TD::Residual::DataMisfit, 0});
                s.mu_trainable = true;
                s.mu_init = 0.1;
                s.mu_true = s.nu_burgers;
            }
            break;
        }
        case ProblemId::Kirchhoff: {
            s.lo[0] = 0.0; s.hi[0] = s.mat.a;
            s.lo[1] = 0.0; s.hi[1] = s.mat.b;
            // tanh saturates on raw [0,10] inputs; remap to [-1,1].
            s.input_map[0] = {s.mat.a / 2.0, 2.0 / s.mat.a};
            s.input_map[1] = {s.mat.b / 2.0, 2.0 / s.mat.b};
            s.terms.push_back({"PDE", TD::Sampler::Interior, TD::Residual::KirchhoffPde, 4});
            if (mode == Mode::Forward) {
                s.terms.push_back(
                    {"BC_w_x0", TD::Sampler::Edge, TD::Residual::DirichletZero, 0, 0, 0.0});
                s.terms.push_back(
                    {"BC_w_xa", TD::Sampler::Edge, TD::Residual::DirichletZero, 0, 0, s.mat.a});
                s.terms.push_back(
                    {"BC_w_y0", TD::Sampler::Edge, TD::Residual::DirichletZero, 0, 1, 0.0});
                s.terms.push_back(
                    {"BC_w_yb", TD::Sampler::Edge, TD::Residual::DirichletZero, 0, 1, s.mat.b});
                s.terms.push_back({"BC_mx_x0", TD::Sampler::Edge, TD::Residual::MomentX, 2, 0, 0.0});
                s.terms.push_back(
                    {"BC_mx_xa", TD::Sampler::Edge, TD::Residual::MomentX, 2, 0, s.mat.a});
                s.terms.push_back({"BC_my_y0", TD::Sampler::Edge, TD::Residual::MomentY, 2, 1, 0.0});
                s.terms.push_back(
                    {"BC_my_yb", TD::Sampler::Edge, TD::Residual::MomentY, 2, 1, s.mat.b});
            } else {
                s.terms.push_back({"DATA", TD::Sampler::Data, TD::Residual::DataMisfit, 0});
                s.mu_trainable = true;
                s.mu_init = 0.5;
                s.mu_true = s.mat.D();
            }
            break;
        }
        case ProblemId::Helmholtz: {
            s.lo[0] = -1.0; s.hi[0] = 1.0;
            s.lo[1] = -1.0; s.hi[1] = 1.0;
            s.terms.push_back({"PDE", TD::Sampler::Interior, TD::Residual::HelmholtzPde, 2});
            if (mode == Mode::Forward) {
                s.terms.push_back(
                    {"BC_x0", TD::Sampler::Edge, TD::Residual::DirichletZero, 0, 0, -1.0});
                s.terms.push_back(
                    {"BC_x1", TD::Sampler::Edge, TD::Residual::DirichletZero, 0, 0, 1.0});
                s.terms.push_back(
                    {"BC_y0", TD::Sampler::Edge, TD::Residual::DirichletZero, 0, 1, -1.0});
                s.terms.push_back(
                    {"BC_y1", TD::Sampler::Edge, TD::Residual::DirichletZero, 0, 1, 1.0});
            } else {
                s.terms.push_back({"DATA", TD::Sampler::Data, TD::Residual::DataMisfit, 0});
                s.mu_trainable = true;
                s.mu_init = 0.5;
                s.mu_true = s.k_helmholtz;
            }
            break;
        }
    }
    if (mode == Mode::Inverse) generate_measurements(s);
    return s;
}

// --- sampling ----------------------------------------------------------------

CollocationBatch sample_collocation(const ProblemSpec& spec, const BatchSizes& sizes,
                                    std::mt19937_64& rng) {
    CollocationBatch batch;
    batch.per_term.resize(spec.terms.size());
    std::uniform_real_distribution<double> ux(spec.lo[0], spec.hi[0]);
    std::uniform_real_distribution<double> uy(spec.lo[1], spec.hi[1]);
    for (std::size_t ti = 0; ti < spec.terms.size(); ++ti) {
        const auto& td = spec.terms[ti];
        auto& ps = batch.per_term[ti];
        switch (td.sampler) {
            case TermDef::Sampler::Interior: {
                ps.x.resize(sizes.interior);
                ps.y.resize(sizes.interior);
                for (int i = 0; i < sizes.interior; ++i) {
                    ps.x[i] = ux(rng);
                    ps.y[i] = uy(rng);
                }
                break;
            }
            case TermDef::Sampler::Edge: {
                ps.x.resize(sizes.boundary);
                ps.y.resize(sizes.boundary);
                for (int i = 0; i < sizes.boundary; ++i) {
                    if (td.edge_axis == 0) {
                        ps.x[i] = td.edge_value;  // pinned coordinate is exact
                        ps.y[i] = uy(rng);
                    } else {
                        ps.x[i] = ux(rng);
                        ps.y[i] = td.edge_value;
                    }
                }
                break;
            }
            case TermDef::Sampler::Initial: {
                ps.x.resize(sizes.initial);
                ps.y.assign(sizes.initial, 0.0);
                for (int i = 0; i < sizes.initial; ++i) ps.x[i] = ux(rng);
                break;
            }
            case TermDef::Sampler::Data: {
                std::uniform_int_distribution<std::size_t> pick(0, spec.meas_u.size() - 1);
                ps.x.resize(sizes.measurement);
                ps.y.resize(sizes.measurement);
                ps.target.resize(sizes.measurement);
                for (int i = 0; i < sizes.measurement; ++i) {
                    const std::size_t j = pick(rng);
                    ps.x[i] = spec.meas_x[j];
                    ps.y[i] = spec.meas_y[j];
                    ps.target[i] = spec.meas_u[j];
                }
                break;
            }
        }
    }
    return batch;
}

// --- recorded term losses ------------------------------------------------------

namespace {

using LeafFn = std::function<NodeId(int pt, int ix, int iy)>;

NodeId record_residual(Tape& t, const ProblemSpec& spec, const TermDef& td, double x, double y,
                       int pt, const LeafFn& leaf, NodeId mu_node, double target) {
    using R = TermDef::Residual;
    switch (td.residual) {
        case R::BurgersPde: {
            const NodeId u = leaf(pt, 0, 0), ux = leaf(pt, 1, 0);
            const NodeId ut = leaf(pt, 0, 1), uxx = leaf(pt, 2, 0);
            const NodeId s = t.add(ut, t.mul(u, ux));
            const NodeId visc =
                mu_node != kNoNode ? t.mul(mu_node, uxx) : t.scale(uxx, spec.nu_burgers);
            return t.sub(s, visc);
        }
        case R::DirichletZero: return leaf(pt, 0, 0);
        case R::BurgersInitial:
            return t.add(leaf(pt, 0, 0), t.constant(std::sin(kPi * x)));
        case R::KirchhoffPde: {
            const NodeId lap2 =
                t.add(t.add(leaf(pt, 4, 0), t.scale(leaf(pt, 2, 2), 2.0)), leaf(pt, 0, 4));
            const double p = kirchhoff_load(x, y, spec.mat);
            const NodeId load = mu_node != kNoNode ? t.div(t.constant(p), mu_node)
                                                   : t.constant(p / spec.mat.D());
            return t.sub(lap2, load);
        }
        case R::MomentX:
            return t.scale(t.add(leaf(pt, 2, 0), t.scale(leaf(pt, 0, 2), spec.mat.nu)),
                           -spec.mat.D());
        case R::MomentY:
            return t.scale(t.add(t.scale(leaf(pt, 2, 0), spec.mat.nu), leaf(pt, 0, 2)),
                           -spec.mat.D());
        case R::HelmholtzPde: {
            const NodeId lap = t.add(leaf(pt, 2, 0), leaf(pt, 0, 2));
            const NodeId k2u = mu_node != kNoNode
                                   ? t.mul(t.square(mu_node), leaf(pt, 0, 0))
                                   : t.scale(leaf(pt, 0, 0), spec.k_helmholtz * spec.k_helmholtz);
            const double f = helmholtz_forcing(x, y, spec.k_helmholtz);
            return t.sub(t.add(lap, k2u), t.constant(f));
        }
        case R::DataMisfit: return t.sub(leaf(pt, 0, 0), t.constant(target));
    }
    throw ConfigError("unknown residual kind");
}

void record_terms(const ProblemSpec& spec, const CollocationBatch& batch, StepComputation& out,
                  NodeId mu_node, const std::function<LeafFn(int term)>& leaf_for_term,
                  long step) {
    out.term_loss_nodes.clear();
    out.losses.labels = spec.term_labels();
    out.losses.values.assign(spec.terms.size(), 0.0);
    std::vector<NodeId> residuals;
    for (std::size_t ti = 0; ti < spec.terms.size(); ++ti) {
        const auto& td = spec.terms[ti];
        const auto& ps = batch.per_term[ti];
        const LeafFn leaf = leaf_for_term(static_cast<int>(ti));
        residuals.clear();
        residuals.reserve(ps.size());
        for (int pt = 0; pt < ps.size(); ++pt) {
            const double target = ps.target.empty() ? 0.0 : ps.target[pt];
            residuals.push_back(
                record_residual(out.tape, spec, td, ps.x[pt], ps.y[pt], pt, leaf, mu_node, target));
        }
        const NodeId L = out.tape.mean_square(residuals);
        const double lv = out.tape.value(L);
        if (!std::isfinite(lv))
            throw NumericError("term loss '" + td.label + "' is not finite", step);
        out.term_loss_nodes.push_back(L);
        out.losses.values[ti] = lv;
    }
}

}  // namespace

void compute_term_losses(const ProblemSpec& spec, const NetworkConfig& cfg,
                         const ParameterVector& params, const CollocationBatch& batch,
                         const ExecPolicy& exec, StepComputation& out, long step) {
    const int T = static_cast<int>(spec.terms.size());
    if (static_cast<int>(batch.per_term.size()) != T)
        throw ConfigError("collocation batch does not match the problem's terms");
    out.tape.clear();
    out.terms.stores.resize(T);
    out.terms.adjoints.resize(T);
    const NodeId mu_node = spec.mu_trainable ? out.tape.mu_leaf(params.mu()) : kNoNode;
    for (int ti = 0; ti < T; ++ti) {
        const auto& ps = batch.per_term[ti];
        forward_jets(cfg, params, ps.x.data(), ps.y.data(), ps.size(), spec.terms[ti].jet_order,
                     out.terms.stores[ti], exec);
    }
    record_terms(spec, batch, out, mu_node, [&](int ti) -> LeafFn {
        const JetBatchStore& st = out.terms.stores[ti];
        Tape& tape = out.tape;
        return [&st, &tape, ti](int pt, int ix, int iy) {
            const int idx = jet_index(ix, iy);
            const double fact = jet_factorial(ix) * jet_factorial(iy);
            return tape.jet_leaf(ti, pt, idx, st.out[static_cast<std::size_t>(pt) * st.ncoef + idx],
                                 fact);
        };
    }, step);
}

void compute_term_losses_with_field(const ProblemSpec& spec, const AnalyticField& field,
                                    const CollocationBatch& batch, StepComputation& out) {
    out.tape.clear();
    out.terms.stores.clear();
    out.terms.adjoints.clear();
    const NodeId mu_node = spec.mu_trainable ? out.tape.mu_leaf(spec.mu_true) : kNoNode;
    record_terms(spec, batch, out, mu_node, [&](int ti) -> LeafFn {
        const auto& td = spec.terms[ti];
        const auto& ps = batch.per_term[ti];
        Tape& tape = out.tape;
        const AnalyticField& f = field;
        return [&, ti](int pt, int ix, int iy) {
            const DerivativeJet j = f(ps.x[pt], ps.y[pt], std::max(td.jet_order, ix + iy));
            return tape.constant(j(ix, iy));
        };
    }, -1);
}

}  // namespace pinn
