#pragma once

// The three benchmark PDEs in forward and inverse form: residuals, boundary
// and initial conditions, reference solutions, collocation sampling, and the
// recorded per-term losses.
//
// Input conventions: Burgers uses (x, t) with x in [-1,1], t in [0,1]; the
// plate and Helmholtz problems use (x, y). Jet multi-indices (ix, iy) follow
// the same order.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pinn/autodiff.hpp"
#include "pinn/balancing.hpp"
#include "pinn/common.hpp"
#include "pinn/kernels.hpp"
#include "pinn/network.hpp"
#include "pinn/tape.hpp"

namespace pinn {

enum class ProblemId { Burgers, Kirchhoff, Helmholtz };
enum class Mode { Forward, Inverse };

const char* problem_name(ProblemId id);
ProblemId problem_from_name(const std::string& s);
const char* mode_name(Mode m);
Mode mode_from_name(const std::string& s);

struct KirchhoffMaterial {
    double a = 10.0;   // m
    double b = 10.0;   // m
    double p0 = 0.015; // MN/m^2
    double E = 30000.0;// MN/m^2
    double h = 0.2;    // m
    double nu = 0.2;
    double D() const { return E * h * h * h / (12.0 * (1.0 - nu * nu)); }  // MN*m
};

// How one term's points are drawn and what residual it records.
struct TermDef {
    enum class Sampler { Interior, Edge, Initial, Data };
    enum class Residual {
        BurgersPde,
        DirichletZero,
        BurgersInitial,
        KirchhoffPde,
        MomentX,
        MomentY,
        HelmholtzPde,
        DataMisfit
    };
    std::string label;
    Sampler sampler;
    Residual residual;
    int jet_order = 0;
    int edge_axis = 0;      // Edge sampler: which coordinate is pinned
    double edge_value = 0;  // ... and to what (exact)
};

struct ProblemSpec {
    ProblemId id;
    Mode mode;
    std::string name;
    double lo[2], hi[2];
    std::vector<TermDef> terms;

    KirchhoffMaterial mat;                 // Kirchhoff
    double nu_burgers = 1.0 / (100.0 * 3.14159265358979323846);
    double k_helmholtz = 1.0;

    bool mu_trainable = false;
    double mu_init = 0.0;
    double mu_true = 0.0;

    // Noise-free measurements on a fixed grid (inverse mode).
    int measurement_grid = 128;
    std::vector<double> meas_x, meas_y, meas_u;

    std::array<InputMap, 2> input_map{};  // identity unless the domain needs it

    std::vector<std::string> term_labels() const;
    double reference(double x, double y) const;
    double mu_squared_error(double mu_hat) const {
        const double d = mu_hat - mu_true;
        return d * d;
    }
};

ProblemSpec make_problem(ProblemId id, Mode mode);

// --- residual and reference evaluators -------------------------------------

double burgers_residual(const DerivativeJet& jet, double nu);
// Cole-Hopf representation for the -sin(pi x) initial condition, evaluated by
// Gauss-Hermite quadrature; node count is doubled until the value moves by
// less than 1e-8. At t = 0 the initial condition is returned exactly.
double burgers_reference(double x, double t, double nu);
double kirchhoff_residual(const DerivativeJet& jet, double D, double load);
std::pair<double, double> kirchhoff_moments(const DerivativeJet& jet, double D, double nu_p);
double kirchhoff_analytical(double x, double y, const KirchhoffMaterial& mat);
double kirchhoff_load(double x, double y, const KirchhoffMaterial& mat);
double helmholtz_residual(const DerivativeJet& jet, double k, double forcing);
double helmholtz_forcing(double x, double y, double k);
double helmholtz_analytical(double x, double y);

// --- collocation ------------------------------------------------------------

struct BatchSizes {
    int interior = 1024;
    int boundary = 256;  // per boundary segment
    int initial = 256;
    int measurement = 512;
};

struct PointSet {
    std::vector<double> x, y;
    std::vector<double> target;  // data terms only
    int size() const { return static_cast<int>(x.size()); }
};

struct CollocationBatch {
    std::vector<PointSet> per_term;
};

CollocationBatch sample_collocation(const ProblemSpec& spec, const BatchSizes& sizes,
                                    std::mt19937_64& rng);

// --- recorded term losses ----------------------------------------------------

struct StepComputation {
    Tape tape;
    StepTerms terms;
    std::vector<NodeId> term_loss_nodes;
    LossVector losses;
};

// Forwards every term's batch through the jet kernels and records each term
// loss (mean squared residual/condition/misfit) on the tape. Throws
// NumericError if a term loss is not finite.
void compute_term_losses(const ProblemSpec& spec, const NetworkConfig& cfg,
                         const ParameterVector& params, const CollocationBatch& batch,
                         const ExecPolicy& exec, StepComputation& out, long step = -1);

// Test/oracle hook: identical tape construction, but the output jets come
// from a closed-form field instead of the network.
using AnalyticField = std::function<DerivativeJet(double, double, int)>;
void compute_term_losses_with_field(const ProblemSpec& spec, const AnalyticField& field,
                                    const CollocationBatch& batch, StepComputation& out);

}  // namespace pinn
