#pragma once

// Verification suite backing the numeric expectations used in the tests:
// finite-difference agreement of jets and gradients, quadrature/grid-solver
// agreement for the Burgers reference, analytical residual substitutions,
// and optimizer identities. Each check reports its measured value next to
// its tolerance.

#include <string>
#include <vector>

namespace pinn {

struct OracleCheck {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct OracleOptions {
    // Negative-control fixture: flips the sign of the tanh third-derivative
    // entry used by the activation-composition check, which must then fail.
    bool corrupt_tanh_third = false;
};

std::vector<OracleCheck> oracle_suite(const OracleOptions& opts = {});

}  // namespace pinn
