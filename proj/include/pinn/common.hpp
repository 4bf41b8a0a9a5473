#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pinn {

#ifdef PINN_SINGLE_PRECISION
using Real = float;
#else
using Real = double;
#endif

// Invalid user-supplied configuration (bad dimensions, unknown ids, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values encountered during evaluation or training.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg, long step = -1)
        : std::runtime_error(step >= 0 ? msg + " (step " + std::to_string(step) + ")" : msg),
          step_index(step) {}
    long step_index;
};

// Thread budget for the batched kernels. threads <= 1 runs serially.
struct ExecPolicy {
    int threads = 0;  // 0 = use OpenMP default
};

}  // namespace pinn
