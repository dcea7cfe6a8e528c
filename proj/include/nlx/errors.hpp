#pragma once

#include <stdexcept>
#include <string>

namespace nlx {

// Exit-code taxonomy used by the CLI: 0 ok, 1 audit failure, 2 config/input
// error, 3 resolution (grid-coupling) error, 4 optimizer non-convergence.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct resolution_error : std::runtime_error {
    double required_min_eps;
    resolution_error(const std::string& msg, double req)
        : std::runtime_error(msg), required_min_eps(req) {}
};

// A sampled point where the vector kernel is nonzero but the scalar kernel
// vanishes: the bounded-ratio assumption cannot hold there.
struct ratio_violation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct degenerate_projection_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nlx
