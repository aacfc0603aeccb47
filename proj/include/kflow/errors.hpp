#pragma once

#include <stdexcept>
#include <string>

namespace kflow {

// Typed failures surfaced by the library. All carry a human-readable message
// naming the offending quantity (node index, residual, mass defect).

struct PshViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvexityViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MassMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateMetric : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreconditionViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnboundedSequence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotDiverging : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Blowup : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace kflow
