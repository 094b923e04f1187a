#pragma once

#include <stdexcept>
#include <string>

namespace fbsdelab {

struct InvalidCoefficientError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MollificationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EllipticityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PicardDivergenceError : std::runtime_error {
    PicardDivergenceError(const std::string& msg, double residual)
        : std::runtime_error(msg), last_residual(residual) {}
    double last_residual;
};

struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigurationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutOfNodalSetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct WeightOverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientSampleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fbsdelab
