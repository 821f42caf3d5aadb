#pragma once

#include <stdexcept>
#include <string>

namespace presstop {

// Linear solver breakdown (singular block, failed factorization, bad residual).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// MMA dual iteration failed to converge; carries the last KKT residual.
class OptimizerError : public SolverError {
public:
    OptimizerError(const std::string& what, double kkt_residual)
        : SolverError(what), kkt_residual_(kkt_residual) {}
    double kkt_residual() const { return kkt_residual_; }

private:
    double kkt_residual_ = 0.0;
};

// Filesystem failure while writing results; message carries the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace presstop
