#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace thickpoints {

/// A point is outside the domain where the operation is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Evaluation at a logarithmic singularity (coincident points).
class SingularityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Lattice discretisation produced no usable interior.
class DiscretizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// A walk exceeded its step cap; indicates a domain bug, never truncated.
class RunawayWalkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientDataError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One or more replications failed; carries their indices.
class ReplicationError : public std::runtime_error {
public:
    ReplicationError(const std::string& what, std::vector<std::size_t> indices)
        : std::runtime_error(what), indices_(std::move(indices)) {}
    const std::vector<std::size_t>& indices() const { return indices_; }

private:
    std::vector<std::size_t> indices_;
};

} // namespace thickpoints
