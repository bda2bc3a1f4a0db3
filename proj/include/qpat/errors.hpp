#pragma once

#include <stdexcept>
#include <string>

namespace qpat {

enum class ErrorKind {
    parameter,
    geometry,
    coefficient,
    solver,
    degeneracy,
    input,
    operation,
};

const char* to_string(ErrorKind kind);

// Base of every error raised by the toolkit. The stage tag is filled in by
// the reconstruction pipeline so the CLI can report where a run failed.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& stage() const noexcept { return stage_; }
    void set_stage(std::string stage) { stage_ = std::move(stage); }

private:
    ErrorKind kind_;
    std::string stage_;
};

class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& what) : Error(ErrorKind::parameter, what) {}
};

class GeometryError : public Error {
public:
    explicit GeometryError(const std::string& what) : Error(ErrorKind::geometry, what) {}
};

class CoefficientError : public Error {
public:
    explicit CoefficientError(const std::string& what) : Error(ErrorKind::coefficient, what) {}
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double final_residual, long iterations)
        : Error(ErrorKind::solver, what), final_residual_(final_residual), iterations_(iterations) {}

    double final_residual() const noexcept { return final_residual_; }
    long iterations() const noexcept { return iterations_; }

private:
    double final_residual_;
    long iterations_;
};

class DegeneracyError : public Error {
public:
    DegeneracyError(const std::string& what, long node = -1)
        : Error(ErrorKind::degeneracy, what), node_(node) {}

    // Offending grid node, or -1 when the failure is not tied to a node.
    long node() const noexcept { return node_; }

private:
    long node_;
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

class OperationError : public Error {
public:
    explicit OperationError(const std::string& what) : Error(ErrorKind::operation, what) {}
};

}  // namespace qpat
