#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace censadd {

/// Base for every error raised by the library. The CLI maps the
/// subclasses onto exit codes (see exit_code()).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 3; }
};

/// Malformed input data or configuration (exit code 1).
class InputError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 1; }
};

class UnknownFamily : public InputError {
public:
    using InputError::InputError;
};

class OrderInfeasible : public InputError {
public:
    using InputError::InputError;
};

class InfeasibleExponent : public InputError {
public:
    using InputError::InputError;
};

class AxisOutOfRange : public InputError {
public:
    using InputError::InputError;
};

/// A modelling assumption failed on the data at hand (exit code 2).
class AssumptionViolated : public Error {
public:
    AssumptionViolated(std::string clause, const std::string& what)
        : Error(clause + ": " + what), clause_(std::move(clause)) {}
    const std::string& clause() const noexcept { return clause_; }
    int exit_code() const noexcept override { return 2; }

private:
    std::string clause_;
};

/// Some uncensored observation with psi(Z_i) != 0 has G_n(Z_i) = 0.
class CensoringDegenerate : public Error {
public:
    CensoringDegenerate(std::size_t index, const std::string& what)
        : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }
    int exit_code() const noexcept override { return 2; }

private:
    std::size_t index_;
};

/// The density estimate at a contributing sample point fell below the floor.
class DensityFloorHit : public Error {
public:
    explicit DensityFloorHit(std::vector<std::size_t> indices);
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }

private:
    std::vector<std::size_t> indices_;
};

class GridTooCoarse : public Error {
public:
    using Error::Error;
};

class NonpositiveVariance : public Error {
public:
    using Error::Error;
};

}  // namespace censadd
