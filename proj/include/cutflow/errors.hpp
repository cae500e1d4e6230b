#pragma once

#include <stdexcept>
#include <string>

namespace cutflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad user input: mesh sizes, level-set parameters, config keys
struct InvalidArgument : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct GeometryError : Error {
    using Error::Error;
};

// interface pattern inside a triangle that the decomposition cannot represent
struct TopologyError : GeometryError {
    using GeometryError::GeometryError;
};

struct NumericalError : Error {
    using Error::Error;
};

struct SingularMatrixError : NumericalError {
    SingularMatrixError(const std::string& what, std::string blk, int row)
        : NumericalError(what), block(std::move(blk)), index(row) {}
    std::string block;
    int index;
};

struct NewtonError : NumericalError {
    using NumericalError::NumericalError;
};

} // namespace cutflow
