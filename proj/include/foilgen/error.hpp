#pragma once

#include <stdexcept>
#include <string>

namespace foilgen {

// Exception hierarchy shared by every module. Callers that only care about
// "something in foilgen failed" catch foilgen::Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

// Wrong vector length / point count for a shape.
class ShapeError : public Error {
public:
    using Error::Error;
};

class DegenerateShapeError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

// Iterative optimizer did not converge; subclasses attach the best point found.
class OptimizationError : public Error {
public:
    using Error::Error;
};

// Non-finite loss or gradient during training.
class TrainingError : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

class ModelError : public Error {
public:
    using Error::Error;
};

// Precondition violated by a model input (e.g. latent vector off the sphere).
class InputError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ChecksumError : public FormatError {
public:
    using FormatError::FormatError;
};

}  // namespace foilgen
