// errors.hpp - exception types shared by the qrb library and CLI

#pragma once

#include <stdexcept>
#include <string>

namespace qrb {

// Base of everything thrown by qrb. The CLI maps the three families below to
// exit codes 2 (invalid input), 3 (physics) and 4 (I/O).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class PhysicsError : public Error {
public:
    using Error::Error;
};

class IoFailure : public Error {
public:
    using Error::Error;
};

class UnknownPreset : public InvalidInput {
public:
    explicit UnknownPreset(const std::string& name)
        : InvalidInput("unknown preset '" + name + "'") {}
};

class DimensionMismatch : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class InvalidDivisor : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

class DegenerateParity : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

class NonUniqueSteadyState : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

class NoEmission : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

class NoCrossingFound : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

}  // namespace qrb
