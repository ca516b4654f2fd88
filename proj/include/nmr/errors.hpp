#pragma once

#include <stdexcept>
#include <string>

namespace nmr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Parameter outside its admissible domain (e.g. u outside [0,1]).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Shapes or lengths of cooperating inputs disagree.
class ContractViolation : public Error {
public:
    using Error::Error;
};

class SingularSystemError : public Error {
public:
    using Error::Error;
};

/// The control net spans no area, so closest-point projection is undefined.
class DegenerateSurfaceError : public Error {
public:
    using Error::Error;
};

class IllConditionedJacobianError : public Error {
public:
    IllConditionedJacobianError(const std::string& what, double condition)
        : Error(what), condition_(condition) {}
    double condition_number() const noexcept { return condition_; }

private:
    double condition_;
};

/// A tangent vanished along an arc-length integration path.
class DegenerateMetricError : public Error {
public:
    using Error::Error;
};

class OutOfRangeError : public Error {
public:
    OutOfRangeError(const std::string& what, double total_length)
        : Error(what), total_length_(total_length) {}
    double total_length() const noexcept { return total_length_; }

private:
    double total_length_;
};

/// The backprojection ray never meets the assumed ground plane.
class DivergentGeometryError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace nmr
