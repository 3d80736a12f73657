#ifndef MSGLON_ERROR_HPP
#define MSGLON_ERROR_HPP

#include <stdexcept>
#include <string>

namespace msglon {

/// Shape mismatch between arguments (e.g. a point of the wrong dimension).
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input that parses but breaks a domain invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Request outside what the implementation supports.
class CapabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace msglon

#endif
