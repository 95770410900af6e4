#pragma once

#include <stdexcept>
#include <string>

namespace metacomment {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input data (dataset files, coder files, model files) is malformed.
class DataError : public Error {
public:
    using Error::Error;
};

// A caller broke an operation's precondition (bad shapes, empty inputs, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A model or transformer was used before it was fitted, or with a
// feature registry it was not trained on.
class StateError : public Error {
public:
    using Error::Error;
};

}  // namespace metacomment
