#pragma once

#include <stdexcept>
#include <string>

namespace attrib {

/// Invalid arguments, malformed configuration, or violated preconditions.
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data (panels, files).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A pricing model was evaluated outside its domain.
struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Failure writing or renaming an output file.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace attrib
