#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pra {

// Error taxonomy shared by the library and the CLI exit-code mapping.
struct ArgumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, instances).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A convergence criterion required by an operation does not hold.
struct CriterionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A query the backing data cannot answer (e.g. containment on a
// family without enumeration).
struct UnsupportedQueryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class LogLevel { Quiet, Info, Trace };

// Reads PRA_LOG_LEVEL once; defaults to quiet.
LogLevel log_level();
void log_info(const std::string& msg);

constexpr double kProbTolerance = 1e-9;
constexpr double kRelTolerance = 1e-9;

} // namespace pra
