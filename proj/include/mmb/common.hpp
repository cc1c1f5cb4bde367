#pragma once

#include <stdexcept>
#include <string>

namespace mmb {

// Error taxonomy used by the CLI to map failures to exit codes:
// config_error -> 1, data_error (and subclasses) -> 2, anything else -> 3.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Target not reachable from the source (or the two endpoints are
// disconnected). Deliberately a distinct type, never a sentinel value.
class unreachable_error : public data_error {
public:
    using data_error::data_error;
};

// Simple-path enumeration exceeded its configured cap.
class path_cap_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mmb
