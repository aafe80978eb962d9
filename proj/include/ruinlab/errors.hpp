#pragma once

#include <stdexcept>
#include <string>

namespace ruinlab {

// Bad or unreadable input data (files, rows, configuration values).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical procedure could not produce a result (no root bracket,
// degenerate binning, unbounded parameter, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ruinlab
