#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oabe {

/// Malformed input file. `row()` is the 1-based line number in the source (0 when unknown).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t row)
        : std::runtime_error(what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedColumnError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ParameterError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

} // namespace oabe
