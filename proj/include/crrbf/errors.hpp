#pragma once

#include <stdexcept>
#include <string>

namespace crrbf {

// Malformed input file (bad cell, ragged row, ...). Messages carry the
// file path and 1-based line number where available.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Structurally valid input that violates a domain invariant (single-class
// dataset, non-finite feature, class too small for the fold count, ...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace crrbf
