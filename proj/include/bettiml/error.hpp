#pragma once

#include <stdexcept>
#include <string>

namespace bettiml {

// All recoverable failures (bad input files, contract violations on
// user-supplied data) surface as this type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bettiml
