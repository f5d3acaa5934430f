#pragma once

#include <stdexcept>
#include <string>

namespace kljn {

/// Out-of-domain argument, malformed config, or mismatched buffer sizes.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A resistor quad for which the VMG amplitudes have no physical realization.
class NonPhysicalConfiguration : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The slope-matched start search ran out of attempts; the database is too small.
class PairingExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidParameter(what);
}
}  // namespace detail

}  // namespace kljn
