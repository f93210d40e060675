#pragma once

#include <stdexcept>
#include <string>

namespace xrsim {

/// Invalid scenario or parameter value. `field()` holds the dotted config
/// path of the offending key when one is known.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message, std::string field = {})
        : std::runtime_error(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A broken engine contract (event order, RB conservation, ...). Aborts the run.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace xrsim
