#pragma once

#include <stdexcept>
#include <string>

namespace epifit {

/// Error categories; the CLI maps these onto exit codes.
enum class ErrKind {
    config,   ///< bad flags, invalid configuration, unusable option combinations
    data,     ///< malformed or inconsistent input data
    domain,   ///< argument outside a function's mathematical domain
    numeric,  ///< solver failure, degenerate geometry, loss of precision
    support   ///< parameter state with zero likelihood (e.g. K below observed total)
};

class Error : public std::runtime_error {
public:
    Error(ErrKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrKind kind() const noexcept { return kind_; }

private:
    ErrKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& msg) { throw Error(ErrKind::config, msg); }
[[noreturn]] inline void throw_data(const std::string& msg) { throw Error(ErrKind::data, msg); }
[[noreturn]] inline void throw_domain(const std::string& msg) { throw Error(ErrKind::domain, msg); }
[[noreturn]] inline void throw_numeric(const std::string& msg) { throw Error(ErrKind::numeric, msg); }
[[noreturn]] inline void throw_support(const std::string& msg) { throw Error(ErrKind::support, msg); }

}  // namespace epifit
