#pragma once

#include <stdexcept>
#include <string>

namespace modnet {

/// Broad failure category. The CLI maps each kind to its exit code.
enum class ErrorKind {
    Usage,      // bad arguments or configuration (exit 1)
    Data,       // unreadable, malformed or mismatched input (exit 2)
    Numerical,  // divergence, non-convergence, undefined quantities (exit 3)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error usage_error(const std::string& what) { return {ErrorKind::Usage, what}; }
inline Error data_error(const std::string& what) { return {ErrorKind::Data, what}; }
inline Error numerical_error(const std::string& what) { return {ErrorKind::Numerical, what}; }

inline int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return 1;
        case ErrorKind::Data: return 2;
        case ErrorKind::Numerical: return 3;
    }
    return 1;
}

}  // namespace modnet
