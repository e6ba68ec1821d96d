#ifndef CAMAC_ERRORS_HPP
#define CAMAC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace camac {

// Error taxonomy used across the library. Each maps to one failure class:
// shapes, configs, runtime state, argument domains, buffers, file I/O and
// file formats, numeric evaluation, and violated invariants.

struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error("shape error: " + what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error("config error: " + what) {}
};

struct StateError : std::runtime_error {
    explicit StateError(const std::string& what) : std::runtime_error("state error: " + what) {}
};

struct ArgumentError : std::runtime_error {
    explicit ArgumentError(const std::string& what) : std::runtime_error("argument error: " + what) {}
};

struct ActionError : std::runtime_error {
    explicit ActionError(const std::string& what) : std::runtime_error("action error: " + what) {}
};

struct BufferError : std::runtime_error {
    explicit BufferError(const std::string& what) : std::runtime_error("buffer error: " + what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error("io error: " + what) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error("format error: " + what) {}
};

struct EvalError : std::runtime_error {
    explicit EvalError(const std::string& what) : std::runtime_error("evaluation error: " + what) {}
};

struct InvariantError : std::runtime_error {
    explicit InvariantError(const std::string& what) : std::runtime_error("invariant error: " + what) {}
};

}  // namespace camac

#endif
