#pragma once

#include <stdexcept>
#include <string>

namespace pomdpgeo {

/// Base class of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the command-line front end.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message, std::string path = {})
        : std::runtime_error(message), kind_(std::move(kind)), path_(std::move(path)) {}

    const std::string& kind() const noexcept { return kind_; }
    /// Offending input path or parameter name, empty when not applicable.
    const std::string& path() const noexcept { return path_; }

private:
    std::string kind_;
    std::string path_;
};

struct ParseError : Error {
    ParseError(const std::string& message, std::string path)
        : Error("parse", message, std::move(path)) {}
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& message, std::string path = {})
        : Error("dimension", message, std::move(path)) {}
};

struct RankError : Error {
    explicit RankError(const std::string& message, std::string path = {})
        : Error("rank", message, std::move(path)) {}
};

struct ErgodicityError : Error {
    explicit ErgodicityError(const std::string& message)
        : Error("ergodicity", message, "gamma") {}
};

struct PreconditionError : Error {
    explicit PreconditionError(const std::string& message, std::string path = {})
        : Error("precondition", message, std::move(path)) {}
};

struct DegreeExceededError : Error {
    explicit DegreeExceededError(const std::string& message)
        : Error("degree_exceeded", message, "max_degree") {}
};

struct SizeCapError : Error {
    explicit SizeCapError(const std::string& message, std::string path = {})
        : Error("size_cap", message, std::move(path)) {}
};

struct UnsupportedError : Error {
    explicit UnsupportedError(const std::string& message, std::string path = {})
        : Error("unsupported", message, std::move(path)) {}
};

} // namespace pomdpgeo
