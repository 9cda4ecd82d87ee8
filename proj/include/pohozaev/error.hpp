#pragma once

#include <stdexcept>
#include <string>

namespace pohozaev {

enum class ErrorKind {
    NonFiniteValue,
    PhiNonpositive,
    BracketNotFound,
    NotOnManifold,
    GridTooCoarse,
    NonadmissibleExponents,
    EpsilonTooLarge,
    PhiNeverPositive,
    NoConvergence,
    MissingGradient,
    ParseError,
    ValidationError,
    Io,
};

const char* kind_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(kind_name(kind)) + ": " + message), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace pohozaev
