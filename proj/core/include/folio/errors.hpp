#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace folio {

// Error kinds roll up into three CLI-facing categories:
//   io (exit 2), config (exit 3), numeric (exit 4).
enum class ErrorKind {
    Io,
    Parse,
    Data,
    InsufficientData,
    Config,
    Contract,
    Training,
    Numeric,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    const char* category() const noexcept {
        switch (kind_) {
            case ErrorKind::Io:
            case ErrorKind::Parse:
            case ErrorKind::Data:
            case ErrorKind::InsufficientData:
                return "io";
            case ErrorKind::Config:
            case ErrorKind::Contract:
                return "config";
            case ErrorKind::Training:
            case ErrorKind::Numeric:
                return "numeric";
        }
        return "numeric";
    }

    int exit_code() const noexcept {
        const std::string_view c = category();
        if (c == "io") return 2;
        if (c == "config") return 3;
        return 4;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace folio
