#pragma once

#include <stdexcept>
#include <string>

namespace dagforge {

// Exit-code taxonomy shared by the whole toolchain:
// 0 ok, 1 validation, 2 execution, 3 provider, 4 usage.
enum class ErrorKind { Validation = 1, Execution = 2, Provider = 3, Usage = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }
    int exit_code() const { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error(ErrorKind::Validation, m) {}
};
struct ExecutionError : Error {
    explicit ExecutionError(const std::string& m) : Error(ErrorKind::Execution, m) {}
};
struct ProviderError : Error {
    explicit ProviderError(const std::string& m) : Error(ErrorKind::Provider, m) {}
};
struct UsageError : Error {
    explicit UsageError(const std::string& m) : Error(ErrorKind::Usage, m) {}
};

}  // namespace dagforge
