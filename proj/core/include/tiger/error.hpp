#pragma once

#include <stdexcept>
#include <string>

namespace tiger {

// Every failure raised by the library derives from Error. The CLI maps the
// category onto its exit code, so new subclasses must pick one.
enum class ErrorCategory { usage, data, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& module, const std::string& what)
        : std::runtime_error(module + ": " + what), category_(category), module_(module) {}

    ErrorCategory category() const noexcept { return category_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorCategory category_;
    std::string module_;
};

struct ShapeError : Error {
    ShapeError(const std::string& module, const std::string& what)
        : Error(ErrorCategory::numerical, module, "shape error: " + what) {}
};

struct ContractError : Error {
    ContractError(const std::string& module, const std::string& what)
        : Error(ErrorCategory::usage, module, "contract violated: " + what) {}
};

struct ConfigError : Error {
    ConfigError(const std::string& module, const std::string& what)
        : Error(ErrorCategory::usage, module, "configuration error: " + what) {}
};

struct IngestionError : Error {
    IngestionError(const std::string& module, const std::string& what)
        : Error(ErrorCategory::data, module, "ingestion error: " + what) {}
};

struct LookupError : Error {
    LookupError(const std::string& module, const std::string& what)
        : Error(ErrorCategory::data, module, "lookup error: " + what) {}
};

struct GenerationError : Error {
    GenerationError(const std::string& module, const std::string& what)
        : Error(ErrorCategory::data, module, "generation error: " + what) {}
};

struct NumericalError : Error {
    NumericalError(const std::string& module, const std::string& what)
        : Error(ErrorCategory::numerical, module, "numerical error: " + what) {}
};

struct TrainingError : Error {
    TrainingError(const std::string& module, const std::string& what)
        : Error(ErrorCategory::numerical, module, "training error: " + what) {}
};

}  // namespace tiger
