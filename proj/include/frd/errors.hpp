#ifndef FRD_ERRORS_HPP
#define FRD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace frd {

// All failure modes carry a stable machine-readable code plus a human message.
// The CLI maps the code into the structured error output and a nonzero exit.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct EmptyInterior : Error {
    explicit EmptyInterior(const std::string& m) : Error("EmptyInterior", m) {}
};
struct SolverFailure : Error {
    explicit SolverFailure(const std::string& m) : Error("SolverFailure", m) {}
};
struct StepCapExceeded : Error {
    explicit StepCapExceeded(const std::string& m) : Error("StepCapExceeded", m) {}
};
struct DegenerateBump : Error {
    explicit DegenerateBump(const std::string& m) : Error("DegenerateBump", m) {}
};
struct PoleAtZero : Error {
    explicit PoleAtZero(const std::string& m) : Error("PoleAtZero", m) {}
};
struct TorusTooSmall : Error {
    explicit TorusTooSmall(const std::string& m) : Error("TorusTooSmall", m) {}
};
struct NegativeSpectrumBeyondTolerance : Error {
    explicit NegativeSpectrumBeyondTolerance(const std::string& m)
        : Error("NegativeSpectrumBeyondTolerance", m) {}
};
struct ToleranceUnreachable : Error {
    explicit ToleranceUnreachable(const std::string& m) : Error("ToleranceUnreachable", m) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("ConfigError", m) {}
};

} // namespace frd

#endif
