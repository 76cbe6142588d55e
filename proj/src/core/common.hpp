#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace gm {

// Error taxonomy shared across modules. Codes group into the three CLI exit
// classes: config (2), numeric (3), usage (4).
enum class ErrorCode {
    NonHermitian,
    UnsupportedOrder,
    GridMismatch,
    NonPositiveEpsilon,
    ExpOverflow,
    DegenerateVectorPart,
    NotDecoupled,
    NonPositiveDensity,
    PolarizationOverflow,
    NewtonDivergence,
    DomainError,
    OdeInstability,
    TailMass,
    OriginSingularity,
    StepRejected,
    DtUnderflow,
    ParseError,
    ValidationError,
    IoError,
    Internal,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const { return code_; }
    bool is_config() const {
        return code_ == ErrorCode::ParseError || code_ == ErrorCode::ValidationError;
    }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

inline void warn(const std::string& msg) {
    std::fprintf(stderr, "[graphene-moments] warning: %s\n", msg.c_str());
}

}  // namespace gm
