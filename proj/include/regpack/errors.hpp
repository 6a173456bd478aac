#pragma once

#include <stdexcept>
#include <string>

namespace regpack {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
    using Error::Error;
};

// Raised when an ODE right-hand side or state stops being finite.
struct IntegrationBlowup : Error {
    double time;
    IntegrationBlowup(const std::string& msg, double t)
        : Error(msg + " (t=" + std::to_string(t) + ")"), time(t) {}
};

struct NotInvertible : Error {
    using Error::Error;
};

struct AssumptionViolated : Error {
    using Error::Error;
};

struct StabilityViolation : Error {
    using Error::Error;
};

struct WrongRelativeDegree : Error {
    using Error::Error;
};

struct DegenerateRelativeDegree : Error {
    using Error::Error;
};

struct Unsupported : Error {
    using Error::Error;
};

struct NonResonanceSuspected : Error {
    using Error::Error;
};

struct RankDrift : Error {
    using Error::Error;
};

struct BasisIncomplete : Error {
    using Error::Error;
};

struct NoImmersionFound : Error {
    using Error::Error;
};

struct NotHurwitz : Error {
    using Error::Error;
};

} // namespace regpack
