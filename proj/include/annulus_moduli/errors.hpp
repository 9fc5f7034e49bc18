#pragma once

#include <stdexcept>
#include <string>

namespace annulus_moduli {

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A series or product did not reach its tolerance within the term cap.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical routine could not certify its requested accuracy.
// The best available estimate is carried along.
struct AccuracyError : std::runtime_error {
    AccuracyError(const std::string& what, double best = 0.0, double err = 0.0)
        : std::runtime_error(what), best_estimate(best), error_estimate(err) {}
    double best_estimate;
    double error_estimate;
};

namespace detail {

inline void require(bool ok, const char* msg) {
    if (!ok) throw DomainError(msg);
}

}  // namespace detail
}  // namespace annulus_moduli
