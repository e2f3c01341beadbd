#ifndef SMVBS_ERRORS_HPP
#define SMVBS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace smvbs {

// All library failures derive from Error so callers can catch one type.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Two retained singular values (or eigenvalues) coincide; the distinct-value
// manifold assumption fails.
struct DegenerateSpectrum : Error {
    explicit DegenerateSpectrum(const std::string& msg) : Error(msg) {}
};

// Argument outside the mathematical domain of the operation.
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Evaluation point does not lie on the support manifold of the distribution.
struct SupportError : Error {
    explicit SupportError(const std::string& msg) : Error(msg) {}
};

// Generator shape parameters fail the radial integrability check.
struct NotIntegrable : Error {
    explicit NotIntegrable(const std::string& msg) : Error(msg) {}
};

// A finite-difference probe left the manifold beyond tolerance.
struct RankDrop : Error {
    explicit RankDrop(const std::string& msg) : Error(msg) {}
};

// Inverting the matrix transform did not reproduce the input on the
// forward pass.
struct RoundTripError : Error {
    explicit RoundTripError(const std::string& msg) : Error(msg) {}
};

struct SingularC : Error {
    explicit SingularC(const std::string& msg) : Error(msg) {}
};

// Requested kernel kind has no exact sampler.
struct UnsupportedKernel : Error {
    explicit UnsupportedKernel(const std::string& msg) : Error(msg) {}
};

// Adaptive integration failed to converge to the requested tolerance.
struct QuadratureFailure : Error {
    explicit QuadratureFailure(const std::string& msg) : Error(msg) {}
};

// Monte Carlo goodness-of-fit rejected.
struct GoFFailure : Error {
    explicit GoFFailure(const std::string& msg) : Error(msg) {}
};

// Malformed input file or configuration.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace smvbs

#endif  // SMVBS_ERRORS_HPP
