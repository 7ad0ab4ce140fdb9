#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace smf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Single source of randomness threaded explicitly through every sampler.
using Rng = std::mt19937_64;

/// Thrown on inconsistent vector/matrix dimensions or invalid arguments.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine cannot produce a valid result
/// (factorization failure, singular moment matrix, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The prediction and measurement sets do not intersect (delta >= 1).
class EmptyIntersection : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// An inverse-measurement map was evaluated outside its domain.
class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Invalid run configuration (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Stable 64-bit mix (splitmix64 finalizer) used to derive per-run seeds.
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

}  // namespace smf
