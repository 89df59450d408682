#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace echosim {

using Index = std::int64_t;

template <typename Scalar>
using Complex = std::complex<Scalar>;

// Internal frequencies are angular, rad/us. Configuration speaks ordinary kHz.
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double khz_to_angular(double khz) { return kTwoPi * khz * 1e-3; }
constexpr double angular_to_khz(double rad_per_us) { return rad_per_us / kTwoPi * 1e3; }

// Error categories map one-to-one onto CLI exit codes.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace echosim
