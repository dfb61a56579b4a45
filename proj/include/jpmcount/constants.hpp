#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

namespace jpm {

// CODATA 2018. e, hbar (via h), k_B are exact in the SI; Phi0 = h/2e.
namespace phys {
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kHbar = 1.054571817e-34;              // J s
inline constexpr double kFluxQuantum = 2.067833848e-15;       // Wb
inline constexpr double kBoltzmann = 1.380649e-23;            // J/K
}  // namespace phys

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Ordinary frequency (Hz) <-> angular frequency (rad/s). Configs and reports
// use Hz; everything in between is angular.
constexpr double to_angular(double hz) { return kTwoPi * hz; }
constexpr double to_hz(double angular) { return angular / kTwoPi; }

// A model precondition or physical regime was violated (exit status 1 in the
// CLI). Argument validation uses std::invalid_argument.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace jpm
