#ifndef CSLPROBE_CONSTANTS_HPP
#define CSLPROBE_CONSTANTS_HPP

#include <numbers>
#include <string_view>

namespace cslprobe::constants {

inline constexpr std::string_view version = "CODATA-2018";

inline constexpr double pi = std::numbers::pi;
inline constexpr double c = 299'792'458.0;               // m/s
inline constexpr double hbar = 1.054'571'817e-34;        // J s
inline constexpr double k_B = 1.380'649e-23;             // J/K
inline constexpr double amu = 1.660'539'066'60e-27;      // kg
inline constexpr double torr = 133.322;                  // Pa

} // namespace cslprobe::constants

#endif // CSLPROBE_CONSTANTS_HPP
