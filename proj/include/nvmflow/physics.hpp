#pragma once

namespace nvmflow::physics {

inline constexpr double q = 1.602176634e-19;        // C
inline constexpr double k_boltzmann = 1.380649e-23; // J/K
inline constexpr double eps0 = 8.8541878128e-12;    // F/m

inline constexpr double eps_si_rel = 11.7;
inline constexpr double eps_ox_rel = 3.9;

} // namespace nvmflow::physics
