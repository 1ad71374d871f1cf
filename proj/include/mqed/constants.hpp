#pragma once

#include <string>

// CODATA 2018, SI.
namespace mqed::constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double c = 299792458.0;                 // m s^-1
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double epsilon0 = 8.8541878128e-12;     // F m^-1
inline constexpr double mu0 = 1.25663706212e-6;          // N A^-2
inline constexpr double e = 1.602176634e-19;             // C
inline constexpr double a0 = 5.29177210903e-11;          // m
inline constexpr double mu_B = 9.2740100783e-24;         // J T^-1

// Atomic-unit moments used on the input boundary.
inline constexpr double dipole_au = e * a0;              // C m
inline constexpr double quadrupole_au = e * a0 * a0;     // C m^2

inline constexpr double THz = 1e12;

} // namespace mqed::constants

namespace mqed {

// Converts an ordinary frequency in THz to an angular frequency in rad/s.
double thz_to_rad_per_s(double f_thz);

// Parses "384THz", "2.41e15rad/s" (suffix mandatory) into rad/s.
double parse_frequency(const std::string &text);

} // namespace mqed
