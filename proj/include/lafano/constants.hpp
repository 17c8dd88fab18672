#pragma once

#include <numbers>

namespace lafano {

/// Unit conversions between atomic units and the lab units used in files
/// (eV, fs, W/cm^2). Every conversion in the library goes through here.
struct PhysicalConstants {
    static constexpr double hartree_to_eV = 27.211386;
    static constexpr double au_time_to_fs = 0.02418884;
    static constexpr double au_intensity_Wcm2 = 3.50945e16;

    static constexpr double eV_to_au(double e) { return e / hartree_to_eV; }
    static constexpr double au_to_eV(double e) { return e * hartree_to_eV; }
    static constexpr double fs_to_au(double t) { return t / au_time_to_fs; }
    static constexpr double au_to_fs(double t) { return t * au_time_to_fs; }
    static constexpr double Wcm2_to_au(double i) { return i / au_intensity_Wcm2; }
};

inline constexpr double pi = std::numbers::pi;

}  // namespace lafano
