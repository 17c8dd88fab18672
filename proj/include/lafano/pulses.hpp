#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lafano {

/// One Gaussian-enveloped carrier. Lab units: W/cm^2 and fs; omega in a.u.
/// The field envelope falls to one half at center +- fwhm/2.
struct PulseComponent {
    std::string label = "custom";  // IR, H15, H17 or custom
    double omega = 0.0;            // a.u.
    double peak_intensity = 0.0;   // W/cm^2
    double fwhm = 0.0;             // fs
    double center = 0.0;           // fs

    void validate() const;

    /// exp(-4 ln2 ((t - center)/fwhm)^2), t in a.u.
    double envelope(double t) const;
    /// sqrt(I)/omega * envelope * cos(omega (t - center)), a.u.
    double vector_potential(double t) const;
    /// Instantaneous intensity I(t) = I_peak envelope^2, a.u.
    double intensity(double t) const;
    double peak_intensity_au() const;
    double center_au() const;
    double fwhm_au() const;
};

/// Defaults of the helium scenario.
struct PulseDefaults {
    static constexpr double omega_ir = 0.05703;
    static constexpr double fwhm_ir = 31.0;
    static constexpr double fwhm_xuv = 12.0;
    static constexpr double intensity_ir = 3e12;
    static constexpr double intensity_xuv = 1e12;
};

/// Sum of components. Delay convention: the IR is centred at -tau and the
/// harmonics at 0, so a negative delay puts the IR after the XUV.
struct PulseTrain {
    std::vector<PulseComponent> components;

    void validate() const;
    double vector_potential(double t) const;
    const PulseComponent* find(const std::string& label) const;

    /// [min_i(center_i - factor T_i), max_i(center_i + factor T_i) + margin] in a.u.,
    /// over components with nonzero intensity (all components if none are on).
    std::pair<double, double> window(double fwhm_factor = 3.0, double margin_au = 0.0) const;
};

/// IR + H15 + H17 at the given delay (fs) with the default parameters.
/// Intensities in W/cm^2.
PulseTrain make_helium_train(double tau_fs, double i_ir = PulseDefaults::intensity_ir,
                             double i_h15 = PulseDefaults::intensity_xuv, double i_h17 = PulseDefaults::intensity_xuv);

/// Moves the IR component to -tau (fs).
PulseTrain with_delay(PulseTrain train, double tau_fs);

double vector_potential(const PulseTrain& train, double t);

/// U_p = I/(4 omega^2), intensity in W/cm^2, result in a.u.
double ponderomotive(double intensity_Wcm2, double omega);

/// Peak of the IR x XUV envelope product for the IR at -tau:
/// tau* = -tau / (1 + T_ir^2 / T_xuv^2). All in fs.
double product_peak(double tau, double t_ir, double t_xuv);

}  // namespace lafano
