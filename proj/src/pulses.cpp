#include "lafano/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lafano/constants.hpp"
#include "lafano/errors.hpp"

namespace lafano {

namespace {
constexpr double four_ln2 = 4.0 * std::numbers::ln2;
}

void PulseComponent::validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidArgument("pulse '" + label + "': omega must be > 0");
    if (!(fwhm > 0.0) || !std::isfinite(fwhm)) throw InvalidArgument("pulse '" + label + "': fwhm must be > 0");
    if (!(peak_intensity >= 0.0) || !std::isfinite(peak_intensity))
        throw InvalidArgument("pulse '" + label + "': intensity must be >= 0");
    if (!std::isfinite(center)) throw InvalidArgument("pulse '" + label + "': center must be finite");
}

double PulseComponent::center_au() const { return PhysicalConstants::fs_to_au(center); }
double PulseComponent::fwhm_au() const { return PhysicalConstants::fs_to_au(fwhm); }
double PulseComponent::peak_intensity_au() const { return PhysicalConstants::Wcm2_to_au(peak_intensity); }

double PulseComponent::envelope(double t) const {
    const double x = (t - center_au()) / fwhm_au();
    return std::exp(-four_ln2 * x * x);
}

double PulseComponent::vector_potential(double t) const {
    if (peak_intensity == 0.0) return 0.0;
    return std::sqrt(peak_intensity_au()) / omega * envelope(t) * std::cos(omega * (t - center_au()));
}

double PulseComponent::intensity(double t) const {
    const double g = envelope(t);
    return peak_intensity_au() * g * g;
}

void PulseTrain::validate() const {
    for (const auto& c : components) c.validate();
}

double PulseTrain::vector_potential(double t) const {
    double a = 0.0;
    for (const auto& c : components) a += c.vector_potential(t);
    return a;
}

const PulseComponent* PulseTrain::find(const std::string& label) const {
    for (const auto& c : components)
        if (c.label == label) return &c;
    return nullptr;
}

std::pair<double, double> PulseTrain::window(double fwhm_factor, double margin_au) const {
    if (components.empty()) return {0.0, 0.0};
    const bool any_on = std::any_of(components.begin(), components.end(),
                                    [](const PulseComponent& c) { return c.peak_intensity > 0.0; });
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : components) {
        if (any_on && c.peak_intensity == 0.0) continue;
        lo = std::min(lo, c.center_au() - fwhm_factor * c.fwhm_au());
        hi = std::max(hi, c.center_au() + fwhm_factor * c.fwhm_au());
    }
    return {lo, hi + margin_au};
}

PulseTrain make_helium_train(double tau_fs, double i_ir, double i_h15, double i_h17) {
    const double w = PulseDefaults::omega_ir;
    PulseTrain train;
    train.components.push_back({"IR", w, i_ir, PulseDefaults::fwhm_ir, -tau_fs});
    train.components.push_back({"H15", 15.0 * w, i_h15, PulseDefaults::fwhm_xuv, 0.0});
    train.components.push_back({"H17", 17.0 * w, i_h17, PulseDefaults::fwhm_xuv, 0.0});
    return train;
}

PulseTrain with_delay(PulseTrain train, double tau_fs) {
    for (auto& c : train.components)
        if (c.label == "IR") c.center = -tau_fs;
    return train;
}

double vector_potential(const PulseTrain& train, double t) { return train.vector_potential(t); }

double ponderomotive(double intensity_Wcm2, double omega) {
    if (!(intensity_Wcm2 >= 0.0)) throw InvalidArgument("ponderomotive: intensity must be >= 0");
    if (!(omega > 0.0)) throw InvalidArgument("ponderomotive: omega must be > 0");
    return PhysicalConstants::Wcm2_to_au(intensity_Wcm2) / (4.0 * omega * omega);
}

double product_peak(double tau, double t_ir, double t_xuv) {
    if (!(t_ir > 0.0) || !(t_xuv > 0.0)) throw InvalidArgument("product_peak: durations must be > 0");
    return -tau / (1.0 + (t_ir * t_ir) / (t_xuv * t_xuv));
}

}  // namespace lafano
