#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "lafano/atom.hpp"
#include "lafano/pulses.hpp"

namespace lafano {

/// Parameters of the 1s / 3p model. Stark and depletion coefficients are
/// slopes per a.u. of intensity; the instantaneous IR intensity multiplies
/// them. Pathway dipoles are real magnitudes.
struct LevelParams {
    double e_1s = -0.903540;
    double e_3p = -0.055135;
    double delta_1s = 0.0;
    double delta_3p = 0.0;
    double gamma_3p = 0.0;
    double mu_1s3p = 1.0;
    double mu_3pE = 1.0;
    double mu_1sEp = 1.0;
    double mu_EpE = 1.0;
    double continuum_scale = 3.5;  // extra factor on M_con, sets |M_con|/|M_res|; 3.5 matches the TDSE fringe visibility
    double continuum_phase = 0.0;  // extra constant phase on M_con, rad

    /// Slopes from the products quoted at the given peak IR intensity (W/cm^2).
    void set_peak_values(double i_ir_Wcm2, double shift_1s, double shift_3p, double width_3p);
    void validate() const;
};

/// Peak-intensity products of the helium model at 3e12 W/cm^2.
struct LevelDefaults {
    static constexpr double shift_1s = -6.6e-3;
    static constexpr double shift_3p = 2.2e-3;
    static constexpr double width_3p = 4.8e-3;
};

/// |<1s|p_z|3p>| from the model-potential eigenstates on `grid`.
double dipole_1s3p(const RadialGrid& grid, const PotentialParams& potential);

/// Default parameters with mu_1s3p from the atom model (computed once).
LevelParams default_level_params();

struct TwoLevelOptions {
    double dt = 0.05;                 // integrator step, a.u.
    std::size_t output_stride = 5;    // amplitude grid spacing = dt * stride
    double window_fwhm_factor = 3.0;  // time window = pulse centers +- factor FWHM
    double halving_tolerance = 1e-8;
    bool check_halving = true;
    /// If > 0 the IR intensity entering Stark shift and depletion is held at
    /// this value (W/cm^2) instead of following the envelope.
    double constant_ir_intensity = 0.0;
    void validate() const;
};

/// c_1s(t), c_3p(t) on t_k = t0 + k dt.
struct BoundAmplitudes {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<cplx> c_1s;
    std::vector<cplx> c_3p;
    double halving_difference = 0.0;
    std::size_t size() const noexcept { return c_1s.size(); }
    double time(std::size_t k) const noexcept { return t0 + static_cast<double>(k) * dt; }
};

/// RK4 in the interaction picture of the field-free energies. The H15 component
/// drives 1s -> 3p; the IR enters through Stark shifts and 3p depletion. The
/// run is repeated at dt/2 and NumericalError is raised if the amplitudes
/// differ by more than the halving tolerance.
BoundAmplitudes integrate_amplitudes(const LevelParams& params, const PulseTrain& train,
                                     const TwoLevelOptions& options = {});
BoundAmplitudes integrate_amplitudes(const LevelParams& params, const PulseTrain& train, double tau_fs,
                                     const TwoLevelOptions& options = {});

/// mu_3pE * int e^{iEt} A_IR(t) c_3p(t) dt, trapezoid on the amplitude grid.
/// Energies in a.u. Throws InvalidArgument when e^{iEt} has fewer than ten
/// samples per period.
std::vector<cplx> resonant_amplitude(const BoundAmplitudes& amps, const LevelParams& params, const PulseTrain& train,
                                     std::span<const double> energies);

/// pi mu_1sE' mu_E'E * int e^{iEt} A_IR(t) A_H17(t) c_1s(t) dt, with the
/// continuum scale and phase applied.
std::vector<cplx> continuum_amplitude(const BoundAmplitudes& amps, const LevelParams& params, const PulseTrain& train,
                                      std::span<const double> energies);

struct PathwayAmplitudes {
    std::vector<double> energies;  // a.u.
    std::vector<cplx> m_res;
    std::vector<cplx> m_con;
    std::vector<cplx> m_total;
};

PathwayAmplitudes pathway_amplitudes(const LevelParams& params, const PulseTrain& train,
                                     std::span<const double> energies, const TwoLevelOptions& options = {});

/// Final-wave variant: both pathways rescaled by real dipole factors.
PathwayAmplitudes scale_final_wave(const PathwayAmplitudes& a, double res_factor, double con_factor);

/// Rotating-wave form of the two pathways with time-dependent IR intensity:
///   M_res = -i mu_1s3p mu_3pE / (4 w w15) e^{-i w tau}
///           int dt int^t dt' sqrt(I_IR(t) I_15(t'))
///           exp{-i[Phi_3p(t) + w t - E t - Phi_3p(t') + Phi_1s(t') + w15 t']}
///   M_con = pi mu mu / (4 w w17) e^{i w tau}
///           int sqrt(I_IR I_17) exp{-i[-w t - E t + w17 t + Phi_1s(t)]} dt
/// The inner integral is accumulated once as a running sum, so the cost is
/// O(N_t N_E). Honours options.constant_ir_intensity.
PathwayAmplitudes rotating_wave_amplitudes(const LevelParams& params, const PulseTrain& train,
                                           std::span<const double> energies, const TwoLevelOptions& options = {});

/// Closed-form resonant amplitude for a constant IR intensity I (W/cm^2):
///   -i mu_1s3p mu_3pE / (4 w w15) e^{-i w tau} sqrt(I) * i/(D1 + i G/2)
///   * int sqrt(I_15(t)) e^{i D2 t} dt
/// with D1 = E - w - E_3p - delta_3p I, G = gamma_3p I and
/// D2 = E - E_1s - delta_1s I - w - w15. Same normalisation as the
/// resonant term of rotating_wave_amplitudes.
std::vector<cplx> breit_wigner_limit(const LevelParams& params, const PulseTrain& train, double ir_intensity_Wcm2,
                                     std::span<const double> energies, double dt = 0.25);

/// The Lorentzian factor i/(D1 + i G/2).
cplx breit_wigner_prefactor(double delta1, double gamma);

/// One dark-fringe branch: points (tau fs, E eV) where
/// arg M_res - arg M_con = (2n + 1) pi, shifted by `shift` in tau.
struct MinimaCurve {
    int branch = 0;
    std::vector<std::pair<double, double>> points;
};

/// Phase difference arg(M_res) - arg(M_con) on a (tau, E) grid,
/// unwrapped along tau; row-major [tau][E].
struct PhaseMap {
    std::vector<double> delays_fs;
    std::vector<double> energies_eV;
    std::vector<double> phase;
};

PhaseMap phase_difference_map(const LevelParams& params, const PulseTrain& train, std::span<const double> delays_fs,
                              std::span<const double> energies_eV, const TwoLevelOptions& options = {}, int jobs = 1);

/// Crossings of odd multiples of pi along tau, for every energy.
std::vector<MinimaCurve> minima_from_phase(const PhaseMap& map, double shift_fs);

std::vector<MinimaCurve> minima_locus(const LevelParams& params, const PulseTrain& train,
                                      std::span<const double> energies_eV, std::span<const double> delays_fs,
                                      double shift_fs = -0.25, const TwoLevelOptions& options = {}, int jobs = 1);

/// Amplitudes at every delay for the CLI and the analysis checks.
struct TwoLevelScan {
    std::vector<double> delays_fs;
    std::vector<double> energies_eV;
    std::vector<PathwayAmplitudes> amplitudes;  // one per delay
};

TwoLevelScan two_level_scan(const LevelParams& params, const PulseTrain& train, std::span<const double> delays_fs,
                            std::span<const double> energies_eV, const TwoLevelOptions& options = {}, int jobs = 1);

PhaseMap phase_difference_map(const TwoLevelScan& scan);

}  // namespace lafano
