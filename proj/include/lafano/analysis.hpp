#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "lafano/spectrogram.hpp"

namespace lafano {

/// Local fit a + 2b cos(2 w tau + phi) at every (delay, energy) point,
/// stored delay-major like Spectrogram.
struct FitField {
    std::vector<double> energies_eV;
    std::vector<double> delays_fs;
    double omega = 0.0;  // a.u.
    double tau_w = 0.0;  // fs
    std::vector<double> a;
    std::vector<double> b;         // >= 0
    std::vector<double> phi;       // (-pi, pi] unless unwrapped
    std::vector<double> residual;  // weighted residual norm
    std::vector<std::uint8_t> valid;

    std::size_t n_energies() const noexcept { return energies_eV.size(); }
    std::size_t n_delays() const noexcept { return delays_fs.size(); }
    std::size_t index(std::size_t it, std::size_t ie) const noexcept { return it * energies_eV.size() + ie; }
};

/// Weighted linear least squares on {1, cos 2w tau_i, sin 2w tau_i} with
/// weights exp(-(tau - tau_i)^2 / tau_w^2), evaluated at every delay sample.
/// a = c0, b = sqrt(cc^2 + cs^2) / 2, phi = atan2(-cs, cc). A point is
/// invalid when its neighbourhood |tau_i - tau| <= 2 tau_w is sampled
/// coarser than pi/(2w) or the local system is rank deficient.
FitField local_cosine_fit(const Spectrogram& spec, double omega, double tau_w_fs);

enum class FitAxis { energy, delay };

/// Removes 2 pi jumps of phi along one axis; invalid points are skipped.
FitField unwrap_phase(FitField field, FitAxis axis);

/// Time-domain resonant wave packet per delay, [delay][time].
struct WavePacketMap {
    std::vector<double> times_fs;
    std::vector<double> delays_fs;
    std::vector<std::complex<double>> values;
    std::vector<std::pair<double, double>> track;  // (tau, t_peak) in fs

    std::complex<double> at(std::size_t it, std::size_t k) const { return values[it * times_fs.size() + k]; }
};

struct ReconstructionOptions {
    double e_c = 0.34;  // eV
    double alpha = 4.0;
    double t_min = -60.0;  // fs
    double t_max = 60.0;
    double t_step = 0.1;
    double con_floor = 1e-6;      // relative to max |M_con| on the filter support
    double support_weight = 1e-12;  // filter values below this are outside the support
    double track_floor = 1e-8;    // relative to the global map maximum
    void validate() const;
};

/// M_res(t; tau) = sum_i e^{-i E_i t} b e^{-i(phi + 2 w tau)} / conj(M_con(E_i; tau))
///                 * exp(-(E_i/E_c)^alpha) dE.
/// With phi from the a + 2b cos(2 w tau + phi) form, -(phi + 2 w tau) is the
/// phase of M_res M_con^*, so the sum returns M_res itself on the support.
/// m_con[it][ie] is the continuum-pathway model at the fit grid points.
/// Throws NumericalError when |M_con| falls below the floor on the support
/// and InvalidArgument when the fit is invalid there.
WavePacketMap reconstruct_wavepacket(const FitField& fit, const std::vector<std::vector<std::complex<double>>>& m_con,
                                     const ReconstructionOptions& options = {});

/// Per-delay argmax of |M| with parabolic refinement. Delays whose maximum
/// is below floor * (global max) give no point.
std::vector<std::pair<double, double>> peak_track(const WavePacketMap& map, double floor = 1e-8);

/// Location of the maximum of |f| on a uniform axis with parabolic refinement.
double refined_peak(const std::vector<double>& axis, const std::vector<double>& magnitude);

/// a.csv, b.csv, phi.csv, mask.csv, residual.csv in `dir`.
void write_fit_field(const std::filesystem::path& dir, const FitField& field);
/// amplitude.csv, phase.csv, peak_track.csv in `dir`.
void write_wavepacket(const std::filesystem::path& dir, const WavePacketMap& map);

}  // namespace lafano
