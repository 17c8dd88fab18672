#pragma once

#include <cstddef>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lafano/atom.hpp"
#include "lafano/krylov.hpp"
#include "lafano/parallel.hpp"
#include "lafano/pulses.hpp"
#include "lafano/spectrogram.hpp"

namespace lafano {

struct GridSpec {
    double r_max = 100.0;
    int n_elements = 48;
    int order = 12;
    void validate() const;
};

/// Partial-wave coefficients for m = 0, channel l stored at
/// [l * n_radial, (l + 1) * n_radial).
struct SphericalWavefunction {
    std::size_t n_radial = 0;
    int l_max = 0;
    double time = 0.0;  // a.u.
    std::vector<cplx> data;

    SphericalWavefunction() = default;
    SphericalWavefunction(std::size_t n, int l_max_);

    std::span<cplx> channel(int l) { return {data.data() + l * n_radial, n_radial}; }
    std::span<const cplx> channel(int l) const { return {data.data() + l * n_radial, n_radial}; }
    double norm_squared() const;
    double channel_norm_squared(int l) const;
};

/// |<a|b>|^2 for equally shaped wavefunctions.
double fidelity(const SphericalWavefunction& a, const SphericalWavefunction& b);

/// Shared, immutable field-free data of one atom on one grid: channel
/// Hamiltonians, p_z couplings and the box eigenstates. Safe to share
/// between threads.
///
/// With a finite spectral_cutoff (a.u.) the propagation runs in the basis of
/// field-free channel eigenstates below the cutoff. H0 is then diagonal and
/// the stiff part of the grid spectrum, which only sets the Krylov cost, is
/// dropped. An infinite cutoff propagates on the full FE-DVR grid.
class TdseSystem {
public:
    TdseSystem(GridSpec grid, PotentialParams potential, int l_max,
               double spectral_cutoff = std::numeric_limits<double>::infinity());

    const RadialGrid& grid() const noexcept { return grid_; }
    const GridSpec& grid_spec() const noexcept { return spec_; }
    const PotentialParams& potential() const noexcept { return potential_; }
    int l_max() const noexcept { return l_max_; }
    std::size_t n_radial() const noexcept { return grid_.dimension(); }
    const StateTable& states() const noexcept { return states_; }
    const DipoleCoupling& coupling() const noexcept { return coupling_; }
    const ChannelOperator& hamiltonian(int l) const { return h0_.at(l); }

    /// Ground state (lowest l = 0 level), as a wavefunction at t = 0.
    SphericalWavefunction ground_state() const;
    double ground_energy() const;

    /// out = (H0 + A p_z) in, on grid coefficients.
    void apply(std::span<const cplx> in, std::span<cplx> out, double a) const;
    /// out = p_z in, on grid coefficients.
    void apply_pz(std::span<const cplx> in, std::span<cplx> out) const;

    /// Propagation representation: grid coefficients, or eigenbasis
    /// amplitudes below the cutoff.
    bool spectral() const noexcept { return std::isfinite(cutoff_); }
    double spectral_cutoff() const noexcept { return cutoff_; }
    std::size_t working_size() const noexcept;
    std::size_t working_channel_size(int l) const;
    void to_working(const SphericalWavefunction& psi, std::vector<cplx>& w) const;
    void from_working(std::span<const cplx> w, SphericalWavefunction& psi) const;
    void apply_working(std::span<const cplx> in, std::span<cplx> out, double a) const;
    void apply_pz_working(std::span<const cplx> in, std::span<cplx> out) const;

    /// Removes every negative-energy eigenstate component, channel by channel.
    void remove_bound(SphericalWavefunction& psi) const;
    /// Population outside all bound states.
    double continuum_population(const SphericalWavefunction& psi) const;

private:
    GridSpec spec_;
    RadialGrid grid_;
    PotentialParams potential_;
    int l_max_;
    std::vector<ChannelOperator> h0_;
    DipoleCoupling coupling_;
    StateTable states_;
    double cutoff_;
    std::vector<std::size_t> offsets_;           // working-vector channel offsets
    std::vector<Eigen::VectorXd> eig_energies_;  // per channel, below the cutoff
    std::vector<Eigen::MatrixXd> eig_vectors_;   // n x N_l
    std::vector<Eigen::MatrixXd> eig_coupling_;  // N_{l+1} x N_l, (d/dr - (l+1)/r)
};

enum class AbsorberMode { none, mask, split };

std::string to_string(AbsorberMode m);
AbsorberMode absorber_mode_from_string(const std::string& s);

/// Boundary treatment. The shape function is 1 for r < start_fraction r_max
/// and cos(pi/2 x)^exponent on the outer part, x running 0 -> 1.
///
/// mask:  psi <- M psi after every step.
/// split: every split_interval the outer fraction (1 - M) psi is removed
///        and its continuum amplitudes are accumulated with the free phase
///        it would acquire until the end of the window. With
///        volkov_translation the removed piece is first shifted by the
///        remaining field-driven excursion exp(-i p_z int A dt).
struct AbsorberConfig {
    AbsorberMode mode = AbsorberMode::split;
    double start_fraction = 0.5;
    double exponent = 2.0;
    double split_interval = 20.0;  // a.u.
    bool volkov_translation = true;
    double saturation_limit = 1e-3;  // probability allowed in the outermost element

    static AbsorberConfig mask_defaults();
    static AbsorberConfig split_defaults();
    void validate() const;
    /// Shape value at r.
    double shape(double r, double r_max) const;
};

/// Energy-normalised continuum functions of every channel on a fixed energy
/// axis (a.u.). Builds in O(n_E n) per channel.
class ContinuumProjector {
public:
    ContinuumProjector(const TdseSystem& system, std::vector<double> energies_au);

    const std::vector<double>& energies() const noexcept { return energies_; }
    const ContinuumSet& channel(int l) const { return sets_.at(l); }
    std::vector<std::string> warnings() const;

    /// amplitudes[l][i] = <u_{E_i, l}|psi_l>.
    std::vector<std::vector<cplx>> project(const SphericalWavefunction& psi) const;

private:
    std::vector<double> energies_;
    std::vector<ContinuumSet> sets_;
};

struct TdseScenario {
    PulseTrain pulses;
    AbsorberConfig absorber;
    double dt = 0.2;                 // a.u.
    double window_fwhm_factor = 3.0;  // window = pulse centers +- factor FWHM
    double window_margin = 0.0;       // extra free propagation, a.u.
    KrylovOptions krylov;
    void validate() const;
};

struct PropagationResult {
    SphericalWavefunction psi;  // at the end of the window, still in the box
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t steps = 0;
    double absorbed = 0.0;          // probability removed by the absorber
    double max_step_error = 0.0;    // largest Krylov residual estimate
    std::size_t max_krylov_dimension = 0;
    /// Split mode: accumulated sum_s e^{i E t_s} <u_E|piece_s> per channel on
    /// the projector axis. Empty otherwise.
    std::vector<std::vector<cplx>> split_amplitudes;
};

using StepObserver = std::function<void(const SphericalWavefunction&)>;

/// Propagates from the ground state across the scenario window.
/// `projector` is required in split mode. Throws NumericalError (with the
/// failure time) on a non-finite state and BoxTooSmallError when the
/// outermost element holds more than the saturation limit.
PropagationResult propagate(const TdseSystem& system, const TdseScenario& scenario,
                            const ContinuumProjector* projector = nullptr, const StepObserver& observer = {});

/// Propagates a given state over [t0, t0 + n dt] with dt > 0.
PropagationResult propagate_state(const TdseSystem& system, SphericalWavefunction psi, const TdseScenario& scenario,
                                  double t0, double t1, const ContinuumProjector* projector = nullptr,
                                  const StepObserver& observer = {});

/// P(E) = sum_l |<E,l|psi>|^2 from the box eigenstates, each channel's
/// density interpolated linearly onto `energies_eV`. Bound components are
/// ignored by construction. Result per eV. Throws InvalidArgument outside the
/// resolvable window [lowest, highest] box continuum energy of every channel.
std::vector<double> photoelectron_spectrum(const SphericalWavefunction& psi, const StateTable& states,
                                           std::span<const double> energies_eV);

/// Box-eigenstate density points of one channel: (E_n a.u., |c_n|^2/dE_n).
std::vector<std::pair<double, double>> box_channel_spectrum(const SphericalWavefunction& psi,
                                                            const ChannelStates& channel);

/// P(E) per eV on the projector axis from exact-energy continuum projection.
/// Bound states are removed from a copy of psi first; in split mode the
/// accumulated amplitudes are combined coherently with the final in-box part.
std::vector<double> photoelectron_spectrum(const TdseSystem& system, const ContinuumProjector& projector,
                                           const PropagationResult& result);

struct DelayFailure {
    double delay_fs = 0.0;
    std::string message;
};

struct DelayScanResult {
    Spectrogram spectrogram;          // rows only for successful delays
    std::vector<DelayFailure> failures;
    std::vector<double> absorbed;     // per successful delay
    std::vector<double> max_step_error;
};

/// Runs one propagation per delay on `jobs` worker threads. The template's
/// IR component is moved to -tau for each delay. Energy axis in eV.
DelayScanResult delay_scan(const TdseSystem& system, const TdseScenario& scenario_template,
                           std::span<const double> delays_fs, std::span<const double> energies_eV, int jobs = 1);

}  // namespace lafano
