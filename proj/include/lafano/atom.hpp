#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lafano/eigensolve.hpp"
#include "lafano/grid.hpp"
#include "lafano/operators.hpp"

namespace lafano {

/// Single-active-electron helium potential
///   V(r) = -(z + a1 e^{-a2 r} + a3 r e^{-a4 r} + a5 e^{-a6 r}) / r.
/// Defaults reproduce the 1s^2, 1s2s and 1s3p levels of helium.
struct PotentialParams {
    double z_asymptotic = 1.0;
    double a1 = 1.231;
    double a2 = 0.662;
    double a3 = -2.966;
    double a4 = 2.883;
    double a5 = -0.231;
    double a6 = 0.121;

    /// Charge seen at r -> 0.
    double z_origin() const noexcept { return z_asymptotic + a1 + a5; }
    void validate() const;  // a2, a4, a6 > 0, all finite
};

/// Tabulated single-active-electron levels the default potential is fitted to, a.u.
struct ReferenceLevels {
    static constexpr double e_1s = -0.903540;
    static constexpr double e_2s = -0.145948;
    static constexpr double e_3p = -0.055135;
};

double potential_eval(const PotentialParams& p, double r);
/// dV/dr, closed form.
double potential_derivative(const PotentialParams& p, double r);
RadialPotential make_potential(const PotentialParams& p);

/// A real radial eigenfunction on the FE-DVR grid.
struct RadialState {
    int l = 0;
    double energy = 0.0;
    std::vector<double> coefficients;
};

/// Eigenstates of one l-channel: bound (E < 0, unit norm) and box continuum
/// (E > 0) scaled by 1/sqrt(dE_n) with dE_n = (E_{n+1} - E_{n-1}) / 2.
struct ChannelStates {
    int l = 0;
    std::vector<RadialState> bound;
    std::vector<RadialState> continuum;
    std::vector<double> level_spacing;  // dE_n for every continuum state
};

struct StateTable {
    std::vector<ChannelStates> channels;  // index = l
    const ChannelStates& channel(int l) const;
};

StateTable build_state_table(const RadialGrid& grid, const PotentialParams& params, int l_max);

/// The `count` lowest negative-energy states of channel l.
std::vector<RadialState> bound_states(const RadialGrid& grid, const PotentialParams& params, int l, std::size_t count);

/// Energy-normalised regular continuum solutions at arbitrary energies.
///
/// At energy E the discretised radial equation is solved on all interior nodes
/// with the r = r_max value left free, so the solution coincides with a box
/// eigenvector whenever E is a box eigenvalue. The amplitude is fixed by the
/// first-order WKB envelope k u^2 + (u' + k'u/2k)^2 / k = 2/pi over the outer
/// half of the box, i.e. u ~ sqrt(2/(pi k)) sin(kr + ...) asymptotically.
struct ContinuumSet {
    int l = 0;
    std::vector<double> energies;                   // a.u., ascending
    std::vector<std::vector<double>> coefficients;  // one per energy
    std::vector<std::string> warnings;
};

ContinuumSet continuum_states(const RadialGrid& grid, const PotentialParams& params, int l,
                              std::span<const double> energies);

/// Velocity-gauge p_z couplings between adjacent l-channels for m = 0.
///
/// With psi = sum_l u_l(r)/r Y_l0, the reduced components of d/dz psi are
///   l -> l+1 :  c_l (d/dr - (l+1)/r) u_l,
///   l+1 -> l :  c_l (d/dr + (l+1)/r) u_{l+1},
/// c_l = (l+1)/sqrt((2l+1)(2l+3)). The two blocks are negative transposes of
/// each other, so p_z = -i d/dz is Hermitian on the grid.
class DipoleCoupling {
public:
    DipoleCoupling(const RadialGrid& grid, int l_max);

    int l_max() const noexcept { return l_max_; }
    static double angular(int l);
    const BandedMatrix& derivative() const noexcept { return deriv_; }
    std::span<const double> inverse_r() const noexcept { return inv_r_; }

    /// out_{l+1} += scale * (d/dr - (l+1)/r) in   (real radial part, no c_l).
    void apply_up(int l, std::span<const cplx> in, std::span<cplx> out, cplx scale) const;
    /// out_l += scale * (d/dr + (l+1)/r) in_{l+1}.
    void apply_down(int l, std::span<const cplx> in, std::span<cplx> out, cplx scale) const;

private:
    int l_max_;
    BandedMatrix deriv_;
    std::vector<double> inv_r_;
};

/// <bra|p_z|ket> including the angular factor; `allowed` is false (value 0)
/// unless |l_bra - l_ket| == 1.
struct DipoleElement {
    bool allowed = false;
    cplx value = 0.0;
};

DipoleElement dipole_element(const RadialState& bra, const RadialState& ket, const DipoleCoupling& coupling);

}  // namespace lafano
