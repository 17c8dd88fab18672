#include "lafano/atom.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lafano/constants.hpp"
#include "lafano/errors.hpp"

extern "C" void dgbsv_(const int* n, const int* kl, const int* ku, const int* nrhs, double* ab, const int* ldab,
                       int* ipiv, double* b, const int* ldb, int* info);

namespace lafano {

void PotentialParams::validate() const {
    for (double v : {z_asymptotic, a1, a2, a3, a4, a5, a6})
        if (!std::isfinite(v)) throw InvalidArgument("potential parameters must be finite");
    if (!(a2 > 0.0 && a4 > 0.0 && a6 > 0.0))
        throw InvalidArgument("potential parameters a2, a4, a6 must be positive");
}

double potential_eval(const PotentialParams& p, double r) {
    if (!(r > 0.0)) throw InvalidArgument("potential_eval: r must be > 0");
    const double num = p.z_asymptotic + p.a1 * std::exp(-p.a2 * r) + p.a3 * r * std::exp(-p.a4 * r) +
                       p.a5 * std::exp(-p.a6 * r);
    return -num / r;
}

double potential_derivative(const PotentialParams& p, double r) {
    if (!(r > 0.0)) throw InvalidArgument("potential_derivative: r must be > 0");
    const double e2 = std::exp(-p.a2 * r), e4 = std::exp(-p.a4 * r), e6 = std::exp(-p.a6 * r);
    const double num = p.z_asymptotic + p.a1 * e2 + p.a3 * r * e4 + p.a5 * e6;
    const double dnum = -p.a1 * p.a2 * e2 + p.a3 * (1.0 - p.a4 * r) * e4 - p.a5 * p.a6 * e6;
    return num / (r * r) - dnum / r;
}

RadialPotential make_potential(const PotentialParams& p) {
    p.validate();
    return [p](double r) { return potential_eval(p, r); };
}

const ChannelStates& StateTable::channel(int l) const {
    if (l < 0 || static_cast<std::size_t>(l) >= channels.size())
        throw InvalidArgument("StateTable: no channel l = " + std::to_string(l));
    return channels[l];
}

namespace {

RadialState to_state(int l, Eigenpair&& p) { return RadialState{l, p.energy, std::move(p.vector)}; }

}  // namespace

StateTable build_state_table(const RadialGrid& grid, const PotentialParams& params, int l_max) {
    if (l_max < 0) throw InvalidArgument("build_state_table: l_max must be >= 0");
    const auto v = make_potential(params);
    StateTable table;
    for (int l = 0; l <= l_max; ++l) {
        auto pairs = eigensolve_all(assemble_hamiltonian(grid, l, v));
        ChannelStates ch;
        ch.l = l;
        std::vector<double> cont_e;
        for (auto& p : pairs) {
            if (p.energy < 0.0)
                ch.bound.push_back(to_state(l, std::move(p)));
            else
                ch.continuum.push_back(to_state(l, std::move(p)));
        }
        const auto nc = ch.continuum.size();
        ch.level_spacing.resize(nc);
        for (std::size_t n = 0; n < nc; ++n) {
            const double lo = ch.continuum[n > 0 ? n - 1 : n].energy;
            const double hi = ch.continuum[n + 1 < nc ? n + 1 : n].energy;
            const double span = (n > 0 && n + 1 < nc) ? 0.5 * (hi - lo) : (hi - lo);
            ch.level_spacing[n] = span > 0.0 ? span : 1.0;
            const double s = 1.0 / std::sqrt(ch.level_spacing[n]);
            for (double& c : ch.continuum[n].coefficients) c *= s;
        }
        table.channels.push_back(std::move(ch));
    }
    return table;
}

std::vector<RadialState> bound_states(const RadialGrid& grid, const PotentialParams& params, int l,
                                      std::size_t count) {
    if (l < 0) throw InvalidArgument("bound_states: l must be >= 0");
    auto pairs = eigensolve(assemble_hamiltonian(grid, l, make_potential(params)), std::min(count, grid.dimension()));
    std::vector<RadialState> out;
    for (auto& p : pairs) {
        if (p.energy >= 0.0) break;
        out.push_back(to_state(l, std::move(p)));
    }
    return out;
}

ContinuumSet continuum_states(const RadialGrid& grid, const PotentialParams& params, int l,
                              std::span<const double> energies) {
    if (l < 0) throw InvalidArgument("continuum_states: l must be >= 0");
    const auto h = assemble_hamiltonian(grid, l, make_potential(params));
    const auto t_out = kinetic_outer_column(grid);
    const int n = static_cast<int>(grid.dimension());
    const int bw = static_cast<int>(h.matrix.half_bandwidth());
    const int ldab = 3 * bw + 1;
    const auto r = grid.nodes();
    const auto w = grid.weights();

    // Outer half of the box, minus the last element, for the amplitude match.
    const double r_lo = 0.5 * grid.r_max();
    const double r_hi = grid.r_max() - grid.element_length();

    ContinuumSet set;
    set.l = l;
    set.energies.assign(energies.begin(), energies.end());
    std::vector<double> ab(static_cast<std::size_t>(ldab) * n);
    std::vector<int> ipiv(n);
    for (std::size_t ie = 0; ie < energies.size(); ++ie) {
        const double e = energies[ie];
        if (!(e >= 0.0) || !std::isfinite(e))
            throw InvalidArgument("continuum_states: energies must be non-negative, got " + std::to_string(e));
        if (ie > 0 && !(e > energies[ie - 1]))
            throw InvalidArgument("continuum_states: energies must be strictly ascending");

        std::vector<double> c(n);
        int info = 0;
        for (int attempt = 0; attempt < 3; ++attempt) {
            const double shift = e * (1.0 + attempt * 1e-10);
            std::fill(ab.begin(), ab.end(), 0.0);
            for (int j = 0; j < n; ++j)
                for (int i = std::max(0, j - bw); i <= std::min(n - 1, j + bw); ++i)
                    ab[static_cast<std::size_t>(j) * ldab + (2 * bw + i - j)] = h.matrix(i, j) - (i == j ? shift : 0.0);
            for (int i = 0; i < n; ++i) c[i] = -t_out[i];
            const int one = 1;
            dgbsv_(&n, &bw, &bw, &one, ab.data(), &ldab, ipiv.data(), c.data(), &n, &info);
            if (info == 0) break;
        }
        if (info != 0) throw NumericalError("continuum_states: banded solve failed at E = " + std::to_string(e));

        const auto u = grid.values_from_coefficients(c);
        const auto du = grid.derivative_values(c);
        double acc = 0.0, wsum = 0.0;
        int sign_changes = 0;
        for (int g = 0; g < n; ++g) {
            if (r[g] < r_lo || r[g] > r_hi) continue;
            const double k2 = 2.0 * (e - potential_eval(params, r[g])) - l * (l + 1.0) / (r[g] * r[g]);
            if (k2 <= 0.0) continue;
            const double k = std::sqrt(k2);
            const double dk2 = -2.0 * potential_derivative(params, r[g]) + 2.0 * l * (l + 1.0) / (r[g] * r[g] * r[g]);
            const double dk = dk2 / (2.0 * k);
            const double v = du[g] + dk / (2.0 * k) * u[g];
            acc += w[g] * (k * u[g] * u[g] + v * v / k);
            wsum += w[g];
            if (g > 0 && r[g - 1] >= r_lo && u[g] * u[g - 1] < 0.0) ++sign_changes;
        }
        if (wsum == 0.0)
            throw InvalidArgument("continuum_states: E = " + std::to_string(e) +
                                  " a.u. is classically forbidden in the matching region");
        if (sign_changes < 2) {
            std::ostringstream os;
            os << "l=" << l << " E=" << e << " a.u.: fewer than one oscillation in the matching region; "
               << "normalisation is poorly resolved";
            set.warnings.push_back(os.str());
        }
        const double scale = std::sqrt(2.0 / pi) / std::sqrt(acc / wsum);
        for (double& x : c) x *= scale;
        set.coefficients.push_back(std::move(c));
    }
    return set;
}

double DipoleCoupling::angular(int l) { return (l + 1.0) / std::sqrt((2.0 * l + 1.0) * (2.0 * l + 3.0)); }

DipoleCoupling::DipoleCoupling(const RadialGrid& grid, int l_max)
    : l_max_(l_max), deriv_(assemble_derivative(grid)) {
    if (l_max < 0) throw InvalidArgument("DipoleCoupling: l_max must be >= 0");
    inv_r_.resize(grid.dimension());
    const auto r = grid.nodes();
    for (std::size_t g = 0; g < r.size(); ++g) inv_r_[g] = 1.0 / r[g];
}

void DipoleCoupling::apply_up(int l, std::span<const cplx> in, std::span<cplx> out, cplx scale) const {
    deriv_.multiply_add(in, out, scale);
    const double f = l + 1.0;
    for (std::size_t g = 0; g < in.size(); ++g) out[g] -= scale * (f * inv_r_[g]) * in[g];
}

void DipoleCoupling::apply_down(int l, std::span<const cplx> in, std::span<cplx> out, cplx scale) const {
    deriv_.multiply_add(in, out, scale);
    const double f = l + 1.0;
    for (std::size_t g = 0; g < in.size(); ++g) out[g] += scale * (f * inv_r_[g]) * in[g];
}

DipoleElement dipole_element(const RadialState& bra, const RadialState& ket, const DipoleCoupling& coupling) {
    if (std::abs(bra.l - ket.l) != 1) return {};
    if (bra.coefficients.size() != ket.coefficients.size() || ket.coefficients.size() != coupling.inverse_r().size())
        throw InvalidArgument("dipole_element: state sizes do not match the grid");
    std::vector<cplx> in(ket.coefficients.begin(), ket.coefficients.end());
    std::vector<cplx> out(in.size(), 0.0);
    double c;
    if (bra.l == ket.l + 1) {
        c = DipoleCoupling::angular(ket.l);
        coupling.apply_up(ket.l, in, out, 1.0);
    } else {
        c = DipoleCoupling::angular(bra.l);
        coupling.apply_down(bra.l, in, out, 1.0);
    }
    double radial = 0.0;
    for (std::size_t g = 0; g < out.size(); ++g) radial += bra.coefficients[g] * out[g].real();
    // p_z = -i d/dz
    return {true, cplx(0.0, -c * radial)};
}

}  // namespace lafano
