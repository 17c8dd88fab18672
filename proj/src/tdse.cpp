#include "lafano/tdse.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lafano/constants.hpp"
#include "lafano/errors.hpp"

namespace lafano {

void GridSpec::validate() const {
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw InvalidArgument("grid: r_max must be > 0");
    if (n_elements < 1) throw InvalidArgument("grid: n_elements must be >= 1");
    if (order < 3) throw InvalidArgument("grid: order must be >= 3");
}

SphericalWavefunction::SphericalWavefunction(std::size_t n, int l_max_)
    : n_radial(n), l_max(l_max_), data(n * static_cast<std::size_t>(l_max_ + 1), cplx{0.0, 0.0}) {}

double SphericalWavefunction::norm_squared() const {
    double s = 0.0;
    for (const auto& z : data) s += std::norm(z);
    return s;
}

double SphericalWavefunction::channel_norm_squared(int l) const {
    double s = 0.0;
    for (const auto& z : channel(l)) s += std::norm(z);
    return s;
}

double fidelity(const SphericalWavefunction& a, const SphericalWavefunction& b) {
    if (a.data.size() != b.data.size()) throw InvalidArgument("fidelity: shape mismatch");
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += std::conj(a.data[i]) * b.data[i];
    return std::norm(s);
}

TdseSystem::TdseSystem(GridSpec grid, PotentialParams potential, int l_max, double spectral_cutoff)
    : spec_((grid.validate(), grid)),
      grid_(grid.r_max, grid.n_elements, grid.order),
      potential_((potential.validate(), potential)),
      l_max_(l_max),
      coupling_(grid_, std::max(l_max, 0)),
      cutoff_(spectral_cutoff) {
    if (l_max < 0) throw InvalidArgument("tdse: l_max must be >= 0");
    if (!(spectral_cutoff > 0.0)) throw InvalidArgument("tdse: spectral_cutoff must be > 0");
    const auto v = make_potential(potential_);
    for (int l = 0; l <= l_max_; ++l) h0_.push_back(assemble_hamiltonian(grid_, l, v));
    states_ = build_state_table(grid_, potential_, l_max_);
    if (states_.channel(0).bound.empty()) throw NumericalError("tdse: the s channel has no bound state");

    const std::size_t n = n_radial();
    offsets_.push_back(0);
    if (!spectral()) {
        for (int l = 0; l <= l_max_; ++l) offsets_.push_back(offsets_.back() + n);
        return;
    }
    for (int l = 0; l <= l_max_; ++l) {
        const auto pairs = eigensolve_all(h0_[l]);
        std::size_t keep = 0;
        while (keep < pairs.size() && pairs[keep].energy < cutoff_) ++keep;
        if (keep == 0) throw InvalidArgument("tdse: spectral_cutoff lies below every level of l = " + std::to_string(l));
        Eigen::VectorXd e(keep);
        Eigen::MatrixXd u(n, keep);
        for (std::size_t k = 0; k < keep; ++k) {
            e(k) = pairs[k].energy;
            for (std::size_t i = 0; i < n; ++i) u(i, k) = pairs[k].vector[i];
        }
        eig_energies_.push_back(std::move(e));
        eig_vectors_.push_back(std::move(u));
        offsets_.push_back(offsets_.back() + keep);
    }
    // Radial part of the l -> l+1 block in the eigenbases.
    const Eigen::MatrixXd d = coupling_.derivative().to_dense();
    const auto inv_r = coupling_.inverse_r();
    for (int l = 0; l < l_max_; ++l) {
        Eigen::MatrixXd op = d;
        for (std::size_t i = 0; i < n; ++i) op(i, i) -= (l + 1.0) * inv_r[i];
        eig_coupling_.push_back(eig_vectors_[l + 1].transpose() * (op * eig_vectors_[l]));
    }
}

std::size_t TdseSystem::working_size() const noexcept { return offsets_.back(); }

std::size_t TdseSystem::working_channel_size(int l) const { return offsets_.at(l + 1) - offsets_.at(l); }

void TdseSystem::to_working(const SphericalWavefunction& psi, std::vector<cplx>& w) const {
    w.resize(working_size());
    if (!spectral()) {
        std::copy(psi.data.begin(), psi.data.end(), w.begin());
        return;
    }
    const auto n = static_cast<Eigen::Index>(n_radial());
    for (int l = 0; l <= l_max_; ++l) {
        Eigen::Map<const Eigen::VectorXcd> src(psi.channel(l).data(), n);
        Eigen::Map<Eigen::VectorXcd> dst(w.data() + offsets_[l], eig_vectors_[l].cols());
        dst.noalias() = eig_vectors_[l].transpose().cast<cplx>() * src;
    }
}

void TdseSystem::from_working(std::span<const cplx> w, SphericalWavefunction& psi) const {
    if (psi.n_radial != n_radial() || psi.l_max != l_max_) psi = SphericalWavefunction(n_radial(), l_max_);
    if (!spectral()) {
        std::copy(w.begin(), w.end(), psi.data.begin());
        return;
    }
    const auto n = static_cast<Eigen::Index>(n_radial());
    for (int l = 0; l <= l_max_; ++l) {
        Eigen::Map<const Eigen::VectorXcd> src(w.data() + offsets_[l], eig_vectors_[l].cols());
        Eigen::Map<Eigen::VectorXcd> dst(psi.channel(l).data(), n);
        dst.noalias() = eig_vectors_[l].cast<cplx>() * src;
    }
}

namespace {

// out_high += s M x_low and out_low -= s M^T x_high, for a real M and complex
// vectors. Real and imaginary parts go through separate real products.
void coupled_block(const Eigen::MatrixXd& m, std::span<const cplx> x_low, std::span<const cplx> x_high,
                   std::span<cplx> out_low, std::span<cplx> out_high, cplx s) {
    thread_local Eigen::VectorXd re_in, im_in, re_out, im_out;
    const auto nl = m.cols();
    const auto nh = m.rows();
    re_in.resize(nl);
    im_in.resize(nl);
    for (Eigen::Index j = 0; j < nl; ++j) {
        re_in(j) = x_low[j].real();
        im_in(j) = x_low[j].imag();
    }
    re_out.noalias() = m * re_in;
    im_out.noalias() = m * im_in;
    for (Eigen::Index i = 0; i < nh; ++i) out_high[i] += s * cplx(re_out(i), im_out(i));

    re_in.resize(nh);
    im_in.resize(nh);
    for (Eigen::Index j = 0; j < nh; ++j) {
        re_in(j) = x_high[j].real();
        im_in(j) = x_high[j].imag();
    }
    re_out.noalias() = m.transpose() * re_in;
    im_out.noalias() = m.transpose() * im_in;
    for (Eigen::Index i = 0; i < nl; ++i) out_low[i] -= s * cplx(re_out(i), im_out(i));
}

}  // namespace

void TdseSystem::apply_working(std::span<const cplx> in, std::span<cplx> out, double a) const {
    if (!spectral()) {
        apply(in, out, a);
        return;
    }
    for (int l = 0; l <= l_max_; ++l) {
        const auto& e = eig_energies_[l];
        const std::size_t o = offsets_[l];
        for (Eigen::Index k = 0; k < e.size(); ++k) out[o + k] = e(k) * in[o + k];
    }
    if (a == 0.0) return;
    for (int l = 0; l < l_max_; ++l) {
        const std::size_t lo = offsets_[l], hi = offsets_[l + 1];
        const std::size_t nl = hi - lo, nh = offsets_[l + 2] - hi;
        coupled_block(eig_coupling_[l], in.subspan(lo, nl), in.subspan(hi, nh), out.subspan(lo, nl),
                      out.subspan(hi, nh), cplx{0.0, -a * DipoleCoupling::angular(l)});
    }
}

void TdseSystem::apply_pz_working(std::span<const cplx> in, std::span<cplx> out) const {
    if (!spectral()) {
        apply_pz(in, out);
        return;
    }
    std::fill(out.begin(), out.end(), cplx{0.0, 0.0});
    for (int l = 0; l < l_max_; ++l) {
        const std::size_t lo = offsets_[l], hi = offsets_[l + 1];
        const std::size_t nl = hi - lo, nh = offsets_[l + 2] - hi;
        coupled_block(eig_coupling_[l], in.subspan(lo, nl), in.subspan(hi, nh), out.subspan(lo, nl),
                      out.subspan(hi, nh), cplx{0.0, -DipoleCoupling::angular(l)});
    }
}

SphericalWavefunction TdseSystem::ground_state() const {
    SphericalWavefunction psi(n_radial(), l_max_);
    const auto& g = states_.channel(0).bound.front().coefficients;
    auto ch = psi.channel(0);
    for (std::size_t i = 0; i < g.size(); ++i) ch[i] = g[i];
    return psi;
}

double TdseSystem::ground_energy() const { return states_.channel(0).bound.front().energy; }

void TdseSystem::apply(std::span<const cplx> in, std::span<cplx> out, double a) const {
    std::fill(out.begin(), out.end(), cplx{0.0, 0.0});
    const std::size_t n = n_radial();
    for (int l = 0; l <= l_max_; ++l) h0_[l].matrix.multiply_add(in.subspan(l * n, n), out.subspan(l * n, n));
    if (a == 0.0) return;
    for (int l = 0; l < l_max_; ++l) {
        const cplx s{0.0, -a * DipoleCoupling::angular(l)};
        coupling_.apply_up(l, in.subspan(l * n, n), out.subspan((l + 1) * n, n), s);
        coupling_.apply_down(l, in.subspan((l + 1) * n, n), out.subspan(l * n, n), s);
    }
}

void TdseSystem::apply_pz(std::span<const cplx> in, std::span<cplx> out) const {
    std::fill(out.begin(), out.end(), cplx{0.0, 0.0});
    const std::size_t n = n_radial();
    for (int l = 0; l < l_max_; ++l) {
        const cplx s{0.0, -DipoleCoupling::angular(l)};
        coupling_.apply_up(l, in.subspan(l * n, n), out.subspan((l + 1) * n, n), s);
        coupling_.apply_down(l, in.subspan((l + 1) * n, n), out.subspan(l * n, n), s);
    }
}

void TdseSystem::remove_bound(SphericalWavefunction& psi) const {
    for (int l = 0; l <= l_max_; ++l) {
        auto ch = psi.channel(l);
        for (const auto& b : states_.channel(l).bound) {
            cplx ov = 0.0;
            for (std::size_t i = 0; i < ch.size(); ++i) ov += b.coefficients[i] * ch[i];
            for (std::size_t i = 0; i < ch.size(); ++i) ch[i] -= ov * b.coefficients[i];
        }
    }
}

double TdseSystem::continuum_population(const SphericalWavefunction& psi) const {
    SphericalWavefunction c = psi;
    remove_bound(c);
    return c.norm_squared();
}

std::string to_string(AbsorberMode m) {
    switch (m) {
        case AbsorberMode::none: return "none";
        case AbsorberMode::mask: return "mask";
        case AbsorberMode::split: return "split";
    }
    return "none";
}

AbsorberMode absorber_mode_from_string(const std::string& s) {
    if (s == "none") return AbsorberMode::none;
    if (s == "mask") return AbsorberMode::mask;
    if (s == "split") return AbsorberMode::split;
    throw InvalidArgument("absorber mode must be one of none, mask, split; got '" + s + "'");
}

AbsorberConfig AbsorberConfig::mask_defaults() {
    AbsorberConfig c;
    c.mode = AbsorberMode::mask;
    c.start_fraction = 0.9;
    c.exponent = 0.125;
    return c;
}

AbsorberConfig AbsorberConfig::split_defaults() { return AbsorberConfig{}; }

void AbsorberConfig::validate() const {
    if (!(start_fraction > 0.0 && start_fraction < 1.0))
        throw InvalidArgument("absorber.start_fraction must lie in (0, 1)");
    if (!(exponent > 0.0) || !std::isfinite(exponent)) throw InvalidArgument("absorber.exponent must be > 0");
    if (mode == AbsorberMode::split && !(split_interval > 0.0))
        throw InvalidArgument("absorber.split_interval must be > 0");
    if (!(saturation_limit > 0.0)) throw InvalidArgument("absorber.saturation_limit must be > 0");
}

double AbsorberConfig::shape(double r, double r_max) const {
    const double r0 = start_fraction * r_max;
    if (r <= r0) return 1.0;
    if (r >= r_max) return 0.0;
    const double x = (r - r0) / (r_max - r0);
    return std::pow(std::cos(0.5 * pi * x), exponent);
}

ContinuumProjector::ContinuumProjector(const TdseSystem& system, std::vector<double> energies_au)
    : energies_(std::move(energies_au)) {
    for (int l = 0; l <= system.l_max(); ++l) {
        const auto& cont = system.states().channel(l).continuum;
        if (!cont.empty() && !energies_.empty() && energies_.back() > cont.back().energy)
            throw InvalidArgument("continuum projector: energy " + std::to_string(energies_.back()) +
                                  " a.u. exceeds the grid's highest continuum level");
        sets_.push_back(continuum_states(system.grid(), system.potential(), l, energies_));
    }
}

std::vector<std::string> ContinuumProjector::warnings() const {
    std::vector<std::string> out;
    for (const auto& s : sets_) out.insert(out.end(), s.warnings.begin(), s.warnings.end());
    return out;
}

std::vector<std::vector<cplx>> ContinuumProjector::project(const SphericalWavefunction& psi) const {
    std::vector<std::vector<cplx>> amps(sets_.size());
    for (std::size_t l = 0; l < sets_.size() && static_cast<int>(l) <= psi.l_max; ++l) {
        const auto ch = psi.channel(static_cast<int>(l));
        auto& a = amps[l];
        a.resize(energies_.size());
        for (std::size_t i = 0; i < energies_.size(); ++i) {
            const auto& u = sets_[l].coefficients[i];
            double re = 0.0, im = 0.0;
            for (std::size_t j = 0; j < ch.size(); ++j) {
                re += u[j] * ch[j].real();
                im += u[j] * ch[j].imag();
            }
            a[i] = {re, im};
        }
    }
    return amps;
}

void TdseScenario::validate() const {
    pulses.validate();
    absorber.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
    if (!(window_fwhm_factor > 0.0)) throw InvalidArgument("window_fwhm_factor must be > 0");
    if (!(window_margin >= 0.0)) throw InvalidArgument("window_margin must be >= 0");
}

namespace {

// Probability in the last finite element of every channel.
double boundary_probability(const TdseSystem& sys, const SphericalWavefunction& psi) {
    const auto r = sys.grid().nodes();
    const double r_edge = sys.grid().r_max() - sys.grid().element_length();
    double p = 0.0;
    for (int l = 0; l <= psi.l_max; ++l) {
        const auto ch = psi.channel(l);
        for (std::size_t i = r.size(); i-- > 0 && r[i] > r_edge;) p += std::norm(ch[i]);
    }
    return p;
}

std::string time_label(double t) {
    std::ostringstream os;
    os << t << " a.u. (" << PhysicalConstants::au_to_fs(t) << " fs)";
    return os.str();
}

}  // namespace

PropagationResult propagate_state(const TdseSystem& system, SphericalWavefunction psi, const TdseScenario& scenario,
                                  double t0, double t1, const ContinuumProjector* projector,
                                  const StepObserver& observer) {
    scenario.validate();
    if (!(t1 > t0)) throw InvalidArgument("propagate: empty time window");
    if (psi.n_radial != system.n_radial() || psi.l_max != system.l_max())
        throw InvalidArgument("propagate: wavefunction shape does not match the system");
    const auto& ab = scenario.absorber;
    const bool split = ab.mode == AbsorberMode::split;
    if (split && projector == nullptr) throw InvalidArgument("propagate: split absorber requires a projector");

    const std::size_t n_steps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((t1 - t0) / scenario.dt - 1e-9)));
    const double h = (t1 - t0) / static_cast<double>(n_steps);

    const std::size_t nr = system.n_radial();
    const auto r = system.grid().nodes();
    std::vector<double> mask(nr);
    for (std::size_t i = 0; i < nr; ++i) mask[i] = ab.shape(r[i], system.grid().r_max());

    // Running integral of A(t) on the step grid, for the excursion of split pieces.
    std::vector<double> alpha;
    if (split && ab.volkov_translation) {
        alpha.assign(n_steps + 1, 0.0);
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double ta = t0 + k * h;
            const double a0 = scenario.pulses.vector_potential(ta);
            const double am = scenario.pulses.vector_potential(ta + 0.5 * h);
            const double a1 = scenario.pulses.vector_potential(ta + h);
            alpha[k + 1] = alpha[k] + h / 6.0 * (a0 + 4.0 * am + a1);
        }
    }

    PropagationResult res;
    res.t_start = t0;
    res.t_end = t1;
    if (split) {
        res.split_amplitudes.assign(system.l_max() + 1,
                                    std::vector<cplx>(projector->energies().size(), cplx{0.0, 0.0}));
    }

    std::vector<cplx> w;
    system.to_working(psi, w);
    KrylovPropagator prop(w.size(), scenario.krylov);
    std::unique_ptr<KrylovPropagator> prop_pz;
    double a_now = 0.0;
    const OperatorApplier hamiltonian = [&](std::span<const cplx> in, std::span<cplx> out) {
        system.apply_working(in, out, a_now);
    };
    const OperatorApplier pz = [&](std::span<const cplx> in, std::span<cplx> out) {
        system.apply_pz_working(in, out);
    };

    const auto steps_per_split =
        split ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ab.split_interval / h))) : 0;
    SphericalWavefunction piece(nr, system.l_max());
    std::vector<cplx> piece_w;

    auto check_saturation = [&](double t) {
        const double pb = boundary_probability(system, psi);
        if (pb > ab.saturation_limit) {
            std::ostringstream os;
            os << "absorber saturated: probability " << pb << " in the outermost element at t = " << time_label(t)
               << "; enlarge the box or shorten the split interval";
            throw BoxTooSmallError(os.str());
        }
    };
    auto norm2 = [](const std::vector<cplx>& v) {
        double s = 0.0;
        for (const auto& z : v) s += std::norm(z);
        return s;
    };

    for (std::size_t k = 0; k < n_steps; ++k) {
        a_now = scenario.pulses.vector_potential(t0 + (k + 0.5) * h);
        KrylovStepInfo info;
        try {
            info = prop.step(hamiltonian, w, h);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " at t = " + time_label(t0 + k * h));
        }
        res.max_step_error = std::max(res.max_step_error, info.error_estimate);
        res.max_krylov_dimension = std::max(res.max_krylov_dimension, info.dimension_used);
        const double t = t0 + (k + 1) * h;

        const double n2 = norm2(w);
        if (!std::isfinite(n2) || n2 > 1.0 + 1e-6)
            throw NumericalError("propagation became unstable at t = " + time_label(t));

        bool have_grid = false;
        if (ab.mode == AbsorberMode::mask) {
            system.from_working(w, psi);
            for (int l = 0; l <= psi.l_max; ++l) {
                auto ch = psi.channel(l);
                for (std::size_t i = 0; i < nr; ++i) ch[i] *= mask[i];
            }
            check_saturation(t);
            system.to_working(psi, w);
            res.absorbed += n2 - norm2(w);
            have_grid = !system.spectral();
        } else if (split && (k + 1) % steps_per_split == 0 && k + 1 < n_steps) {
            system.from_working(w, psi);
            double removed = 0.0;
            for (int l = 0; l <= psi.l_max; ++l) {
                auto ch = psi.channel(l);
                auto pc = piece.channel(l);
                for (std::size_t i = 0; i < nr; ++i) {
                    pc[i] = (1.0 - mask[i]) * ch[i];
                    ch[i] *= mask[i];
                    removed += std::norm(pc[i]);
                }
            }
            check_saturation(t);
            system.to_working(psi, w);
            res.absorbed += n2 - norm2(w);
            have_grid = !system.spectral();
            if (removed > 1e-30) {
                if (!alpha.empty()) {
                    const double dz = alpha[n_steps] - alpha[k + 1];
                    if (std::abs(dz) > 1e-12) {
                        system.to_working(piece, piece_w);
                        if (!prop_pz) prop_pz = std::make_unique<KrylovPropagator>(piece_w.size(), scenario.krylov);
                        prop_pz->step(pz, piece_w, dz);
                        system.from_working(piece_w, piece);
                    }
                }
                system.remove_bound(piece);
                const auto amps = projector->project(piece);
                const auto& es = projector->energies();
                for (std::size_t l = 0; l < amps.size(); ++l)
                    for (std::size_t i = 0; i < es.size(); ++i)
                        res.split_amplitudes[l][i] += std::polar(1.0, es[i] * t) * amps[l][i];
            }
        }
        if (observer) {
            if (!have_grid) system.from_working(w, psi);
            psi.time = t;
            observer(psi);
        }
    }
    system.from_working(w, psi);
    psi.time = t1;
    res.steps = n_steps;
    res.psi = std::move(psi);
    return res;
}

PropagationResult propagate(const TdseSystem& system, const TdseScenario& scenario,
                            const ContinuumProjector* projector, const StepObserver& observer) {
    scenario.validate();
    const auto [t0, t1] = scenario.pulses.window(scenario.window_fwhm_factor, scenario.window_margin);
    return propagate_state(system, system.ground_state(), scenario, t0, t1, projector, observer);
}

std::vector<std::pair<double, double>> box_channel_spectrum(const SphericalWavefunction& psi,
                                                            const ChannelStates& channel) {
    std::vector<std::pair<double, double>> pts;
    if (channel.l > psi.l_max) return pts;
    const auto ch = psi.channel(channel.l);
    pts.reserve(channel.continuum.size());
    for (const auto& s : channel.continuum) {
        cplx ov = 0.0;
        for (std::size_t i = 0; i < ch.size(); ++i) ov += s.coefficients[i] * ch[i];
        pts.emplace_back(s.energy, std::norm(ov));
    }
    return pts;
}

std::vector<double> photoelectron_spectrum(const SphericalWavefunction& psi, const StateTable& states,
                                           std::span<const double> energies_eV) {
    std::vector<double> out(energies_eV.size(), 0.0);
    for (const auto& ch : states.channels) {
        if (ch.l > psi.l_max) continue;
        const auto pts = box_channel_spectrum(psi, ch);
        if (pts.empty()) continue;
        for (std::size_t i = 0; i < energies_eV.size(); ++i) {
            const double e = PhysicalConstants::eV_to_au(energies_eV[i]);
            if (e < 0.0 || e > pts.back().first)
                throw InvalidArgument("photoelectron_spectrum: " + std::to_string(energies_eV[i]) +
                                      " eV lies outside the resolvable continuum window");
            double p;
            if (e <= pts.front().first) {
                p = pts.front().second;
            } else {
                const auto it = std::lower_bound(pts.begin(), pts.end(), e,
                                                 [](const auto& a, double v) { return a.first < v; });
                const auto& hi = *it;
                const auto& lo = *(it - 1);
                const double x = (e - lo.first) / (hi.first - lo.first);
                p = lo.second + x * (hi.second - lo.second);
            }
            out[i] += p / PhysicalConstants::hartree_to_eV;
        }
    }
    return out;
}

std::vector<double> photoelectron_spectrum(const TdseSystem& system, const ContinuumProjector& projector,
                                           const PropagationResult& result) {
    SphericalWavefunction c = result.psi;
    system.remove_bound(c);
    const auto amps = projector.project(c);
    const auto& es = projector.energies();
    std::vector<double> out(es.size(), 0.0);
    const bool split = !result.split_amplitudes.empty();
    for (std::size_t l = 0; l < amps.size(); ++l)
        for (std::size_t i = 0; i < es.size(); ++i) {
            cplx total = std::polar(1.0, es[i] * result.t_end) * amps[l][i];
            if (split) total += result.split_amplitudes[l][i];
            out[i] += std::norm(total) / PhysicalConstants::hartree_to_eV;
        }
    return out;
}

namespace {

nlohmann::json scan_metadata(const TdseSystem& system, const TdseScenario& sc) {
    nlohmann::json m;
    m["code_version"] = LAFANO_VERSION;
    const auto& g = system.grid_spec();
    m["grid"] = {{"r_max", g.r_max}, {"n_elements", g.n_elements}, {"order", g.order}};
    m["l_max"] = system.l_max();
    if (system.spectral()) m["spectral_cutoff"] = system.spectral_cutoff();
    else m["spectral_cutoff"] = nullptr;
    const auto& p = system.potential();
    m["potential"] = {{"z_asymptotic", p.z_asymptotic}, {"a1", p.a1}, {"a2", p.a2}, {"a3", p.a3},
                      {"a4", p.a4},                     {"a5", p.a5}, {"a6", p.a6}};
    nlohmann::json pulses = nlohmann::json::array();
    for (const auto& c : sc.pulses.components)
        pulses.push_back({{"label", c.label},
                          {"omega", c.omega},
                          {"peak_intensity_Wcm2", c.peak_intensity},
                          {"fwhm_fs", c.fwhm},
                          {"center_fs", c.center}});
    m["pulses"] = pulses;
    m["absorber"] = {{"mode", to_string(sc.absorber.mode)},
                     {"start_fraction", sc.absorber.start_fraction},
                     {"exponent", sc.absorber.exponent},
                     {"split_interval", sc.absorber.split_interval},
                     {"volkov_translation", sc.absorber.volkov_translation},
                     {"saturation_limit", sc.absorber.saturation_limit}};
    m["dt"] = sc.dt;
    m["window_fwhm_factor"] = sc.window_fwhm_factor;
    m["window_margin"] = sc.window_margin;
    m["krylov"] = {{"dimension", sc.krylov.dimension},
                   {"max_dimension", sc.krylov.max_dimension},
                   {"tolerance", sc.krylov.tolerance}};
    m["units"] = {{"energy", "eV"}, {"delay", "fs"}, {"value", "probability per eV"}};
    // FNV-1a over the canonical dump.
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char ch : m.dump()) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << hash;
    m["scenario_hash"] = os.str();
    return m;
}

}  // namespace

DelayScanResult delay_scan(const TdseSystem& system, const TdseScenario& scenario_template,
                           std::span<const double> delays_fs, std::span<const double> energies_eV, int jobs) {
    scenario_template.validate();
    for (std::size_t i = 1; i < delays_fs.size(); ++i)
        if (!(delays_fs[i] > delays_fs[i - 1])) throw InvalidArgument("delay_scan: delays must be strictly ascending");
    for (std::size_t i = 1; i < energies_eV.size(); ++i)
        if (!(energies_eV[i] > energies_eV[i - 1]))
            throw InvalidArgument("delay_scan: energies must be strictly ascending");

    DelayScanResult out;
    out.spectrogram.energies_eV.assign(energies_eV.begin(), energies_eV.end());
    out.spectrogram.metadata = scan_metadata(system, scenario_template);
    if (delays_fs.empty()) return out;

    std::vector<double> e_au(energies_eV.size());
    for (std::size_t i = 0; i < e_au.size(); ++i) e_au[i] = PhysicalConstants::eV_to_au(energies_eV[i]);
    const ContinuumProjector projector(system, e_au);

    const std::size_t nd = delays_fs.size();
    std::vector<std::vector<double>> rows(nd);
    std::vector<std::string> errors(nd);
    std::vector<double> absorbed(nd, 0.0), step_err(nd, 0.0);
    parallel_for(nd, jobs, [&](std::size_t i) {
        try {
            TdseScenario sc = scenario_template;
            sc.pulses = with_delay(sc.pulses, delays_fs[i]);
            const auto res = propagate(system, sc, &projector);
            rows[i] = photoelectron_spectrum(system, projector, res);
            absorbed[i] = res.absorbed;
            step_err[i] = res.max_step_error;
        } catch (const Error& e) {
            errors[i] = e.what();
            if (errors[i].empty()) errors[i] = "unknown failure";
        }
    });

    auto& s = out.spectrogram;
    for (std::size_t i = 0; i < nd; ++i) {
        if (!errors[i].empty()) {
            out.failures.push_back({delays_fs[i], errors[i]});
            continue;
        }
        s.delays_fs.push_back(delays_fs[i]);
        for (double v : rows[i]) s.values.push_back(std::max(0.0, v));
        out.absorbed.push_back(absorbed[i]);
        out.max_step_error.push_back(step_err[i]);
    }
    s.metadata["failed_delays"] = out.failures.size();
    return out;
}

}  // namespace lafano
