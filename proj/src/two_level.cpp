#include "lafano/two_level.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>

#include "lafano/constants.hpp"
#include "lafano/errors.hpp"
#include "lafano/parallel.hpp"
#include "lafano/tdse.hpp"

namespace lafano {

namespace {

constexpr cplx I_UNIT{0.0, 1.0};

bool finite(double x) { return std::isfinite(x); }

const PulseComponent* active(const PulseTrain& train, const char* label) {
    const auto* c = train.find(label);
    return (c && c->peak_intensity > 0.0) ? c : nullptr;
}

/// IR intensity entering the level shifts, a.u.
struct IrIntensity {
    const PulseComponent* ir = nullptr;
    double constant = 0.0;  // a.u.; used when > 0
    double operator()(double t) const {
        if (constant > 0.0) return constant;
        return ir ? ir->intensity(t) : 0.0;
    }
};

IrIntensity make_ir_intensity(const PulseTrain& train, const TwoLevelOptions& o) {
    IrIntensity f;
    f.ir = active(train, "IR");
    if (o.constant_ir_intensity > 0.0) f.constant = PhysicalConstants::Wcm2_to_au(o.constant_ir_intensity);
    return f;
}

/// Window end for a constant IR: late enough for 3p to decay by 1e-8.
double extended_end(const PulseTrain& train, const LevelParams& p, const TwoLevelOptions& o, double t1) {
    if (!(o.constant_ir_intensity > 0.0)) return t1;
    const double g = p.gamma_3p * PhysicalConstants::Wcm2_to_au(o.constant_ir_intensity);
    const auto* h15 = active(train, "H15");
    if (!h15 || !(g > 0.0)) return t1;
    const double xuv_end = h15->center_au() + o.window_fwhm_factor * h15->fwhm_au();
    return std::max(t1, xuv_end + 2.0 * 18.5 / g);
}

struct Rk4Run {
    std::vector<cplx> c1s, c3p;
};

Rk4Run run_rk4(const LevelParams& p, const PulseTrain& train, const IrIntensity& ir, double t0, double h,
               std::size_t substeps, std::size_t n_out) {
    const auto* h15 = active(train, "H15");
    const double w0 = p.e_3p - p.e_1s;
    const cplx g3 = cplx(p.delta_3p, -0.5 * p.gamma_3p);
    auto rhs = [&](double t, cplx a, cplx b, cplx& da, cplx& db) {
        const double in = ir(t);
        const double a15 = h15 ? h15->vector_potential(t) : 0.0;
        da = -I_UNIT * (p.delta_1s * in) * a;
        db = -I_UNIT * (g3 * in * b + p.mu_1s3p * a15 * std::polar(1.0, w0 * t) * a);
    };
    Rk4Run out;
    out.c1s.resize(n_out);
    out.c3p.resize(n_out);
    // A constant IR references the Stark phase to t = 0.
    cplx a = ir.constant > 0.0 ? std::polar(1.0, -p.delta_1s * ir.constant * t0) : cplx(1.0);
    cplx b = 0.0;
    std::size_t step = 0;
    for (std::size_t k = 0; k < n_out; ++k) {
        const double tk = t0 + static_cast<double>(step) * h;
        out.c1s[k] = a * std::polar(1.0, -p.e_1s * tk);
        out.c3p[k] = b * std::polar(1.0, -p.e_3p * tk);
        if (k + 1 == n_out) break;
        for (std::size_t s = 0; s < substeps; ++s, ++step) {
            const double t = t0 + static_cast<double>(step) * h;
            cplx k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
            rhs(t, a, b, k1a, k1b);
            rhs(t + 0.5 * h, a + 0.5 * h * k1a, b + 0.5 * h * k1b, k2a, k2b);
            rhs(t + 0.5 * h, a + 0.5 * h * k2a, b + 0.5 * h * k2b, k3a, k3b);
            rhs(t + h, a + h * k3a, b + h * k3b, k4a, k4b);
            a += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
            b += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        }
        if (!finite(a.real()) || !finite(b.real()) || !finite(a.imag()) || !finite(b.imag()))
            throw NumericalError("two-level: non-finite amplitude at t = " + std::to_string(tk) + " a.u.");
    }
    return out;
}

void check_sampling(std::span<const double> energies, double dt) {
    for (double e : energies) {
        if (!finite(e)) throw InvalidArgument("two-level: non-finite energy");
        if (std::abs(e) * dt * 10.0 > 2.0 * pi)
            throw InvalidArgument("two-level: time grid spacing " + std::to_string(dt) +
                                  " a.u. samples e^{iEt} with fewer than 10 points per period at E = " +
                                  std::to_string(e) + " a.u.");
    }
}

/// sum_k w_k f_k e^{i E t_k} on a uniform grid, trapezoid weights.
std::vector<cplx> fourier_sum(std::span<const cplx> f, double t0, double dt, std::span<const double> energies) {
    std::vector<cplx> out(energies.size());
    const std::size_t n = f.size();
    for (std::size_t i = 0; i < energies.size(); ++i) {
        const double e = energies[i];
        const cplx step = std::polar(1.0, e * dt);
        cplx acc = 0.0;
        cplx ph = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            if ((k & 1023u) == 0) ph = std::polar(1.0, e * (t0 + static_cast<double>(k) * dt));
            const double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
            acc += w * f[k] * ph;
            ph *= step;
        }
        out[i] = acc * dt;
    }
    return out;
}

/// Rotating-wave carrier of one component: sqrt(I) env / (2 w) e^{-+ i w (t - c)}.
cplx rwa_term(const PulseComponent& c, double t, int sign) {
    const double amp = std::sqrt(c.peak_intensity_au()) * c.envelope(t) / (2.0 * c.omega);
    return amp * std::polar(1.0, -sign * c.omega * (t - c.center_au()));
}

}  // namespace

void LevelParams::set_peak_values(double i_ir_Wcm2, double shift_1s, double shift_3p, double width_3p) {
    if (!(i_ir_Wcm2 > 0.0) || !finite(i_ir_Wcm2))
        throw InvalidArgument("two-level: reference IR intensity must be > 0");
    const double i = PhysicalConstants::Wcm2_to_au(i_ir_Wcm2);
    delta_1s = shift_1s / i;
    delta_3p = shift_3p / i;
    gamma_3p = width_3p / i;
}

void LevelParams::validate() const {
    const double all[] = {e_1s, e_3p, delta_1s, delta_3p, gamma_3p, mu_1s3p,
                          mu_3pE, mu_1sEp, mu_EpE, continuum_scale, continuum_phase};
    for (double x : all)
        if (!finite(x)) throw InvalidArgument("two-level: non-finite level parameter");
    if (!(e_1s < e_3p && e_3p < 0.0)) throw InvalidArgument("two-level: need E_1s < E_3p < 0");
    if (gamma_3p < 0.0) throw InvalidArgument("two-level: gamma_3p must be >= 0");
    if (continuum_scale < 0.0) throw InvalidArgument("two-level: continuum_scale must be >= 0");
}

void TwoLevelOptions::validate() const {
    if (!(dt > 0.0) || !finite(dt)) throw InvalidArgument("two-level: dt must be > 0");
    if (output_stride == 0) throw InvalidArgument("two-level: output_stride must be >= 1");
    if (dt * static_cast<double>(output_stride) > 0.25 + 1e-12)
        throw InvalidArgument("two-level: amplitude grid spacing dt * output_stride must be <= 0.25 a.u.");
    if (!(window_fwhm_factor > 0.0)) throw InvalidArgument("two-level: window_fwhm_factor must be > 0");
    if (!(halving_tolerance > 0.0)) throw InvalidArgument("two-level: halving_tolerance must be > 0");
    if (constant_ir_intensity < 0.0 || !finite(constant_ir_intensity))
        throw InvalidArgument("two-level: constant_ir_intensity must be >= 0");
}

double dipole_1s3p(const RadialGrid& grid, const PotentialParams& potential) {
    const auto s = bound_states(grid, potential, 0, 1);
    const auto pstates = bound_states(grid, potential, 1, 2);
    if (s.empty() || pstates.size() < 2) throw NumericalError("two-level: 1s or 3p state not bound on this grid");
    const DipoleCoupling coupling(grid, 1);
    return std::abs(dipole_element(s[0], pstates[1], coupling).value);
}

LevelParams default_level_params() {
    static std::once_flag once;
    static LevelParams cached;
    std::call_once(once, [] {
        const GridSpec g;
        const RadialGrid grid(g.r_max, g.n_elements, g.order);
        const PotentialParams pot;
        LevelParams p;
        p.e_1s = bound_states(grid, pot, 0, 1).at(0).energy;
        p.e_3p = bound_states(grid, pot, 1, 2).at(1).energy;
        p.mu_1s3p = dipole_1s3p(grid, pot);
        p.set_peak_values(PulseDefaults::intensity_ir, LevelDefaults::shift_1s, LevelDefaults::shift_3p,
                          LevelDefaults::width_3p);
        cached = p;
    });
    return cached;
}

BoundAmplitudes integrate_amplitudes(const LevelParams& params, const PulseTrain& train,
                                     const TwoLevelOptions& options) {
    params.validate();
    options.validate();
    train.validate();
    auto [t0, t1] = train.window(options.window_fwhm_factor);
    t1 = extended_end(train, params, options, t1);
    const double h_out = options.dt * static_cast<double>(options.output_stride);
    const auto n_out = static_cast<std::size_t>(std::floor((t1 - t0) / h_out)) + 1;
    const IrIntensity ir = make_ir_intensity(train, options);

    auto coarse = run_rk4(params, train, ir, t0, options.dt, options.output_stride, n_out);
    BoundAmplitudes out;
    out.t0 = t0;
    out.dt = h_out;
    if (options.check_halving) {
        auto fine = run_rk4(params, train, ir, t0, 0.5 * options.dt, 2 * options.output_stride, n_out);
        double diff = 0.0;
        for (std::size_t k = 0; k < n_out; ++k)
            diff = std::max({diff, std::abs(fine.c1s[k] - coarse.c1s[k]), std::abs(fine.c3p[k] - coarse.c3p[k])});
        out.halving_difference = diff;
        if (diff > options.halving_tolerance)
            throw NumericalError("two-level: accuracy check failed, step halving changes the amplitudes by " +
                                 std::to_string(diff) + " (tolerance " +
                                 std::to_string(options.halving_tolerance) + "); reduce dt");
        out.c_1s = std::move(fine.c1s);
        out.c_3p = std::move(fine.c3p);
    } else {
        out.c_1s = std::move(coarse.c1s);
        out.c_3p = std::move(coarse.c3p);
    }
    return out;
}

BoundAmplitudes integrate_amplitudes(const LevelParams& params, const PulseTrain& train, double tau_fs,
                                     const TwoLevelOptions& options) {
    return integrate_amplitudes(params, with_delay(train, tau_fs), options);
}

std::vector<cplx> resonant_amplitude(const BoundAmplitudes& amps, const LevelParams& params, const PulseTrain& train,
                                     std::span<const double> energies) {
    check_sampling(energies, amps.dt);
    const auto* ir = active(train, "IR");
    std::vector<cplx> f(amps.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double t = amps.time(k);
        f[k] = (ir ? ir->vector_potential(t) : 0.0) * amps.c_3p[k];
    }
    auto m = fourier_sum(f, amps.t0, amps.dt, energies);
    for (auto& x : m) x *= params.mu_3pE;
    return m;
}

std::vector<cplx> continuum_amplitude(const BoundAmplitudes& amps, const LevelParams& params, const PulseTrain& train,
                                      std::span<const double> energies) {
    check_sampling(energies, amps.dt);
    const auto* ir = active(train, "IR");
    const auto* h17 = active(train, "H17");
    std::vector<cplx> f(amps.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double t = amps.time(k);
        const double a = (ir && h17) ? ir->vector_potential(t) * h17->vector_potential(t) : 0.0;
        f[k] = a * amps.c_1s[k];
    }
    auto m = fourier_sum(f, amps.t0, amps.dt, energies);
    const cplx pre = pi * params.mu_1sEp * params.mu_EpE * params.continuum_scale * std::polar(1.0, params.continuum_phase);
    for (auto& x : m) x *= pre;
    return m;
}

PathwayAmplitudes pathway_amplitudes(const LevelParams& params, const PulseTrain& train,
                                     std::span<const double> energies, const TwoLevelOptions& options) {
    const auto amps = integrate_amplitudes(params, train, options);
    PathwayAmplitudes out;
    out.energies.assign(energies.begin(), energies.end());
    out.m_res = resonant_amplitude(amps, params, train, energies);
    out.m_con = continuum_amplitude(amps, params, train, energies);
    out.m_total.resize(energies.size());
    for (std::size_t i = 0; i < energies.size(); ++i) out.m_total[i] = out.m_res[i] + out.m_con[i];
    return out;
}

PathwayAmplitudes scale_final_wave(const PathwayAmplitudes& a, double res_factor, double con_factor) {
    PathwayAmplitudes out = a;
    for (std::size_t i = 0; i < a.energies.size(); ++i) {
        out.m_res[i] *= res_factor;
        out.m_con[i] *= con_factor;
        out.m_total[i] = out.m_res[i] + out.m_con[i];
    }
    return out;
}

PathwayAmplitudes rotating_wave_amplitudes(const LevelParams& params, const PulseTrain& train,
                                           std::span<const double> energies, const TwoLevelOptions& options) {
    params.validate();
    options.validate();
    train.validate();
    auto [t0, t1] = train.window(options.window_fwhm_factor);
    t1 = extended_end(train, params, options, t1);
    const double dt = options.dt * static_cast<double>(options.output_stride);
    check_sampling(energies, dt);
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt)) + 1;
    const IrIntensity ir_int = make_ir_intensity(train, options);
    const auto* ir = active(train, "IR");
    const auto* h15 = active(train, "H15");
    const auto* h17 = active(train, "H17");
    const double i_const = ir_int.constant;

    // Phi_1s, Phi_3p with the running intensity integral (trapezoid).
    std::vector<double> t(n), int_i(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = t0 + static_cast<double>(k) * dt;
    int_i[0] = i_const > 0.0 ? i_const * t0 : 0.0;
    for (std::size_t k = 1; k < n; ++k) int_i[k] = int_i[k - 1] + 0.5 * dt * (ir_int(t[k - 1]) + ir_int(t[k]));
    auto phi_1s = [&](std::size_t k) { return params.e_1s * t[k] + params.delta_1s * int_i[k]; };
    auto phi_3p = [&](std::size_t k) {
        return cplx(params.e_3p * t[k] + params.delta_3p * int_i[k], -0.5 * params.gamma_3p * int_i[k]);
    };
    // IR carriers; a constant intensity means a CW field with the IR's phase.
    auto ir_term = [&](std::size_t k, int sign) -> cplx {
        if (!ir) return 0.0;
        if (i_const > 0.0)
            return std::sqrt(i_const) / (2.0 * ir->omega) * std::polar(1.0, -sign * ir->omega * (t[k] - ir->center_au()));
        return rwa_term(*ir, t[k], sign);
    };

    // Inner running integral of the resonant term: the e^{+i Phi_3p(t')}
    // factor is stored as e^{+i Re} times e^{-Im}, which grows at most by the
    // total depletion e^{gamma/2 int I}.
    std::vector<cplx> f_res(n), f_con(n);
    cplx inner = 0.0;
    cplx prev = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const cplx drive = h15 ? rwa_term(*h15, t[k], +1) * std::exp(I_UNIT * (phi_3p(k) - phi_1s(k))) : cplx(0.0);
        if (k > 0) inner += 0.5 * dt * (prev + drive);
        prev = drive;
        f_res[k] = ir_term(k, +1) * std::exp(-I_UNIT * phi_3p(k)) * inner;
        f_con[k] = (h17 ? ir_term(k, -1) * rwa_term(*h17, t[k], +1) : cplx(0.0)) * std::polar(1.0, -phi_1s(k));
    }
    PathwayAmplitudes out;
    out.energies.assign(energies.begin(), energies.end());
    out.m_res = fourier_sum(f_res, t0, dt, energies);
    out.m_con = fourier_sum(f_con, t0, dt, energies);
    const cplx pre_res = -I_UNIT * params.mu_1s3p * params.mu_3pE;
    const cplx pre_con = pi * params.mu_1sEp * params.mu_EpE * params.continuum_scale *
                         std::polar(1.0, params.continuum_phase);
    out.m_total.resize(energies.size());
    for (std::size_t i = 0; i < energies.size(); ++i) {
        out.m_res[i] *= pre_res;
        out.m_con[i] *= pre_con;
        out.m_total[i] = out.m_res[i] + out.m_con[i];
    }
    return out;
}

cplx breit_wigner_prefactor(double delta1, double gamma) { return I_UNIT / cplx(delta1, 0.5 * gamma); }

std::vector<cplx> breit_wigner_limit(const LevelParams& params, const PulseTrain& train, double ir_intensity_Wcm2,
                                     std::span<const double> energies, double dt) {
    params.validate();
    train.validate();
    if (!(ir_intensity_Wcm2 >= 0.0)) throw InvalidArgument("two-level: IR intensity must be >= 0");
    if (!(dt > 0.0)) throw InvalidArgument("two-level: dt must be > 0");
    const auto* ir = train.find("IR");
    const auto* h15 = active(train, "H15");
    std::vector<cplx> out(energies.size(), 0.0);
    if (!ir || !h15) return out;
    check_sampling(energies, dt);
    const double i_ir = PhysicalConstants::Wcm2_to_au(ir_intensity_Wcm2);
    const double w = ir->omega;
    const double w15 = h15->omega;
    const double gamma = params.gamma_3p * i_ir;
    const double c15 = h15->center_au();
    const double span = 6.0 * h15->fwhm_au();
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * span / dt)) + 1;
    const double t0 = c15 - span;
    std::vector<cplx> env(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double tk = t0 + static_cast<double>(k) * dt;
        env[k] = std::sqrt(h15->peak_intensity_au()) * h15->envelope(tk);
    }
    // e^{-i w tau} for the IR centred at -tau, e^{+i w15 c15} for the H15 centre.
    const cplx phase = std::polar(1.0, w * ir->center_au() + w15 * c15);
    const cplx pre = -I_UNIT * params.mu_1s3p * params.mu_3pE / (4.0 * w * w15) * std::sqrt(i_ir) * phase;
    std::vector<double> d2(energies.size());
    for (std::size_t i = 0; i < energies.size(); ++i)
        d2[i] = energies[i] - params.e_1s - params.delta_1s * i_ir - w - w15;
    const auto ft = fourier_sum(env, t0, dt, d2);
    for (std::size_t i = 0; i < energies.size(); ++i) {
        const double d1 = energies[i] - w - params.e_3p - params.delta_3p * i_ir;
        out[i] = pre * breit_wigner_prefactor(d1, gamma) * ft[i];
    }
    return out;
}

TwoLevelScan two_level_scan(const LevelParams& params, const PulseTrain& train, std::span<const double> delays_fs,
                            std::span<const double> energies_eV, const TwoLevelOptions& options, int jobs) {
    for (std::size_t i = 1; i < delays_fs.size(); ++i)
        if (!(delays_fs[i] > delays_fs[i - 1])) throw InvalidArgument("two-level: delays must be ascending");
    std::vector<double> e_au(energies_eV.size());
    for (std::size_t i = 0; i < e_au.size(); ++i) e_au[i] = PhysicalConstants::eV_to_au(energies_eV[i]);
    TwoLevelScan out;
    out.delays_fs.assign(delays_fs.begin(), delays_fs.end());
    out.energies_eV.assign(energies_eV.begin(), energies_eV.end());
    out.amplitudes.resize(delays_fs.size());
    parallel_for(delays_fs.size(), jobs, [&](std::size_t i) {
        out.amplitudes[i] = pathway_amplitudes(params, with_delay(train, delays_fs[i]), e_au, options);
    });
    return out;
}

PhaseMap phase_difference_map(const LevelParams& params, const PulseTrain& train, std::span<const double> delays_fs,
                              std::span<const double> energies_eV, const TwoLevelOptions& options, int jobs) {
    return phase_difference_map(two_level_scan(params, train, delays_fs, energies_eV, options, jobs));
}

PhaseMap phase_difference_map(const TwoLevelScan& scan) {
    PhaseMap map;
    map.delays_fs = scan.delays_fs;
    map.energies_eV = scan.energies_eV;
    const std::size_t nt = scan.delays_fs.size(), ne = scan.energies_eV.size();
    map.phase.resize(nt * ne);
    for (std::size_t j = 0; j < ne; ++j) {
        double last = 0.0;
        for (std::size_t i = 0; i < nt; ++i) {
            const auto& a = scan.amplitudes[i];
            double ph = std::arg(a.m_res[j] * std::conj(a.m_con[j]));
            if (i > 0) ph = last + std::remainder(ph - last, 2.0 * pi);
            map.phase[i * ne + j] = ph;
            last = ph;
        }
    }
    return map;
}

std::vector<MinimaCurve> minima_from_phase(const PhaseMap& map, double shift_fs) {
    const std::size_t nt = map.delays_fs.size(), ne = map.energies_eV.size();
    std::vector<MinimaCurve> curves;
    auto curve = [&](int n) -> MinimaCurve& {
        for (auto& c : curves)
            if (c.branch == n) return c;
        curves.push_back({n, {}});
        return curves.back();
    };
    for (std::size_t j = 0; j < ne; ++j) {
        for (std::size_t i = 0; i + 1 < nt; ++i) {
            const double p0 = map.phase[i * ne + j], p1 = map.phase[(i + 1) * ne + j];
            const double lo = std::min(p0, p1), hi = std::max(p0, p1);
            // odd multiples (2n + 1) pi in [lo, hi)
            const int n_first = static_cast<int>(std::ceil((lo / pi - 1.0) / 2.0));
            for (int n = n_first; (2 * n + 1) * pi < hi; ++n) {
                const double target = (2 * n + 1) * pi;
                if (target < lo) continue;
                const double f = (target - p0) / (p1 - p0);
                const double tau = map.delays_fs[i] + f * (map.delays_fs[i + 1] - map.delays_fs[i]);
                curve(n).points.emplace_back(tau + shift_fs, map.energies_eV[j]);
            }
        }
    }
    std::sort(curves.begin(), curves.end(), [](const MinimaCurve& a, const MinimaCurve& b) { return a.branch < b.branch; });
    return curves;
}

std::vector<MinimaCurve> minima_locus(const LevelParams& params, const PulseTrain& train,
                                      std::span<const double> energies_eV, std::span<const double> delays_fs,
                                      double shift_fs, const TwoLevelOptions& options, int jobs) {
    return minima_from_phase(phase_difference_map(params, train, delays_fs, energies_eV, options, jobs), shift_fs);
}

}  // namespace lafano
