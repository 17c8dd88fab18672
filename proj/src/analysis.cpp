#include "lafano/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Dense>

#include "lafano/constants.hpp"
#include "lafano/errors.hpp"

namespace lafano {

using cplx = std::complex<double>;

FitField local_cosine_fit(const Spectrogram& spec, double omega, double tau_w_fs) {
    spec.validate();
    if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidArgument("local_cosine_fit: omega must be > 0");
    if (!(tau_w_fs > 0.0) || !std::isfinite(tau_w_fs)) throw InvalidArgument("local_cosine_fit: tau_w must be > 0");
    const std::size_t nd = spec.n_delays(), ne = spec.n_energies();
    FitField f;
    f.energies_eV = spec.energies_eV;
    f.delays_fs = spec.delays_fs;
    f.omega = omega;
    f.tau_w = tau_w_fs;
    f.a.assign(nd * ne, 0.0);
    f.b.assign(nd * ne, 0.0);
    f.phi.assign(nd * ne, 0.0);
    f.residual.assign(nd * ne, 0.0);
    f.valid.assign(nd * ne, 0);

    const double max_gap = PhysicalConstants::au_to_fs(pi / (2.0 * omega));
    Eigen::MatrixXd y(nd, ne);
    for (std::size_t i = 0; i < nd; ++i)
        for (std::size_t j = 0; j < ne; ++j) y(i, j) = spec.at(i, j);

    for (std::size_t c = 0; c < nd; ++c) {
        const double tc = spec.delays_fs[c];
        // reach of the weight, sampling check inside it
        std::size_t lo = c, hi = c;
        while (lo > 0 && tc - spec.delays_fs[lo - 1] <= 2.0 * tau_w_fs) --lo;
        while (hi + 1 < nd && spec.delays_fs[hi + 1] - tc <= 2.0 * tau_w_fs) ++hi;
        bool sampled = hi > lo;
        for (std::size_t i = lo; i < hi; ++i)
            if (spec.delays_fs[i + 1] - spec.delays_fs[i] > max_gap) sampled = false;
        if (!sampled) continue;

        Eigen::MatrixXd x(nd, 3);
        Eigen::VectorXd sw(nd);
        for (std::size_t i = 0; i < nd; ++i) {
            const double d = spec.delays_fs[i] - tc;
            sw(i) = std::exp(-0.5 * d * d / (tau_w_fs * tau_w_fs));  // sqrt of the weight
            const double arg = 2.0 * omega * PhysicalConstants::fs_to_au(spec.delays_fs[i]);
            x(i, 0) = 1.0;
            x(i, 1) = std::cos(arg);
            x(i, 2) = std::sin(arg);
        }
        const Eigen::MatrixXd xw = sw.asDiagonal() * x;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
        qr.setThreshold(1e-10);
        if (qr.rank() < 3) continue;
        const Eigen::MatrixXd yw = sw.asDiagonal() * y;
        const Eigen::MatrixXd coef = qr.solve(yw);
        const Eigen::MatrixXd r = xw * coef - yw;
        for (std::size_t j = 0; j < ne; ++j) {
            const std::size_t k = f.index(c, j);
            const double cc = coef(1, j), cs = coef(2, j);
            f.a[k] = coef(0, j);
            f.b[k] = 0.5 * std::hypot(cc, cs);
            f.phi[k] = std::atan2(-cs, cc);
            f.residual[k] = r.col(j).norm();
            f.valid[k] = 1;
        }
    }
    return f;
}

FitField unwrap_phase(FitField field, FitAxis axis) {
    const std::size_t nd = field.n_delays(), ne = field.n_energies();
    const std::size_t outer = axis == FitAxis::energy ? nd : ne;
    const std::size_t inner = axis == FitAxis::energy ? ne : nd;
    for (std::size_t o = 0; o < outer; ++o) {
        bool have = false;
        double last = 0.0;
        for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t k = axis == FitAxis::energy ? field.index(o, i) : field.index(i, o);
            if (!field.valid[k]) continue;
            if (have) field.phi[k] = last + std::remainder(field.phi[k] - last, 2.0 * pi);
            last = field.phi[k];
            have = true;
        }
    }
    return field;
}

void ReconstructionOptions::validate() const {
    if (!(e_c > 0.0)) throw InvalidArgument("reconstruct: e_c must be > 0");
    if (!(alpha > 0.0)) throw InvalidArgument("reconstruct: alpha must be > 0");
    if (!(t_max > t_min) || !(t_step > 0.0)) throw InvalidArgument("reconstruct: need t_min < t_max and t_step > 0");
    if (!(con_floor > 0.0 && con_floor < 1.0)) throw InvalidArgument("reconstruct: con_floor must be in (0, 1)");
}

double refined_peak(const std::vector<double>& axis, const std::vector<double>& m) {
    const auto k = static_cast<std::size_t>(std::max_element(m.begin(), m.end()) - m.begin());
    if (k == 0 || k + 1 == m.size()) return axis[k];
    const double den = m[k - 1] - 2.0 * m[k] + m[k + 1];
    if (den == 0.0) return axis[k];
    return axis[k] + 0.5 * (m[k - 1] - m[k + 1]) / den * 0.5 * (axis[k + 1] - axis[k - 1]);
}

std::vector<std::pair<double, double>> peak_track(const WavePacketMap& map, double floor) {
    const std::size_t nt = map.times_fs.size();
    double global = 0.0;
    for (const auto& v : map.values) global = std::max(global, std::abs(v));
    std::vector<std::pair<double, double>> track;
    if (!(global > 0.0) || nt < 3) return track;
    std::vector<double> mag(nt);
    for (std::size_t it = 0; it < map.delays_fs.size(); ++it) {
        double hi = 0.0, lo = std::abs(map.at(it, 0));
        for (std::size_t k = 0; k < nt; ++k) {
            mag[k] = std::abs(map.at(it, k));
            hi = std::max(hi, mag[k]);
            lo = std::min(lo, mag[k]);
        }
        if (hi <= floor * global || hi == lo) continue;
        track.emplace_back(map.delays_fs[it], refined_peak(map.times_fs, mag));
    }
    return track;
}

WavePacketMap reconstruct_wavepacket(const FitField& fit, const std::vector<std::vector<cplx>>& m_con,
                                     const ReconstructionOptions& o) {
    o.validate();
    const std::size_t nd = fit.n_delays(), ne = fit.n_energies();
    if (m_con.size() != nd) throw InvalidArgument("reconstruct: need one M_con row per delay");
    for (const auto& row : m_con)
        if (row.size() != ne) throw InvalidArgument("reconstruct: M_con row length must match the energy axis");
    if (ne < 2) throw InvalidArgument("reconstruct: need at least two energies");

    WavePacketMap map;
    map.delays_fs = fit.delays_fs;
    const auto nt = static_cast<std::size_t>(std::floor((o.t_max - o.t_min) / o.t_step + 1e-9)) + 1;
    map.times_fs.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) map.times_fs[k] = o.t_min + static_cast<double>(k) * o.t_step;
    map.values.assign(nd * nt, 0.0);

    std::vector<double> e_au(ne), filt(ne), de(ne);
    for (std::size_t j = 0; j < ne; ++j) {
        e_au[j] = PhysicalConstants::eV_to_au(fit.energies_eV[j]);
        filt[j] = std::exp(-std::pow(std::abs(fit.energies_eV[j]) / o.e_c, o.alpha));
    }
    for (std::size_t j = 0; j < ne; ++j) {
        const std::size_t l = j == 0 ? 0 : j - 1, r = j + 1 == ne ? j : j + 1;
        de[j] = 0.5 * (e_au[r] - e_au[l]);
    }

    std::vector<cplx> coeff(ne);
    for (std::size_t it = 0; it < nd; ++it) {
        double con_max = 0.0;
        for (std::size_t j = 0; j < ne; ++j)
            if (filt[j] > o.support_weight) con_max = std::max(con_max, std::abs(m_con[it][j]));
        const double wt = 2.0 * fit.omega * PhysicalConstants::fs_to_au(fit.delays_fs[it]);
        for (std::size_t j = 0; j < ne; ++j) {
            coeff[j] = 0.0;
            if (!(filt[j] > o.support_weight)) continue;
            const std::size_t k = fit.index(it, j);
            if (!fit.valid[k])
                throw InvalidArgument("reconstruct: fit invalid at delay " + std::to_string(fit.delays_fs[it]) +
                                      " fs, energy " + std::to_string(fit.energies_eV[j]) + " eV");
            const cplx mc = m_con[it][j];
            if (!(std::abs(mc) >= o.con_floor * con_max) || !(con_max > 0.0))
                throw NumericalError("reconstruct: division guard, |M_con| below " + std::to_string(o.con_floor) +
                                     " of its maximum at delay " + std::to_string(fit.delays_fs[it]) + " fs, energy " +
                                     std::to_string(fit.energies_eV[j]) + " eV");
            coeff[j] = fit.b[k] * std::polar(1.0, -(fit.phi[k] + wt)) / std::conj(mc) * filt[j] * de[j];
        }
        for (std::size_t k = 0; k < nt; ++k) {
            const double t = PhysicalConstants::fs_to_au(map.times_fs[k]);
            cplx acc = 0.0;
            for (std::size_t j = 0; j < ne; ++j)
                if (coeff[j] != 0.0) acc += coeff[j] * std::polar(1.0, -e_au[j] * t);
            map.values[it * nt + k] = acc;
        }
    }
    map.track = peak_track(map, o.track_floor);
    return map;
}

namespace {

LabelledMatrix field_matrix(const FitField& f, const char* title, const std::vector<double>& v) {
    return {title, "energy_eV", "delay_fs", f.energies_eV, f.delays_fs, v};
}

}  // namespace

void write_fit_field(const std::filesystem::path& dir, const FitField& f) {
    std::filesystem::create_directories(dir);
    write_matrix_csv(dir / "a.csv", field_matrix(f, "lafano fit background a", f.a));
    write_matrix_csv(dir / "b.csv", field_matrix(f, "lafano fit contrast b", f.b));
    write_matrix_csv(dir / "phi.csv", field_matrix(f, "lafano fit phase phi (rad)", f.phi));
    write_matrix_csv(dir / "residual.csv", field_matrix(f, "lafano fit weighted residual", f.residual));
    std::vector<double> mask(f.valid.begin(), f.valid.end());
    write_matrix_csv(dir / "mask.csv", field_matrix(f, "lafano fit validity (1 valid, 0 invalid)", mask));
}

void write_wavepacket(const std::filesystem::path& dir, const WavePacketMap& m) {
    std::filesystem::create_directories(dir);
    std::vector<double> amp(m.values.size()), ph(m.values.size());
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        amp[i] = std::abs(m.values[i]);
        ph[i] = std::arg(m.values[i]);
    }
    write_matrix_csv(dir / "amplitude.csv", {"lafano resonant wave packet |M_res(t)|", "time_fs", "delay_fs",
                                             m.times_fs, m.delays_fs, amp});
    write_matrix_csv(dir / "phase.csv", {"lafano resonant wave packet arg M_res(t) (rad)", "time_fs", "delay_fs",
                                         m.times_fs, m.delays_fs, ph});
    std::ofstream out(dir / "peak_track.csv");
    if (!out) throw Error("cannot write " + (dir / "peak_track.csv").string());
    out << "delay_fs,t_peak_fs\n";
    for (const auto& [tau, t] : m.track) out << format_double(tau) << ',' << format_double(t) << '\n';
    if (!out) throw Error("write failed: peak_track.csv");
}

}  // namespace lafano
