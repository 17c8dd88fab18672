#include "lafano/lineshape.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lafano/errors.hpp"
#include "lafano/spectrogram.hpp"

namespace lafano {

void FanoConfig::validate() const {
    if (!(q >= 0.0) || !std::isfinite(q)) throw InvalidArgument("lineshape: q must be finite and >= 0");
    if (!std::isfinite(phase)) throw InvalidArgument("lineshape: phase must be finite");
    if (!(eps_max > eps_min) || !std::isfinite(eps_min) || !std::isfinite(eps_max))
        throw InvalidArgument("lineshape: need eps_min < eps_max");
    if (n_points < 3) throw InvalidArgument("lineshape: need at least 3 points");
}

std::vector<double> FanoConfig::epsilon_axis() const {
    std::vector<double> e(n_points);
    const double h = (eps_max - eps_min) / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) e[i] = eps_min + static_cast<double>(i) * h;
    e.back() = eps_max;
    // exact mirror symmetry for a symmetric range
    if (eps_min == -eps_max) {
        for (std::size_t i = 0; i < n_points / 2; ++i) e[n_points - 1 - i] = -e[i];
        if (n_points % 2 == 1) e[n_points / 2] = 0.0;
    }
    return e;
}

std::complex<double> m_res(double eps) { return 1.0 / std::complex<double>(eps, 1.0); }

std::complex<double> m_con(double eps, double q, double phase) {
    return q * std::polar(1.0, phase) * std::exp(-0.25 * eps * eps);
}

LineshapeTrace lineshape(const FanoConfig& config) {
    config.validate();
    LineshapeTrace t;
    t.epsilon = config.epsilon_axis();
    const std::size_t n = t.epsilon.size();
    t.res.resize(n);
    t.con.resize(n);
    t.total.resize(n);
    t.intensity.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.res[i] = m_res(t.epsilon[i]);
        t.con[i] = m_con(t.epsilon[i], config.q, config.phase);
        t.total[i] = t.res[i] + t.con[i];
        t.intensity[i] = std::norm(t.total[i]);
    }
    return t;
}

double peak_position(const std::vector<double>& epsilon, const std::vector<double>& intensity) {
    if (epsilon.size() != intensity.size() || epsilon.size() < 3)
        throw InvalidArgument("peak_position: need matching axes with >= 3 points");
    const auto k = static_cast<std::size_t>(std::max_element(intensity.begin(), intensity.end()) - intensity.begin());
    if (k == 0 || k + 1 == intensity.size()) return epsilon[k];
    const double y0 = intensity[k - 1], y1 = intensity[k], y2 = intensity[k + 1];
    const double den = y0 - 2.0 * y1 + y2;
    if (den == 0.0) return epsilon[k];
    const double s = 0.5 * (y0 - y2) / den;  // offset in grid steps
    return epsilon[k] + s * 0.5 * (epsilon[k + 1] - epsilon[k - 1]);
}

void write_lineshape_csv(const std::filesystem::path& path, const LineshapeTrace& t) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("lineshape: cannot write " + path.string());
    out << "epsilon,re_m_res,im_m_res,re_m_con,im_m_con,re_m_total,im_m_total,intensity\n";
    for (std::size_t i = 0; i < t.epsilon.size(); ++i) {
        out << format_double(t.epsilon[i]) << ',' << format_double(t.res[i].real()) << ','
            << format_double(t.res[i].imag()) << ',' << format_double(t.con[i].real()) << ','
            << format_double(t.con[i].imag()) << ',' << format_double(t.total[i].real()) << ','
            << format_double(t.total[i].imag()) << ',' << format_double(t.intensity[i]) << '\n';
    }
    if (!out) throw Error("lineshape: write failed for " + path.string());
}

}  // namespace lafano
