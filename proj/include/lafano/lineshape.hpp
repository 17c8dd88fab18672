#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <vector>

namespace lafano {

/// Resonance circle on a rotating continuum circle, in reduced energy
/// eps = (E - E_r) / (Gamma / 2).
struct FanoConfig {
    double q = 1.0;      // |M_con| / |M_res| scale, >= 0
    double phase = 0.0;  // 2 w tau, rad
    double eps_min = -8.0;
    double eps_max = 8.0;
    std::size_t n_points = 1601;

    void validate() const;
    std::vector<double> epsilon_axis() const;
};

std::complex<double> m_res(double eps);
std::complex<double> m_con(double eps, double q, double phase);

struct LineshapeTrace {
    std::vector<double> epsilon;
    std::vector<std::complex<double>> res;
    std::vector<std::complex<double>> con;
    std::vector<std::complex<double>> total;
    std::vector<double> intensity;  // |total|^2
};

LineshapeTrace lineshape(const FanoConfig& config);

/// Location of the global maximum of `intensity`, refined by a parabola
/// through the three samples around it.
double peak_position(const std::vector<double>& epsilon, const std::vector<double>& intensity);

/// Columns: epsilon, Re/Im of M_res, M_con, M_total, |M_total|^2.
void write_lineshape_csv(const std::filesystem::path& path, const LineshapeTrace& trace);

}  // namespace lafano
