#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lafano/grid.hpp"

namespace lafano {

using cplx = std::complex<double>;

/// Real square band matrix, |i - j| <= half_bandwidth, stored row by row.
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(std::size_t n, std::size_t half_bandwidth);

    std::size_t size() const noexcept { return n_; }
    std::size_t half_bandwidth() const noexcept { return bw_; }

    double operator()(std::size_t i, std::size_t j) const noexcept;
    double& at(std::size_t i, std::size_t j);  // throws outside the band
    bool in_band(std::size_t i, std::size_t j) const noexcept {
        return (i > j ? i - j : j - i) <= bw_;
    }

    /// y += alpha * A x
    void multiply_add(std::span<const cplx> x, std::span<cplx> y, cplx alpha = 1.0) const;
    void multiply_add(std::span<const double> x, std::span<double> y, double alpha = 1.0) const;

    Eigen::MatrixXd to_dense() const;
    /// max |A - A^T|
    double asymmetry() const;

private:
    std::size_t n_ = 0;
    std::size_t bw_ = 0;
    std::vector<double> band_;  // n * (2 bw + 1), entry (i, j) at i*(2bw+1) + (j - i + bw)
};

/// Field-free radial Hamiltonian block for one angular momentum:
/// p_r^2/2 + l(l+1)/(2 r^2) + V(r) on the FE-DVR basis.
struct ChannelOperator {
    int l = 0;
    BandedMatrix matrix;
};

using RadialPotential = std::function<double(double)>;

/// Kinetic matrix 1/2 <chi_g'|chi_h'>.
BandedMatrix assemble_kinetic(const RadialGrid& grid);

/// Row couplings 1/2 <chi_g'|chi_out'> of each basis function to the (dropped)
/// r = r_max Lobatto function, normalised like the interior bridge functions.
std::vector<double> kinetic_outer_column(const RadialGrid& grid);

/// First-derivative matrix <chi_g|chi_h'>. Exactly antisymmetric: the Lobatto
/// rule integrates f_g f_h' without error and the boundary terms vanish.
BandedMatrix assemble_derivative(const RadialGrid& grid);

ChannelOperator assemble_hamiltonian(const RadialGrid& grid, int l, const RadialPotential& potential);

}  // namespace lafano
