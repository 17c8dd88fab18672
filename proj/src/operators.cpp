#include "lafano/operators.hpp"

#include <cmath>
#include <string>

#include "lafano/errors.hpp"

namespace lafano {

BandedMatrix::BandedMatrix(std::size_t n, std::size_t half_bandwidth)
    : n_(n), bw_(half_bandwidth), band_(n * (2 * half_bandwidth + 1), 0.0) {}

double BandedMatrix::operator()(std::size_t i, std::size_t j) const noexcept {
    if (!in_band(i, j)) return 0.0;
    return band_[i * (2 * bw_ + 1) + (j + bw_ - i)];
}

double& BandedMatrix::at(std::size_t i, std::size_t j) {
    if (i >= n_ || j >= n_ || !in_band(i, j)) throw InvalidArgument("BandedMatrix::at outside band");
    return band_[i * (2 * bw_ + 1) + (j + bw_ - i)];
}

namespace {

template <class T, class S>
void banded_multiply_add(std::size_t n, std::size_t bw, const std::vector<double>& band, std::span<const T> x,
                         std::span<T> y, S alpha) {
    const std::size_t w = 2 * bw + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j0 = i >= bw ? i - bw : 0;
        const std::size_t j1 = std::min(n - 1, i + bw);
        const double* row = band.data() + i * w + (j0 + bw - i);
        T acc{};
        for (std::size_t j = j0; j <= j1; ++j) acc += row[j - j0] * x[j];
        y[i] += alpha * acc;
    }
}

}  // namespace

void BandedMatrix::multiply_add(std::span<const cplx> x, std::span<cplx> y, cplx alpha) const {
    // Real band times complex vector, on the interleaved (re, im) doubles.
    const std::size_t w = 2 * bw_ + 1;
    const double* xd = reinterpret_cast<const double*>(x.data());
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t j0 = i >= bw_ ? i - bw_ : 0;
        const std::size_t j1 = std::min(n_ - 1, i + bw_);
        const double* row = band_.data() + i * w + (j0 + bw_ - i);
        double re = 0.0, im = 0.0;
        for (std::size_t j = j0; j <= j1; ++j) {
            re += row[j - j0] * xd[2 * j];
            im += row[j - j0] * xd[2 * j + 1];
        }
        y[i] += alpha * cplx(re, im);
    }
}

void BandedMatrix::multiply_add(std::span<const double> x, std::span<double> y, double alpha) const {
    banded_multiply_add(n_, bw_, band_, x, y, alpha);
}

Eigen::MatrixXd BandedMatrix::to_dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = (i >= bw_ ? i - bw_ : 0); j < std::min(n_, i + bw_ + 1); ++j) m(i, j) = (*this)(i, j);
    return m;
}

double BandedMatrix::asymmetry() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < std::min(n_, i + bw_ + 1); ++j)
            worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
    return worst;
}

namespace {

// Visits every local (a, b) pair of every element.
template <class Fn>
void for_element_pairs(const RadialGrid& grid, Fn&& fn) {
    const int n = grid.order();
    for (int e = 0; e < grid.n_elements(); ++e)
        for (int k = 0; k < n; ++k)
            for (int m = 0; m < n; ++m) fn(e, k, m);
}

}  // namespace

BandedMatrix assemble_kinetic(const RadialGrid& grid) {
    const int n = grid.order();
    const auto dim = grid.dimension();
    BandedMatrix t(dim, n - 1);
    const auto d = grid.ref_derivative();
    const double s = 2.0 / grid.element_length();
    const auto w = grid.weights();
    for_element_pairs(grid, [&](int e, int a, int b) {
        const auto ga = grid.basis_index(grid.full_index(e, a));
        const auto gb = grid.basis_index(grid.full_index(e, b));
        if (ga == RadialGrid::npos || gb == RadialGrid::npos) return;
        double sum = 0.0;
        for (int k = 0; k < n; ++k) sum += grid.element_weight(k) * (s * d[k * n + a]) * (s * d[k * n + b]);
        t.at(ga, gb) += 0.5 * sum / std::sqrt(w[ga] * w[gb]);
    });
    return t;
}

std::vector<double> kinetic_outer_column(const RadialGrid& grid) {
    const int n = grid.order();
    const int e = grid.n_elements() - 1;
    const auto d = grid.ref_derivative();
    const double s = 2.0 / grid.element_length();
    const auto w = grid.weights();
    const double w_out = grid.outer_weight();
    std::vector<double> col(grid.dimension(), 0.0);
    for (int a = 0; a < n - 1; ++a) {
        const auto ga = grid.basis_index(grid.full_index(e, a));
        if (ga == RadialGrid::npos) continue;
        double sum = 0.0;
        for (int k = 0; k < n; ++k) sum += grid.element_weight(k) * (s * d[k * n + a]) * (s * d[k * n + n - 1]);
        col[ga] = 0.5 * sum / std::sqrt(w[ga] * w_out);
    }
    return col;
}

BandedMatrix assemble_derivative(const RadialGrid& grid) {
    const int n = grid.order();
    const auto dim = grid.dimension();
    BandedMatrix dm(dim, n - 1);
    const auto d = grid.ref_derivative();
    const double s = 2.0 / grid.element_length();
    const auto w = grid.weights();
    // <f_a|f_b'>_e = w_a f_b'(x_a)
    for_element_pairs(grid, [&](int e, int a, int b) {
        const auto ga = grid.basis_index(grid.full_index(e, a));
        const auto gb = grid.basis_index(grid.full_index(e, b));
        if (ga == RadialGrid::npos || gb == RadialGrid::npos) return;
        dm.at(ga, gb) += grid.element_weight(a) * s * d[a * n + b] / std::sqrt(w[ga] * w[gb]);
    });
    // Remove rounding-level symmetric part.
    for (std::size_t i = 0; i < dim; ++i) {
        dm.at(i, i) = 0.0;
        for (std::size_t j = i + 1; j < std::min(dim, i + n); ++j) {
            const double a = 0.5 * (dm(i, j) - dm(j, i));
            dm.at(i, j) = a;
            dm.at(j, i) = -a;
        }
    }
    return dm;
}

ChannelOperator assemble_hamiltonian(const RadialGrid& grid, int l, const RadialPotential& potential) {
    if (l < 0) throw InvalidArgument("assemble_hamiltonian: l must be >= 0");
    ChannelOperator op{l, assemble_kinetic(grid)};
    const auto r = grid.nodes();
    for (std::size_t g = 0; g < r.size(); ++g) {
        const double v = potential(r[g]);
        if (!std::isfinite(v))
            throw InvalidArgument("assemble_hamiltonian: non-finite potential at r = " + std::to_string(r[g]));
        op.matrix.at(g, g) += v + 0.5 * l * (l + 1.0) / (r[g] * r[g]);
    }
    // Kinetic assembly leaves O(eps) asymmetry; symmetrise exactly.
    const auto n = op.matrix.size();
    const auto bw = op.matrix.half_bandwidth();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < std::min(n, i + bw + 1); ++j) {
            const double s = 0.5 * (op.matrix(i, j) + op.matrix(j, i));
            op.matrix.at(i, j) = s;
            op.matrix.at(j, i) = s;
        }
    return op;
}

}  // namespace lafano
