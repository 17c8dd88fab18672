#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace lafano {

using cplx = std::complex<double>;

/// out = H in, for a Hermitian H. Must not alias.
using OperatorApplier = std::function<void(std::span<const cplx> in, std::span<cplx> out)>;

struct KrylovOptions {
    std::size_t dimension = 12;      // starting Krylov dimension
    std::size_t max_dimension = 60;  // growth cap before the step is split
    std::size_t growth = 4;
    double tolerance = 1e-12;        // residual estimate relative to the input norm
    int max_split_depth = 12;
};

struct KrylovStepInfo {
    std::size_t dimension_used = 0;  // largest subspace built
    double error_estimate = 0.0;     // relative residual of the accepted step(s)
    int substeps = 1;
};

/// Lanczos-Arnoldi propagator for psi <- exp(-i H dt) psi.
///
/// The subspace is built with full reorthogonalisation so the projected
/// matrix is Hermitian to rounding; the result is rescaled to the input norm.
/// If the residual estimate stays above tolerance at max_dimension the step is
/// halved recursively. Breakdown (an invariant subspace) truncates the basis,
/// which makes the step exact. Owns its workspace: one instance per thread.
class KrylovPropagator {
public:
    explicit KrylovPropagator(std::size_t state_size, KrylovOptions options = {});

    const KrylovOptions& options() const noexcept { return opt_; }

    /// Applies exp(-i H dt) in place. dt may have either sign here; the free
    /// function krylov_step enforces dt > 0.
    KrylovStepInfo step(const OperatorApplier& hamiltonian, std::span<cplx> psi, double dt);

private:
    // Tries a single step; returns false (psi untouched) if not converged.
    bool try_step(const OperatorApplier& hamiltonian, std::span<cplx> psi, double dt, KrylovStepInfo& info);
    KrylovStepInfo step_recursive(const OperatorApplier& hamiltonian, std::span<cplx> psi, double dt, int depth);

    Eigen::Map<Eigen::MatrixXcd> basis_map() {
        return {basis_.data(), static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(opt_.max_dimension + 1)};
    }

    std::size_t n_;
    KrylovOptions opt_;
    std::vector<cplx> basis_;  // (max_dimension + 1) * n
    std::vector<cplx> work_;
};

/// One Krylov step with default options. Throws on dt <= 0, m < 2, or NaN.
std::vector<cplx> krylov_step(const OperatorApplier& hamiltonian, std::span<const cplx> psi, double dt,
                              std::size_t m = 12);

}  // namespace lafano
