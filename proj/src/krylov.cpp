#include "lafano/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "lafano/errors.hpp"

namespace lafano {

namespace {

double norm(std::span<const cplx> a) {
    double s = 0.0;
    for (const auto& z : a) s += std::norm(z);
    return std::sqrt(s);
}

}  // namespace

KrylovPropagator::KrylovPropagator(std::size_t state_size, KrylovOptions options)
    : n_(state_size), opt_(options) {
    if (opt_.dimension < 2) throw InvalidArgument("Krylov dimension must be >= 2");
    opt_.max_dimension = std::max(opt_.max_dimension, opt_.dimension);
    basis_.resize((opt_.max_dimension + 1) * n_);
    work_.resize(n_);
}

bool KrylovPropagator::try_step(const OperatorApplier& hamiltonian, std::span<cplx> psi, double dt,
                                KrylovStepInfo& info) {
    const double beta = norm(psi);
    if (!std::isfinite(beta)) throw NumericalError("Krylov step: non-finite input norm");
    if (beta == 0.0) return true;

    auto vec = [&](std::size_t j) { return std::span<cplx>(basis_.data() + j * n_, n_); };
    {
        auto v0 = vec(0);
        for (std::size_t i = 0; i < n_; ++i) v0[i] = psi[i] / beta;
    }

    const std::size_t m_cap = std::min(opt_.max_dimension, n_);
    std::vector<double> alpha, offdiag;  // tridiagonal of the projected operator
    alpha.reserve(m_cap);
    offdiag.reserve(m_cap);
    std::size_t m_target = std::min(opt_.dimension, m_cap);
    std::size_t built = 0;
    bool breakdown = false;

    Eigen::VectorXcd y;
    double err = 0.0;
    while (true) {
        for (std::size_t j = built; j < m_target && !breakdown; ++j) {
            auto w = vec(j + 1);
            hamiltonian(vec(j), w);
            // Full reorthogonalisation, two passes of classical Gram-Schmidt.
            Eigen::Map<Eigen::VectorXcd> wv(w.data(), static_cast<Eigen::Index>(n_));
            const auto vj = basis_map().leftCols(static_cast<Eigen::Index>(j + 1));
            double a_j = 0.0;
            for (int pass = 0; pass < 2; ++pass) {
                const Eigen::VectorXcd h = vj.adjoint() * wv;
                a_j += h(static_cast<Eigen::Index>(j)).real();
                wv.noalias() -= vj * h;
            }
            alpha.push_back(a_j);
            const double b = norm(w);
            if (!std::isfinite(b) || !std::isfinite(a_j))
                throw NumericalError("Krylov step: NaN in Lanczos recursion at subspace index " +
                                     std::to_string(j));
            built = j + 1;
            if (b <= 1e-14 * std::max(1.0, std::abs(a_j))) {
                breakdown = true;
                break;
            }
            offdiag.push_back(b);
            for (std::size_t k = 0; k < n_; ++k) w[k] /= b;
        }

        const auto m = static_cast<Eigen::Index>(built);
        Eigen::VectorXd d(m), e(std::max<Eigen::Index>(m - 1, 0));
        for (Eigen::Index i = 0; i < m; ++i) d(i) = alpha[i];
        for (Eigen::Index i = 0; i + 1 < m; ++i) e(i) = offdiag[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
        if (es.info() != Eigen::Success) throw NumericalError("Krylov step: projected eigensolve failed");
        Eigen::VectorXcd phase(m);
        for (Eigen::Index i = 0; i < m; ++i)
            phase(i) = std::exp(cplx(0.0, -dt * es.eigenvalues()(i))) * es.eigenvectors()(0, i);
        y = es.eigenvectors().cast<cplx>() * phase;

        err = breakdown ? 0.0 : offdiag[built - 1] * std::abs(y(m - 1));
        info.dimension_used = std::max(info.dimension_used, built);
        if (err <= opt_.tolerance || breakdown) break;
        if (built >= m_cap) return false;
        m_target = std::min(m_cap, built + opt_.growth);
    }

    Eigen::Map<Eigen::VectorXcd> out_v(psi.data(), static_cast<Eigen::Index>(n_));
    out_v.noalias() = basis_map().leftCols(static_cast<Eigen::Index>(built)) * (beta * y);
    const double out = norm(psi);
    if (!std::isfinite(out)) throw NumericalError("Krylov step: non-finite result");
    const double s = beta / out;
    for (auto& z : psi) z *= s;
    info.error_estimate = std::max(info.error_estimate, err);
    return true;
}

KrylovStepInfo KrylovPropagator::step_recursive(const OperatorApplier& hamiltonian, std::span<cplx> psi, double dt,
                                                int depth) {
    KrylovStepInfo info;
    if (try_step(hamiltonian, psi, dt, info)) return info;
    if (depth >= opt_.max_split_depth)
        throw NumericalError("Krylov step: residual above tolerance after " + std::to_string(depth) +
                             " step halvings (dt = " + std::to_string(dt) + ")");
    auto a = step_recursive(hamiltonian, psi, 0.5 * dt, depth + 1);
    auto b = step_recursive(hamiltonian, psi, 0.5 * dt, depth + 1);
    info.dimension_used = std::max({info.dimension_used, a.dimension_used, b.dimension_used});
    info.error_estimate = std::max(a.error_estimate, b.error_estimate);
    info.substeps = a.substeps + b.substeps;
    return info;
}

KrylovStepInfo KrylovPropagator::step(const OperatorApplier& hamiltonian, std::span<cplx> psi, double dt) {
    if (psi.size() != n_) throw InvalidArgument("Krylov step: state size mismatch");
    if (dt == 0.0) return {};
    return step_recursive(hamiltonian, psi, dt, 0);
}

std::vector<cplx> krylov_step(const OperatorApplier& hamiltonian, std::span<const cplx> psi, double dt,
                              std::size_t m) {
    if (!(dt > 0.0)) throw InvalidArgument("krylov_step: dt must be > 0");
    if (m < 2) throw InvalidArgument("krylov_step: Krylov dimension must be >= 2");
    KrylovOptions opt;
    opt.dimension = m;
    opt.max_dimension = std::max<std::size_t>(m, 60);
    KrylovPropagator prop(psi.size(), opt);
    std::vector<cplx> out(psi.begin(), psi.end());
    prop.step(hamiltonian, out, dt);
    return out;
}

}  // namespace lafano
