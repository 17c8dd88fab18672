#include "lafano/eigensolve.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "lafano/errors.hpp"

namespace lafano {

std::vector<Eigenpair> eigensolve(const ChannelOperator& op, std::size_t k) {
    const auto n = op.matrix.size();
    if (k > n)
        throw InvalidArgument("eigensolve: requested " + std::to_string(k) + " pairs from dimension " +
                              std::to_string(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.matrix.to_dense());
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigensolve: dense diagonalisation did not converge (l = " + std::to_string(op.l) + ")");

    std::vector<Eigenpair> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        out[i].energy = solver.eigenvalues()(static_cast<Eigen::Index>(i));
        if (!std::isfinite(out[i].energy)) throw NumericalError("eigensolve: non-finite eigenvalue");
        const auto col = solver.eigenvectors().col(static_cast<Eigen::Index>(i));
        out[i].vector.assign(col.data(), col.data() + n);
        // Fix the sign so the function starts positive near the origin.
        double first = 0.0;
        for (double v : out[i].vector)
            if (std::abs(v) > 1e-8) {
                first = v;
                break;
            }
        if (first < 0.0)
            for (double& v : out[i].vector) v = -v;
    }
    return out;
}

std::vector<Eigenpair> eigensolve_all(const ChannelOperator& op) { return eigensolve(op, op.matrix.size()); }

}  // namespace lafano
