#pragma once

#include <cstddef>
#include <vector>

#include "lafano/operators.hpp"

namespace lafano {

struct Eigenpair {
    double energy = 0.0;
    std::vector<double> vector;  // FE-DVR coefficients, unit norm
};

/// k lowest eigenpairs of a channel operator, energies ascending.
/// Dense Hermitian diagonalisation; the full spectrum is cheap at these sizes.
std::vector<Eigenpair> eigensolve(const ChannelOperator& op, std::size_t k);

/// All eigenpairs.
std::vector<Eigenpair> eigensolve_all(const ChannelOperator& op);

}  // namespace lafano
