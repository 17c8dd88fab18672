#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lafano {

/// Gauss-Lobatto nodes and weights on [-1, 1].
struct LobattoRule {
    std::vector<double> nodes;    // ascending, nodes.front() == -1, nodes.back() == 1
    std::vector<double> weights;  // all positive, sum to 2
};

LobattoRule lobatto_rule(int points);

/// FE-DVR radial grid on [0, r_max] with uniform elements.
///
/// Each element carries `order` Gauss-Lobatto points; neighbouring elements
/// share their end point, and the Lagrange functions of a shared point are
/// joined into one bridge function. The points r = 0 and r = r_max are
/// dropped (zero Dirichlet conditions), leaving
/// n_elements * (order - 1) - 1 basis functions. Basis function g is
/// f_g / sqrt(weight_g) and is orthonormal under the quadrature.
class RadialGrid {
public:
    RadialGrid(double r_max, int n_elements, int order);

    double r_max() const noexcept { return r_max_; }
    int n_elements() const noexcept { return n_elements_; }
    int order() const noexcept { return order_; }
    double element_length() const noexcept { return r_max_ / n_elements_; }

    /// Number of basis functions after both boundary conditions.
    std::size_t dimension() const noexcept { return nodes_.size(); }

    /// Interior (basis) nodes and their summed quadrature weights.
    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }

    /// Reference rule and derivative matrix on [-1, 1]:
    /// ref_derivative()[k * order + m] = f_m'(xi_k).
    const LobattoRule& reference() const noexcept { return ref_; }
    std::span<const double> ref_derivative() const noexcept { return ref_deriv_; }

    /// Physical node/weight of local point k in element e (endpoints included).
    double element_node(int e, int k) const;
    double element_weight(int k) const;

    /// Index into the full node list (0 = r=0, last = r_max).
    std::size_t full_index(int e, int k) const noexcept {
        return static_cast<std::size_t>(e) * (order_ - 1) + k;
    }
    /// Full index -> basis index; returns npos for the two boundary nodes.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t basis_index(std::size_t full) const noexcept {
        if (full == 0 || full >= full_size_ - 1) return npos;
        return full - 1;
    }
    std::size_t full_size() const noexcept { return full_size_; }

    /// Weight at the r = r_max node (last element only).
    double outer_weight() const noexcept { return element_weight(order_ - 1); }

    /// Element-wise Lobatto quadrature of f over [0, r_max].
    template <class F>
    double integrate(F&& f) const {
        double sum = 0.0;
        for (int e = 0; e < n_elements_; ++e)
            for (int k = 0; k < order_; ++k) sum += element_weight(k) * f(element_node(e, k));
        return sum;
    }

    /// Coefficient c_g <-> function value u(r_g) = c_g / sqrt(w_g).
    std::vector<double> values_from_coefficients(std::span<const double> c) const;
    std::vector<double> coefficients_from_values(std::span<const double> u) const;

    /// du/dr at every basis node for coefficients c (u = 0 at both ends).
    /// At shared element boundaries the two one-sided derivatives are averaged.
    std::vector<double> derivative_values(std::span<const double> c) const;

private:
    double r_max_;
    int n_elements_;
    int order_;
    std::size_t full_size_;
    LobattoRule ref_;
    std::vector<double> ref_deriv_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

RadialGrid build_grid(double r_max, int n_elements, int order);

}  // namespace lafano
