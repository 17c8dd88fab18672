#include "lafano/grid.hpp"

#include <cmath>
#include <string>

#include "lafano/constants.hpp"
#include "lafano/errors.hpp"

namespace lafano {

namespace {

// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

LobattoRule lobatto_rule(int points) {
    if (points < 2) throw InvalidArgument("lobatto_rule: need at least 2 points");
    const int n = points - 1;
    LobattoRule rule;
    rule.nodes.assign(points, 0.0);
    rule.weights.assign(points, 0.0);
    rule.nodes.front() = -1.0;
    rule.nodes.back() = 1.0;
    // Interior nodes are the roots of P_n'. Newton on P_n' with Chebyshev-Gauss-Lobatto
    // starting points; P_n'' from the Legendre ODE.
    for (int i = 1; i < n; ++i) {
        double x = -std::cos(pi * i / n);
        for (int it = 0; it < 100; ++it) {
            double p, dp;
            legendre(n, x, p, dp);
            const double d2p = (2.0 * x * dp - n * (n + 1.0) * p) / (1.0 - x * x);
            const double dx = dp / d2p;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = x;
    }
    for (int i = 0; i < points; ++i) {
        double p, dp;
        const double x = rule.nodes[i];
        if (i == 0 || i == n) {
            p = (i == 0 && n % 2 == 1) ? -1.0 : 1.0;
        } else {
            legendre(n, x, p, dp);
        }
        rule.weights[i] = 2.0 / (n * (n + 1.0) * p * p);
    }
    return rule;
}

RadialGrid::RadialGrid(double r_max, int n_elements, int order)
    : r_max_(r_max), n_elements_(n_elements), order_(order) {
    if (!(r_max > 0.0) || !std::isfinite(r_max))
        throw InvalidArgument("build_grid: r_max must be positive, got " + std::to_string(r_max));
    if (n_elements < 1)
        throw InvalidArgument("build_grid: n_elements must be >= 1, got " + std::to_string(n_elements));
    if (order < 3) throw InvalidArgument("build_grid: order must be >= 3, got " + std::to_string(order));

    ref_ = lobatto_rule(order);
    const auto& x = ref_.nodes;

    // Barycentric derivative matrix of the Lagrange basis on the reference nodes.
    std::vector<double> bary(order, 1.0);
    for (int m = 0; m < order; ++m)
        for (int j = 0; j < order; ++j)
            if (j != m) bary[m] /= (x[m] - x[j]);
    ref_deriv_.assign(static_cast<std::size_t>(order) * order, 0.0);
    for (int k = 0; k < order; ++k) {
        double diag = 0.0;
        for (int m = 0; m < order; ++m) {
            if (m == k) continue;
            const double d = (bary[m] / bary[k]) / (x[k] - x[m]);
            ref_deriv_[k * order + m] = d;
            diag -= d;
        }
        ref_deriv_[k * order + k] = diag;
    }

    full_size_ = static_cast<std::size_t>(n_elements) * (order - 1) + 1;
    std::vector<double> full_w(full_size_, 0.0);
    std::vector<double> full_r(full_size_, 0.0);
    for (int e = 0; e < n_elements; ++e)
        for (int k = 0; k < order; ++k) {
            const auto g = full_index(e, k);
            full_r[g] = element_node(e, k);
            full_w[g] += element_weight(k);
        }
    full_r.back() = r_max;
    nodes_.assign(full_r.begin() + 1, full_r.end() - 1);
    weights_.assign(full_w.begin() + 1, full_w.end() - 1);
}

double RadialGrid::element_node(int e, int k) const {
    const double h = element_length();
    return h * e + 0.5 * h * (ref_.nodes[k] + 1.0);
}

double RadialGrid::element_weight(int k) const { return 0.5 * element_length() * ref_.weights[k]; }

std::vector<double> RadialGrid::values_from_coefficients(std::span<const double> c) const {
    if (c.size() != dimension()) throw InvalidArgument("values_from_coefficients: size mismatch");
    std::vector<double> u(c.size());
    for (std::size_t g = 0; g < c.size(); ++g) u[g] = c[g] / std::sqrt(weights_[g]);
    return u;
}

std::vector<double> RadialGrid::coefficients_from_values(std::span<const double> u) const {
    if (u.size() != dimension()) throw InvalidArgument("coefficients_from_values: size mismatch");
    std::vector<double> c(u.size());
    for (std::size_t g = 0; g < u.size(); ++g) c[g] = u[g] * std::sqrt(weights_[g]);
    return c;
}

std::vector<double> RadialGrid::derivative_values(std::span<const double> c) const {
    const auto u = values_from_coefficients(c);
    std::vector<double> du(dimension(), 0.0);
    std::vector<int> count(dimension(), 0);
    const double scale = 2.0 / element_length();
    for (int e = 0; e < n_elements_; ++e) {
        for (int k = 0; k < order_; ++k) {
            const auto bk = basis_index(full_index(e, k));
            if (bk == npos) continue;
            double d = 0.0;
            for (int m = 0; m < order_; ++m) {
                const auto bm = basis_index(full_index(e, m));
                if (bm == npos) continue;
                d += ref_deriv_[k * order_ + m] * u[bm];
            }
            du[bk] += scale * d;
            ++count[bk];
        }
    }
    for (std::size_t g = 0; g < du.size(); ++g) du[g] /= count[g];
    return du;
}

RadialGrid build_grid(double r_max, int n_elements, int order) { return RadialGrid(r_max, n_elements, order); }

}  // namespace lafano
