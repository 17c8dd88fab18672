#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "lafano/atom.hpp"
#include "lafano/constants.hpp"
#include "lafano/eigensolve.hpp"
#include "lafano/errors.hpp"
#include "lafano/grid.hpp"
#include "lafano/krylov.hpp"
#include "lafano/operators.hpp"

using namespace lafano;

namespace {

std::vector<cplx> random_state(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<cplx> v(n);
    double s = 0.0;
    for (auto& z : v) {
        z = {g(rng), g(rng)};
        s += std::norm(z);
    }
    for (auto& z : v) z /= std::sqrt(s);
    return v;
}

double norm2(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return s;
}

OperatorApplier applier(const BandedMatrix& h) {
    return [&h](std::span<const cplx> in, std::span<cplx> out) {
        std::fill(out.begin(), out.end(), cplx(0.0));
        h.multiply_add(in, out);
    };
}

}  // namespace

TEST_CASE("Lobatto rule: endpoints, positive weights summing to 2") {
    for (int p : {3, 6, 8, 12, 16}) {
        const auto r = lobatto_rule(p);
        REQUIRE(r.nodes.size() == static_cast<std::size_t>(p));
        CHECK(r.nodes.front() == doctest::Approx(-1.0));
        CHECK(r.nodes.back() == doctest::Approx(1.0));
        CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) == doctest::Approx(2.0).epsilon(1e-14));
        for (double w : r.weights) CHECK(w > 0.0);
        for (std::size_t i = 1; i < r.nodes.size(); ++i) CHECK(r.nodes[i] > r.nodes[i - 1]);
    }
    CHECK_THROWS_AS(lobatto_rule(1), InvalidArgument);
}

TEST_CASE("grid quadrature integrates degree 2*order-3 polynomials exactly") {
    for (int order : {4, 8, 12}) {
        const RadialGrid g(7.5, 3, order);
        const int deg = 2 * order - 3;
        // monomials of the local element coordinate, integrated per element
        for (int e = 0; e < g.n_elements(); ++e) {
            const double a = e * g.element_length(), b = a + g.element_length();
            const double mid = 0.5 * (a + b);
            for (int k = 0; k <= deg; ++k) {
                double sum = 0.0;
                for (int j = 0; j < order; ++j) sum += g.element_weight(j) * std::pow(g.element_node(e, j) - mid, k);
                const double h = 0.5 * (b - a);
                const double exact = k % 2 ? 0.0 : 2.0 * std::pow(h, k + 1) / (k + 1);
                CHECK(sum == doctest::Approx(exact).epsilon(1e-12).scale(1.0));
            }
            // one degree more is no longer exact for even powers
            if ((deg + 1) % 2 == 0) {
                double sum = 0.0;
                for (int j = 0; j < order; ++j) sum += g.element_weight(j) * std::pow(g.element_node(e, j) - mid, deg + 1);
                const double h = 0.5 * (b - a);
                CHECK(std::abs(sum - 2.0 * std::pow(h, deg + 2) / (deg + 2)) > 1e-12);
            }
        }
        const double whole = g.integrate([](double r) { return r * r * r; });
        CHECK(whole == doctest::Approx(std::pow(7.5, 4) / 4.0).epsilon(1e-13));
    }
}

TEST_CASE("grid validation and basis without the Dirichlet endpoints") {
    CHECK_THROWS_AS(RadialGrid(-1.0, 4, 8), InvalidArgument);
    CHECK_THROWS_AS(RadialGrid(10.0, 0, 8), InvalidArgument);
    CHECK_THROWS_AS(RadialGrid(10.0, 4, 1), InvalidArgument);
    const RadialGrid g(10.0, 4, 8);
    CHECK(g.dimension() == g.full_size() - 2);
    CHECK(g.full_size() == static_cast<std::size_t>(4 * 7 + 1));
    CHECK(g.basis_index(0) == RadialGrid::npos);
    CHECK(g.basis_index(g.full_size() - 1) == RadialGrid::npos);
    for (double r : g.nodes()) {
        CHECK(r > 0.0);
        CHECK(r < 10.0);
    }
    // values/coefficients round trip
    std::vector<double> u(g.dimension());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(0.3 * g.nodes()[i]);
    const auto back = g.values_from_coefficients(g.coefficients_from_values(u));
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(back[i] == doctest::Approx(u[i]).epsilon(1e-15));
}

TEST_CASE("derivative of a smooth function on the grid") {
    const RadialGrid g(10.0, 10, 12);
    std::vector<double> u(g.dimension());
    // vanishes at both ends like every grid function
    const double k = pi / 10.0;
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::pow(std::sin(k * g.nodes()[i]), 2);
    const auto du = g.derivative_values(g.coefficients_from_values(u));
    for (std::size_t i = 0; i < u.size(); ++i)
        CHECK(du[i] == doctest::Approx(k * std::sin(2.0 * k * g.nodes()[i])).epsilon(1e-8).scale(1.0));
}

TEST_CASE("Hamiltonian and kinetic operator are Hermitian") {
    const RadialGrid g(100.0, 48, 12);
    const auto pot = make_potential(PotentialParams{});
    for (int l = 0; l <= 3; ++l) {
        const auto h = assemble_hamiltonian(g, l, pot);
        CHECK(h.l == l);
        CHECK(h.matrix.asymmetry() < 1e-12);
        CHECK(h.matrix.size() == g.dimension());
        // only adjacent-element bridge coupling: half bandwidth order - 1
        CHECK(h.matrix.half_bandwidth() <= static_cast<std::size_t>(g.order() - 1));
    }
    CHECK(assemble_kinetic(g).asymmetry() < 1e-12);
}

TEST_CASE("kinetic operator reproduces the particle-in-a-box spectrum") {
    const double L = 10.0;
    const RadialGrid g(L, 8, 12);
    const auto h = assemble_hamiltonian(g, 0, [](double) { return 0.0; });
    const auto pairs = eigensolve(h, 5);
    for (int n = 1; n <= 5; ++n) {
        const double exact = 0.5 * std::pow(n * pi / L, 2);
        CHECK(pairs[n - 1].energy == doctest::Approx(exact).epsilon(1e-10));
    }
}

TEST_CASE("banded matrix access and dense conversion") {
    BandedMatrix m(5, 1);
    m.at(0, 0) = 2.0;
    m.at(0, 1) = -1.0;
    m.at(1, 0) = -1.0;
    CHECK_THROWS_AS(m.at(0, 3), InvalidArgument);
    CHECK(m(0, 3) == 0.0);
    const auto d = m.to_dense();
    CHECK(d(0, 0) == 2.0);
    CHECK(d(1, 0) == -1.0);
    std::vector<double> x{1, 2, 3, 4, 5}, y(5, 0.0);
    m.multiply_add(std::span<const double>(x), std::span<double>(y));
    CHECK(y[0] == doctest::Approx(0.0));
    CHECK(y[1] == doctest::Approx(-1.0));
}

TEST_CASE("eigensolve: ascending, unit norm, variational under refinement") {
    const auto pot = make_potential(PotentialParams{});
    const RadialGrid coarse(100.0, 48, 12), fine(100.0, 96, 12);
    const auto a = eigensolve(assemble_hamiltonian(coarse, 0, pot), 3);
    const auto b = eigensolve(assemble_hamiltonian(fine, 0, pot), 3);
    for (std::size_t i = 0; i < 3; ++i) {
        if (i) CHECK(a[i].energy > a[i - 1].energy);
        const double n = std::inner_product(a[i].vector.begin(), a[i].vector.end(), a[i].vector.begin(), 0.0);
        CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(a[i].energy - b[i].energy) < 1e-7);
    }
    const auto all = eigensolve_all(assemble_hamiltonian(coarse, 1, pot));
    CHECK(all.size() == coarse.dimension());
    CHECK_THROWS_AS(eigensolve(assemble_hamiltonian(coarse, 0, pot), coarse.dimension() + 1), InvalidArgument);
}

TEST_CASE("Krylov step preserves the norm without absorber") {
    const RadialGrid g(30.0, 10, 8);
    const auto h = assemble_hamiltonian(g, 0, make_potential(PotentialParams{}));
    const auto H = applier(h.matrix);
    KrylovPropagator prop(g.dimension());
    auto psi = random_state(g.dimension(), 7);
    double worst = 0.0;
    double prev = norm2(psi);
    for (int s = 0; s < 10000; ++s) {
        prop.step(H, psi, 0.05);
        const double now = norm2(psi);
        worst = std::max(worst, std::abs(now - prev));
        prev = now;
    }
    CHECK(worst < 1e-12);
    CHECK(std::abs(norm2(psi) - 1.0) < 1e-8);
}

TEST_CASE("Krylov step agrees with exact eigen-decomposition propagation") {
    const RadialGrid g(20.0, 5, 8);
    const auto h = assemble_hamiltonian(g, 1, make_potential(PotentialParams{}));
    const auto pairs = eigensolve_all(h);
    const auto psi0 = random_state(g.dimension(), 11);
    const double dt = 0.1;
    auto psi = psi0;
    KrylovPropagator prop(g.dimension());
    for (int s = 0; s < 20; ++s) prop.step(applier(h.matrix), psi, dt);
    std::vector<cplx> exact(g.dimension(), 0.0);
    for (const auto& p : pairs) {
        cplx c = 0.0;
        for (std::size_t i = 0; i < psi0.size(); ++i) c += p.vector[i] * psi0[i];
        c *= std::polar(1.0, -p.energy * 20 * dt);
        for (std::size_t i = 0; i < psi0.size(); ++i) exact[i] += c * p.vector[i];
    }
    double err = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) err += std::norm(psi[i] - exact[i]);
    CHECK(std::sqrt(err) < 1e-9);

    const auto one = krylov_step(applier(h.matrix), psi0, dt, 16);
    CHECK(norm2(one) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(krylov_step(applier(h.matrix), psi0, -1.0), InvalidArgument);
}

TEST_CASE("eigenstate phase evolution over 100 steps") {
    const RadialGrid g(100.0, 48, 12);
    const auto h = assemble_hamiltonian(g, 0, make_potential(PotentialParams{}));
    const auto gs = eigensolve(h, 1).front();
    std::vector<cplx> psi(gs.vector.begin(), gs.vector.end());
    KrylovPropagator prop(g.dimension());
    const double dt = 0.05;
    for (int s = 0; s < 100; ++s) prop.step(applier(h.matrix), psi, dt);
    double err = 0.0;
    const cplx ph = std::polar(1.0, -gs.energy * 100 * dt);
    for (std::size_t i = 0; i < psi.size(); ++i) err += std::norm(psi[i] - ph * gs.vector[i]);
    CHECK(std::sqrt(err) < 1e-10);
}
