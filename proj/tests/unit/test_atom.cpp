#include <doctest.h>

#include <cmath>
#include <numeric>

#include "lafano/atom.hpp"
#include "lafano/constants.hpp"
#include "lafano/errors.hpp"

using namespace lafano;

namespace {

const RadialGrid& grid() {
    static const RadialGrid g(100.0, 48, 12);
    return g;
}

// <a| z |b> in the DVR approximation, including the m = 0 angular factor.
double length_element(const RadialState& a, const RadialState& b, const RadialGrid& g) {
    double s = 0.0;
    const auto r = g.nodes();
    for (std::size_t i = 0; i < r.size(); ++i) s += a.coefficients[i] * r[i] * b.coefficients[i];
    return DipoleCoupling::angular(std::min(a.l, b.l)) * s;
}

}  // namespace

TEST_CASE("potential limits at the origin and at large r") {
    const PotentialParams p;
    CHECK(p.z_origin() == doctest::Approx(2.0));
    CHECK(potential_eval(p, 1e-7) * 1e-7 == doctest::Approx(-2.0).epsilon(1e-5));
    CHECK(potential_eval(p, 300.0) * 300.0 == doctest::Approx(-1.0).epsilon(1e-10));
    PotentialParams z2 = p;
    z2.z_asymptotic = 2.0;
    CHECK(potential_eval(z2, 300.0) * 300.0 == doctest::Approx(-2.0).epsilon(1e-10));
    // derivative against a central difference
    for (double r : {0.3, 1.0, 2.5, 7.0}) {
        const double h = 1e-5;
        const double fd = (potential_eval(p, r + h) - potential_eval(p, r - h)) / (2 * h);
        CHECK(potential_derivative(p, r) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("potential validation") {
    PotentialParams p;
    p.a2 = 0.0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.a6 = -1.0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.a1 = NAN;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    CHECK_NOTHROW(PotentialParams{}.validate());
}

TEST_CASE("reference level regression with z_asymptotic = 1") {
    const PotentialParams p;
    const auto s = bound_states(grid(), p, 0, 2);
    const auto pp = bound_states(grid(), p, 1, 2);
    CHECK(std::abs(s[0].energy - ReferenceLevels::e_1s) < 1e-5);
    CHECK(std::abs(s[1].energy - ReferenceLevels::e_2s) < 1e-5);
    // the lowest p state is 2p; 3p is the second one
    CHECK(std::abs(pp[1].energy - ReferenceLevels::e_3p) < 1e-5);
    CHECK(pp[0].energy < pp[1].energy);
    const double transition = pp[1].energy - s[0].energy;
    CHECK(std::abs((ReferenceLevels::e_3p - ReferenceLevels::e_1s) - 0.848405) < 1e-9);
    CHECK(std::abs(transition - 0.84843) < 1e-4);
}

TEST_CASE("z_asymptotic = 2 does not reproduce the reference levels") {
    PotentialParams p;
    p.z_asymptotic = 2.0;
    const auto s = bound_states(grid(), p, 0, 1);
    CHECK(std::abs(s[0].energy - ReferenceLevels::e_1s) > 0.5);
}

TEST_CASE("state table: ascending energies, unit norms, bound/continuum split") {
    const auto t = build_state_table(grid(), PotentialParams{}, 2);
    REQUIRE(t.channels.size() == 3);
    for (int l = 0; l <= 2; ++l) {
        const auto& ch = t.channel(l);
        CHECK(ch.l == l);
        CHECK(!ch.bound.empty());
        double last = -1e300;
        for (const auto& b : ch.bound) {
            CHECK(b.energy < 0.0);
            CHECK(b.energy > last);
            last = b.energy;
            const double n = std::inner_product(b.coefficients.begin(), b.coefficients.end(), b.coefficients.begin(), 0.0);
            CHECK(std::abs(n - 1.0) < 1e-10);
        }
        for (const auto& c : ch.continuum) {
            CHECK(c.energy >= 0.0);
            CHECK(c.energy > last);
            last = c.energy;
        }
        CHECK(ch.level_spacing.size() == ch.continuum.size());
        for (double d : ch.level_spacing) CHECK(d > 0.0);
    }
    CHECK_THROWS_AS(t.channel(3), InvalidArgument);
}

TEST_CASE("dipole selection rule and velocity/length agreement") {
    const auto& g = grid();
    const PotentialParams p;
    const DipoleCoupling dc(g, 2);
    const auto s = bound_states(g, p, 0, 2);
    const auto pp = bound_states(g, p, 1, 3);
    const auto d = bound_states(g, p, 2, 1);
    CHECK_FALSE(dipole_element(s[0], s[1], dc).allowed);
    CHECK_FALSE(dipole_element(s[0], d[0], dc).allowed);
    for (const auto& ket : pp) {
        const auto v = dipole_element(s[0], ket, dc);
        REQUIRE(v.allowed);
        CHECK(std::abs(v.value.real()) < 1e-14);
        // <a|p|b> = i (E_a - E_b) <a|z|b>
        const double z = length_element(s[0], ket, g);
        CHECK(v.value.imag() == doctest::Approx((s[0].energy - ket.energy) * z).epsilon(2e-5));
        // Hermiticity: <b|p|a> = conj(<a|p|b>)
        const auto back = dipole_element(ket, s[0], dc);
        CHECK(std::abs(back.value - std::conj(v.value)) < 1e-10);
    }
    const auto pd = dipole_element(pp[0], d[0], dc);
    CHECK(pd.value.imag() == doctest::Approx((pp[0].energy - d[0].energy) * length_element(pp[0], d[0], g)).epsilon(2e-5));
    CHECK(DipoleCoupling::angular(0) == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(DipoleCoupling::angular(1) == doctest::Approx(2.0 / std::sqrt(15.0)));
}

TEST_CASE("continuum normalization is grid independent") {
    const PotentialParams p;
    const std::vector<double> e{PhysicalConstants::eV_to_au(0.2), PhysicalConstants::eV_to_au(1.0),
                                PhysicalConstants::eV_to_au(1.8)};
    auto strength = [&](const RadialGrid& g) {
        const DipoleCoupling dc(g, 1);
        const auto gs = bound_states(g, p, 0, 1).front();
        const auto cs = continuum_states(g, p, 1, e);
        std::vector<double> out;
        for (const auto& c : cs.coefficients) {
            RadialState st{1, 0.0, c};
            out.push_back(std::norm(dipole_element(st, gs, dc).value));
        }
        return out;
    };
    const auto base = strength(grid());
    const auto finer = strength(RadialGrid(100.0, 96, 12));
    const auto larger = strength(RadialGrid(200.0, 96, 12));
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(base[i] > 0.0);
        CHECK(std::abs(finer[i] / base[i] - 1.0) < 0.01);
        CHECK(std::abs(larger[i] / base[i] - 1.0) < 0.01);
    }
}

TEST_CASE("continuum states reject negative energies") {
    const std::vector<double> e{-0.1};
    CHECK_THROWS_AS(continuum_states(grid(), PotentialParams{}, 0, e), InvalidArgument);
}
