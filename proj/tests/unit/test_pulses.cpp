#include <doctest.h>

#include <cmath>

#include "lafano/constants.hpp"
#include "lafano/errors.hpp"
#include "lafano/pulses.hpp"

using namespace lafano;

TEST_CASE("envelope is one half at +-FWHM/2 and peaks at the centre") {
    const PulseComponent c{"IR", 0.057, 3e12, 31.0, 4.0};
    const double t = c.center_au(), h = 0.5 * c.fwhm_au();
    CHECK(c.envelope(t) == doctest::Approx(1.0));
    CHECK(c.envelope(t + h) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(c.envelope(t - h) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(c.intensity(t) == doctest::Approx(PhysicalConstants::Wcm2_to_au(3e12)));
    CHECK(c.vector_potential(t) == doctest::Approx(std::sqrt(c.peak_intensity_au()) / c.omega));
}

TEST_CASE("components decay beyond three FWHM") {
    const auto train = make_helium_train(7.0);
    for (const auto& c : train.components) {
        const double peak = c.peak_intensity_au();
        for (double s : {-1.0, 1.0}) {
            const double t = c.center_au() + s * 3.0 * c.fwhm_au() * 1.0001;
            CHECK(c.intensity(t) < 1e-12 * peak);
        }
    }
    const auto [lo, hi] = train.window(3.0, 10.0);
    CHECK(lo == doctest::Approx(PhysicalConstants::fs_to_au(-7.0 - 93.0)));
    CHECK(hi == doctest::Approx(PhysicalConstants::fs_to_au(-7.0 + 93.0) + 10.0));
}

TEST_CASE("delay convention: negative delay puts the IR after the XUV") {
    const auto train = make_helium_train(-5.0);
    REQUIRE(train.find("IR"));
    REQUIRE(train.find("H15"));
    REQUIRE(train.find("H17"));
    CHECK(train.find("IR")->center == doctest::Approx(5.0));
    CHECK(train.find("H15")->center == 0.0);
    CHECK(train.find("H17")->omega == doctest::Approx(17.0 * PulseDefaults::omega_ir));
    const auto moved = with_delay(train, 3.0);
    CHECK(moved.find("IR")->center == doctest::Approx(-3.0));
    CHECK(moved.find("H17")->center == 0.0);
    CHECK(train.find("nothing") == nullptr);
}

TEST_CASE("vector potential is the sum of the components") {
    const auto train = make_helium_train(2.0);
    for (double t : {-300.0, -10.0, 0.0, 55.5, 400.0}) {
        double s = 0.0;
        for (const auto& c : train.components) s += c.vector_potential(t);
        CHECK(vector_potential(train, t) == doctest::Approx(s));
    }
}

TEST_CASE("ponderomotive energy matches the quoted 1s Stark shift scale") {
    const double up = ponderomotive(3e12, PulseDefaults::omega_ir);
    CHECK(up == doctest::Approx(PhysicalConstants::Wcm2_to_au(3e12) / (4 * 0.05703 * 0.05703)));
    CHECK(std::abs(up - 6.6e-3) < 0.05 * 6.6e-3);
    CHECK_THROWS_AS(ponderomotive(-1.0, 0.05), InvalidArgument);
    CHECK_THROWS_AS(ponderomotive(1e12, 0.0), InvalidArgument);
}

TEST_CASE("product_peak agrees with the numerical argmax of the envelope product") {
    for (double tau = -25.0; tau <= 25.0; tau += 2.5) {
        const auto train = make_helium_train(tau);
        const auto& ir = *train.find("IR");
        const auto& x = *train.find("H17");
        // golden-section search on the product
        auto f = [&](double t) {
            const double ta = PhysicalConstants::fs_to_au(t);
            return ir.envelope(ta) * x.envelope(ta);
        };
        double a = -40.0, b = 40.0;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int i = 0; i < 200; ++i) {
            const double c = b - g * (b - a), d = a + g * (b - a);
            if (f(c) > f(d)) b = d;
            else a = c;
        }
        CHECK(std::abs(0.5 * (a + b) - product_peak(tau, ir.fwhm, x.fwhm)) < 0.01);
    }
    CHECK_THROWS_AS(product_peak(0.0, 0.0, 12.0), InvalidArgument);
}

TEST_CASE("component validation") {
    CHECK_THROWS_AS((PulseComponent{"x", 0.0, 1e12, 10.0, 0.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((PulseComponent{"x", 0.1, -1.0, 10.0, 0.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((PulseComponent{"x", 0.1, 1e12, 0.0, 0.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((PulseComponent{"x", 0.1, 1e12, 10.0, NAN}.validate()), InvalidArgument);
    CHECK_NOTHROW(make_helium_train(0.0).validate());
    // a switched-off component does not widen the window
    auto train = make_helium_train(-40.0, 3e12, 0.0, 0.0);
    const auto [lo, hi] = train.window();
    CHECK(lo == doctest::Approx(PhysicalConstants::fs_to_au(40.0 - 93.0)));
    CHECK(hi == doctest::Approx(PhysicalConstants::fs_to_au(40.0 + 93.0)));
}
