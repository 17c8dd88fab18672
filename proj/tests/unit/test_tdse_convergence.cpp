#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "lafano/config.hpp"
#include "lafano/tdse.hpp"

// Full-size propagations on the default grid at one overlap delay: the
// sideband 16 peak of P(E) must not move when the numerical parameters are
// tightened.

using namespace lafano;
using nlohmann::json;

namespace {

double sb16_peak(json overrides) {
    overrides["delays"] = {0.0};
    overrides["energy_min"] = 0.0;
    overrides["energy_max"] = 0.6;
    overrides["energy_step"] = 0.005;
    const auto c = resolve_config(overrides, "tdse-scan");
    const double cutoff = c.is_null("spectral_cutoff") ? std::numeric_limits<double>::infinity()
                                                        : c.number("spectral_cutoff");
    const TdseSystem sys(make_grid_spec(c), make_potential(c), static_cast<int>(c.integer("l_max")), cutoff);
    const auto delays = delay_axis_fs(c);
    const auto r = delay_scan(sys, make_tdse_scenario(c), delays, energy_axis_eV(c));
    REQUIRE(r.failures.empty());
    const auto& v = r.spectrogram.values;
    return *std::max_element(v.begin(), v.end());
}

double reference() {
    static const double p = sb16_peak(json::object());
    return p;
}

double change(const json& overrides) {
    const double p = sb16_peak(overrides);
    const double d = std::abs(p / reference() - 1.0);
    std::printf("  %s: peak %.6e (reference %.6e), relative change %.3e\n", overrides.dump().c_str(), p, reference(), d);
    return d;
}

}  // namespace

TEST_CASE("sideband peak is converged in the time step") {
    CHECK(reference() > 0.0);
    CHECK(change({{"dt", 0.1}}) < 0.01);
}

TEST_CASE("sideband peak is converged in the partial waves") {
    CHECK(change({{"l_max", 4}}) < 0.02);
}

TEST_CASE("sideband peak is converged in the spectral cutoff") {
    CHECK(change({{"spectral_cutoff", 40.0}}) < 0.01);
}

TEST_CASE("sideband peak is converged in the radial grid") {
    CHECK(change({{"n_elements", 96}}) < 0.01);
}
