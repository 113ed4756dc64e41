#include "doctest.h"

#include "pat/errors.hpp"
#include "pat/sensor.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

using namespace pat;
using namespace pat::sensor;

namespace {

constexpr double kPi = std::numbers::pi;

// Impedance translation through a lossless layer, exp(-i omega t) convention.
std::complex<double> tan_formula_reflection(double k_eps, double z, double z_p, double z_b) {
    using namespace std::complex_literals;
    const double t = std::tan(k_eps);
    const std::complex<double> z_in = z_p * (z_b - 1i * z_p * t) / (z_p - 1i * z_b * t);
    return (z_in - z) / (z_in + z);
}

}  // namespace

TEST_SUITE("sensor") {

TEST_CASE("film coefficient") {
    for (double r : {-0.4, -0.2, 0.0, 0.3}) CHECK(kappa(0.5, r) == 0.0);
    // nu = 1/2 with r = -1/2 is 0/0.
    CHECK_THROWS_AS(kappa(0.5, -0.5), InputError);
    CHECK(kappa(0.0, 0.0) == 1.0);
    CHECK(std::abs(kappa(0.4, -0.5) - 1.5) <= 1e-12);
    CHECK_THROWS_AS(kappa(1.0, 0.0), InputError);
}

TEST_CASE("film coefficient over the PVDF parameter box") {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    double r_hi = 0.0;
    for (int i = 0; i <= 20; ++i) {
        const double nu = 0.2 + 0.01 * i;
        for (int j = 0; j <= 50; ++j) {
            const double d = -35.0 + 0.1 * j;
            for (int k = 0; k <= 120; ++k) {
                const double r = (3.0 + 0.1 * k) / d;
                const double v = kappa(nu, r);
                lo = std::min(lo, v);
                if (v > hi) {
                    hi = v;
                    r_hi = r;
                }
            }
        }
    }
    CHECK(hi == doctest::Approx(1.5).epsilon(1e-12));
    // At r = -1/2 the coefficient is 3/2 for every nu, so only r is pinned.
    CHECK(r_hi == doctest::Approx(-0.5));
    CHECK(kappa(0.4, -0.5) == doctest::Approx(hi));
    // The tabulated lower end is 0.3; the formula only gets down to about 0.41.
    CHECK(lo == doctest::Approx(0.2 * (1.0 + 3.0 / 35.0) / (1.0 - 0.4 * (1.0 + 6.0 / 35.0))).epsilon(1e-12));
    CHECK(lo >= 0.3);
}

TEST_CASE("plane-wave reflection") {
    CHECK(reflection_coefficient(0.0, 1.0) == 0.0);
    CHECK(std::abs(reflection_coefficient(0.0, 0.75) - 1.0 / 7.0) <= 1e-12);
    CHECK(reflection_coefficient(kPi / 2, 0.3) == doctest::Approx(-1.0));
    for (int i = 0; i <= 90; ++i) {
        for (double a : {0.1, 0.75, 3.0}) CHECK(std::abs(reflection_coefficient(i * kPi / 180.0, a)) <= 1.0);
    }
}

TEST_CASE("directivity") {
    const double c = 1500.0, cp = 2000.0, alpha = 0.75;
    CHECK(directivity(0.0, c, cp, 0.9, alpha) == doctest::Approx(8.0 / 7.0).epsilon(1e-12));
    const double theta_cr = std::asin(0.75 / std::sqrt(0.9));
    CHECK(std::abs(directivity(theta_cr, c, cp, 0.9, alpha)) <= 1e-10);
    for (double th : {0.0, 0.5, 1.0, 1.5}) CHECK(directivity(th, c, cp, 0.0, 1e-12) == doctest::Approx(2.0).epsilon(1e-9));

    const auto sweep = directivity_sweep(c, cp, 0.9, alpha, 181);
    REQUIRE(sweep.size() == 181);
    CHECK(sweep[1].theta_deg == doctest::Approx(0.5));
    CHECK(sweep.back().theta_deg == doctest::Approx(90.0));
    CHECK(sweep.front().decibels == doctest::Approx(20.0 * std::log10(8.0 / 7.0)));
}

TEST_CASE("critical angle") {
    CHECK_FALSE(critical_angle(1500.0, 2000.0, 0.5).has_value());
    CHECK_FALSE(critical_angle(1500.0, 2000.0, 0.0).has_value());
    REQUIRE(critical_angle(1500.0, 2000.0, 1.0).has_value());
    CHECK(*critical_angle(1500.0, 2000.0, 1.0) * 180.0 / kPi == doctest::Approx(48.59).epsilon(1e-4));
    CHECK(*critical_angle(1.0, 1.0, 1.0) == doctest::Approx(kPi / 2));
    // The zero crossing of the sweep sits where the formula says.
    for (double k : {0.6, 0.9}) {
        const auto sweep = directivity_sweep(1500.0, 2000.0, k, 0.75, 1801);
        bool crossed = false;
        for (std::size_t i = 1; i < sweep.size() && !crossed; ++i) {
            if (sweep[i - 1].linear > 0.0 && sweep[i].linear <= 0.0) {
                crossed = true;
                CHECK(std::abs(sweep[i].theta_deg - *critical_angle(1500.0, 2000.0, k) * 180.0 / kPi) <= 0.05);
            }
        }
        CHECK(crossed);
    }
}

TEST_CASE("decibels") {
    CHECK(to_decibels(1.0) == 0.0);
    CHECK(to_decibels(-10.0) == doctest::Approx(20.0));
    CHECK(to_decibels(0.0) == -60.0);
    CHECK(to_decibels(1e-5) == -60.0);
}

TEST_CASE("layered reflection") {
    const double z = 1.5e6, zp = 3.9e6, zb = 2.0e6, cp = 2200.0;
    SUBCASE("homogeneous medium does not reflect") {
        CHECK(std::abs(layered_reflection_exact(1e6, 1e-5, z, z, z, cp)) <= 1e-14);
    }
    SUBCASE("zero thickness gives the two-media coefficient") {
        CHECK(std::abs(layered_reflection_exact(1e6, 0.0, z, zp, zb, cp) - (zb - z) / (zb + z)) <= 1e-14);
    }
    SUBCASE("agrees with the tangent impedance formula") {
        for (double eps : {1e-6, 3e-5, 2e-4}) {
            const double omega = 2.0 * kPi * 5e6;
            const auto exact = layered_reflection_exact(omega, eps, z, zp, zb, cp);
            CHECK(std::abs(exact - tan_formula_reflection(omega * eps / cp, z, zp, zb)) <= 1e-12);
            CHECK(std::norm(exact) <= 1.0 + 1e-14);
        }
    }
    SUBCASE("first-order approach to the effective boundary condition") {
        const double omega = 1e6;
        const double r_eff = (zb - z) / (zb + z);
        double eps = 1e-1 * cp / omega;
        double prev = std::abs(layered_reflection_exact(omega, eps, z, zp, zb, cp) - r_eff);
        while (omega * eps / cp > 2e-3) {
            eps /= 2.0;
            const double err = std::abs(layered_reflection_exact(omega, eps, z, zp, zb, cp) - r_eff);
            CHECK(std::log2(prev / err) == doctest::Approx(1.0).epsilon(0.15));
            prev = err;
        }
    }
}

}  // TEST_SUITE
