#include "fpt/errors.hpp"
#include "fpt/numerics.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace fpt;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("normal cdf values and symmetry") {
    CHECK(std_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-16));
    CHECK(std::abs(std_normal_cdf(1.0) - 0.84134474606854294859) < 1e-15);
    CHECK(std::abs(2.0 * std_normal_ccdf(1.0) - 0.31731050786291410283) < 1e-15);
    CHECK(std::abs(std_normal_pdf(1.0) - 0.24197072451914334980) < 1e-16);
    for (double z = -8.0; z <= 8.0; z += 0.25) {
        CHECK(std::abs(std_normal_cdf(z) + std_normal_cdf(-z) - 1.0) < 1e-14);
        CHECK(std_normal_cdf(z + 0.25) >= std_normal_cdf(z));
    }
}

TEST_CASE("normal quantile") {
    CHECK(std_normal_quantile(0.5) == 0.0);
    CHECK(std::abs(std_normal_quantile(0.75) - 0.67448975019608174320) < 1e-15);
    CHECK(std::abs(std_normal_quantile(std_normal_cdf(2.3)) - 2.3) < 1e-9);
    for (double lp = -12.0; lp < 0.0; lp += 0.37) {
        const double p = std::pow(10.0, lp);
        CHECK(rel(std_normal_cdf(std_normal_quantile(p)), p) < 1e-9);
        const double q = 1.0 - p;
        CHECK(std::abs(std_normal_cdf(std_normal_quantile(q)) - q) < 1e-9 * (1.0 - q) + 1e-16);
    }
    CHECK_THROWS_AS(std_normal_quantile(0.0), DomainError);
    CHECK_THROWS_AS(std_normal_quantile(1.0), DomainError);
    CHECK_THROWS_AS(std_normal_quantile(-0.1), DomainError);
}

TEST_CASE("bessel I at the origin and a known value") {
    CHECK(bessel_i(0.0, 0.0) == 1.0);
    CHECK(bessel_i(2.5, 0.0) == 0.0);
    CHECK(log_bessel_i(2.5, 0.0) == -kInf);
    CHECK(std::abs(bessel_i(1.0, 1.0) - 0.56515910399248502721) < 1e-15);
}

TEST_CASE("log bessel I against 20-digit references") {
    struct Case { double nu, z, log_value; };
    const Case cases[] = {
        {0.5, 0.1, -1.37541778767816978592},  {2.3, 17.0, 14.511836784330610650},
        {15.0, 31.0, 24.751221299302213412},  {40.5, 700.0, 694.63358259538953458},
        {3.7, 45.0, 42.026787746801945128},   {100.25, 150.0, 114.09035587200026459},
        {0.0, 700.0, 695.80569999844344908},  {7.1, 0.001, -62.693795695316624239},
    };
    for (const auto& c : cases) {
        CAPTURE(c.nu);
        CAPTURE(c.z);
        CHECK(std::abs(log_bessel_i(c.nu, c.z) - c.log_value) < 1e-13 * std::max(1.0, std::abs(c.log_value)));
    }
}

TEST_CASE("bessel I against Boost over a grid") {
    for (double nu : {0.0, 0.5, 1.0, 2.7, 6.0, 12.5, 30.0, 75.0})
        for (double z : {0.01, 0.3, 1.0, 4.0, 11.0, 29.0, 31.0, 60.0, 150.0, 400.0}) {
            CAPTURE(nu);
            CAPTURE(z);
            const double ref = boost::math::cyl_bessel_i(nu, z);
            if (ref == 0.0 || !std::isfinite(ref)) continue;
            CHECK(rel(bessel_i(nu, z), ref) < 1e-12);
        }
}

TEST_CASE("bessel recurrence") {
    for (double nu = 1.1; nu <= 20.0; nu += 1.3)
        for (double z = 0.1; z <= 50.0; z *= 1.7) {
            const double lhs = bessel_i(nu - 1.0, z) - bessel_i(nu + 1.0, z);
            const double rhs = 2.0 * nu / z * bessel_i(nu, z);
            CHECK(rel(lhs, rhs) < 1e-8);
        }
}

TEST_CASE("bessel I overflow") {
    CHECK_THROWS_AS(bessel_i(0.0, 800.0), OverflowError);
    CHECK(std::isfinite(log_bessel_i(0.0, 800.0)));
}

TEST_CASE("integrate_1d") {
    CHECK(std::abs(integrate_1d([](double r) { return std::exp(-r); }, 0.0, kInf).value - 1.0) < 1e-8);
    CHECK(std::abs(integrate_1d([](double x) { return 4.0 / (1.0 + x * x); }, 0.0, 1.0).value -
                   std::numbers::pi) < 1e-8);
    CHECK(std::abs(integrate_1d([](double r) { return std::exp(-0.5 * r * r); }, 0.0, kInf).value -
                   1.2533141373155002512) < 1e-8);

    SUBCASE("polynomials are exact") {
        auto poly = [](double x) { return 3.0 - 2.0 * x + x * x * x - 0.5 * std::pow(x, 5); };
        auto anti = [](double x) { return 3.0 * x - x * x + 0.25 * std::pow(x, 4) - std::pow(x, 6) / 12.0; };
        CHECK(std::abs(integrate_1d(poly, -1.5, 2.0).value - (anti(2.0) - anti(-1.5))) < 1e-12);
    }
    SUBCASE("reversed limits flip the sign") {
        auto f = [](double x) { return x * x; };
        CHECK(std::abs(integrate_1d(f, 1.0, 0.0).value + 1.0 / 3.0) < 1e-14);
    }
    SUBCASE("slow algebraic tail") {
        auto f = [](double t) { return std::pow(1.0 + t, -1.5); };
        QuadratureSpec spec{1e-12, 1e-11, 2000};
        CHECK(std::abs(integrate_1d(f, 0.0, kInf, spec).value - 2.0) < 1e-10);
    }
    SUBCASE("endpoint singularity") {
        CHECK(std::abs(integrate_1d([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0).value - 2.0) < 1e-8);
    }
    SUBCASE("errors") {
        auto f = [](double x) { return std::sin(1.0 / x); };
        QuadratureSpec tight{1e-15, 1e-15, 3};
        CHECK_THROWS_AS(integrate_1d(f, 1e-3, 1.0, tight), ConvergenceError);
        try {
            integrate_1d(f, 1e-3, 1.0, tight);
        } catch (const ConvergenceError& e) {
            CHECK(std::isfinite(e.estimate()));
            CHECK(e.error() > 0.0);
        }
        CHECK_THROWS_AS(integrate_1d(f, -kInf, 0.0), DomainError);
        CHECK_THROWS_AS(integrate_1d(f, 0.0, 1.0, QuadratureSpec{-1.0, 1e-8, 10}), ValidationError);
    }
}

TEST_CASE("integrate_2d") {
    CHECK(integrate_2d([](double, double) { return 0.0; }).value == 0.0);
    auto expo = [](double s, double t) { return std::exp(-s - t); };
    CHECK(std::abs(integrate_2d(expo).value - 1.0) < 1e-3);
    // Heavy tails on both axes: the product of two t^{-3/2}-tailed densities.
    auto heavy = [](double s, double t) { return 0.25 * std::pow((1.0 + s) * (1.0 + t), -1.5); };
    CHECK(std::abs(integrate_2d(heavy, QuadratureSpec{1e-10, 1e-8, 4000}).value - 1.0) < 1e-7);
}

TEST_CASE("gauss-legendre rule") {
    const GaussRule g = gauss_legendre(16);
    double wsum = 0.0, moment = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        wsum += g.weights[i];
        moment += g.weights[i] * std::pow(g.nodes[i], 30);
    }
    CHECK(std::abs(wsum - 2.0) < 1e-14);
    CHECK(std::abs(moment - 2.0 / 31.0) < 1e-14);
}
