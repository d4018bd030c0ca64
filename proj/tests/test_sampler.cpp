#include "fpt/analysis.hpp"
#include "fpt/calibration.hpp"
#include "fpt/errors.hpp"
#include "fpt/experiments.hpp"
#include "fpt/parallel.hpp"
#include "fpt/sampler.hpp"

#include <boost/random/normal_distribution.hpp>
#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace fpt;

namespace {
double chi2_cdf(double x) { return std::erf(std::sqrt(0.5 * x)); }

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double c = 0, vx = 0, vy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        c += (x[i] - mx) * (y[i] - my);
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
    }
    return c / std::sqrt(vx * vy);
}

std::vector<double> uniforms(const ExitTimeSamples& s, const DimensionParams& p, std::size_t k) {
    std::vector<double> u(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) u[i] = uniform_transform(p, s(i, k));
    return u;
}
}  // namespace

TEST_CASE("chi_from_normal") {
    CHECK(std::abs(chi_from_normal(0.0) - 0.45493642311957275194) < 1e-15);
    // Not even: the map is increasing, and chi(z), chi(-z) are complementary
    // quantiles of chi-squared(1).
    for (double z : {0.1, 0.7, 1.5, 3.0, 6.0}) {
        CHECK(chi_from_normal(z) > chi_from_normal(z - 0.05));
        CHECK(std::abs(chi2_cdf(chi_from_normal(z)) + chi2_cdf(chi_from_normal(-z)) - 1.0) < 1e-12);
    }
    Stream s(17, 0, Substream::normals);
    boost::random::normal_distribution<double> normal;
    std::vector<double> x(100000);
    for (auto& v : x) v = chi_from_normal(normal(s));
    CHECK_FALSE(ks_1sample(x, chi2_cdf).reject);
}

TEST_CASE("root selection") {
    const PairModel m = credit_model(2, -0.05, 0.3).pair(0, 1);
    const JointDensity f(m);
    const RootPair a = roots(m.first, 0.8), b = roots(m.second, 2.1);
    const RootSelection sel = root_probs(f, a, b);
    REQUIRE(sel.probs.size() == 4);
    double total = 0.0;
    for (double p : sel.probs) {
        CHECK(p >= 0.0);
        total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(sel.pick(0.0) == 0);
    CHECK(sel.pick(std::nextafter(1.0, 0.0)) == 3);

    SUBCASE("independent pair factorises into one-dimensional rules") {
        const PairModel ind = credit_model(2, -0.05, 0.0).pair(0, 1);
        const JointDensity g(ind);
        const RootSelection s = root_probs(g, a, b);
        const double p1 = smaller_root_prob(ind.first, a), p2 = smaller_root_prob(ind.second, b);
        CHECK(std::abs(s.probs[0] - p1 * p2) < 1e-8);
        CHECK(std::abs(s.probs[1] - p1 * (1 - p2)) < 1e-8);
        CHECK(std::abs(s.probs[2] - (1 - p1) * p2) < 1e-8);
        const double mm = ind.first.gap() / ind.first.mu;
        CHECK(std::abs(p1 - mm / (mm + a.x1)) < 1e-8);
    }
    SUBCASE("zero drift has a single combination") {
        const PairModel z = credit_model(2, 0.0, 0.3).pair(0, 1);
        const RootSelection s = root_probs(JointDensity(z), roots(z.first, 0.8), roots(z.second, 2.1));
        CHECK(s.probs[0] == 1.0);
        CHECK(s.probs[1] == 0.0);
        CHECK(s.probs[2] == 0.0);
        CHECK(s.probs[3] == 0.0);
    }
    SUBCASE("degenerate weights") {
        const DimensionParams dims[1] = {m.first};
        const RootPair rps[1] = {a};
        CHECK_THROWS_AS(select_roots(dims, rps, [](std::span<const double>) { return -INFINITY; }),
                        DegenerateError);
    }
}

TEST_CASE("zero-drift sampler") {
    const PortfolioModel m = credit_model(2, 0.0, 0.0);
    const CalibratedCopula c = calibrate(m);
    const ExitTimeSamples s = sample_zero_drift(m, c, 100000, 3);
    for (std::size_t k = 0; k < 2; ++k) {
        const auto col = s.column(k);
        for (double t : col) REQUIRE((t > 0.0 && std::isfinite(t)));
        CHECK_FALSE(ks_1sample(col, [&](double t) { return marginal_cdf(m.dims[k], t); }).reject);
    }
    const double r = pearson(uniforms(s, m.dims[0], 0), uniforms(s, m.dims[1], 1));
    CHECK(std::abs(r) < 3.0 / std::sqrt(100000.0));
    CHECK_THROWS_AS(sample_zero_drift(credit_model(3, 0.0, 0.1), c, 10, 1), ValidationError);
    CHECK_THROWS_AS(sample_zero_drift(credit_model(2, -0.05, 0.1), c, 10, 1), ValidationError);
}

TEST_CASE("zero-drift sampler at rho = 0 matches independent exact draws") {
    const PortfolioModel m = credit_model(2, 0.0, 0.0);
    const ExitTimeSamples a = sample_zero_drift(m, calibrate(m), 20000, 5);
    ExitTimeSamples b(20000, 2);
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t k = 0; k < 2; ++k) {
            Stream normals(6, 2 * i + k, Substream::normals), selector(6, 2 * i + k, Substream::selector);
            b(i, k) = sample_marginal(m.dims[k], normals, selector);
        }
    CHECK_FALSE(ks_2sample_md(a, b).reject);
}

TEST_CASE("drifted sampler") {
    const PortfolioModel m = credit_model(2, -0.05, 0.5);
    const CalibratedCopula c = calibrate(m);
    const std::size_t n = 20000;
    SamplerStats stats;
    const ExitTimeSamples s = sample_drifted_2d(m, c, n, 9, &stats);
    CHECK(stats.redraws == 0);
    // Joint root selection shifts each marginal cdf by about 3e-3, below the
    // resolution of this sample size.
    for (std::size_t k = 0; k < 2; ++k)
        CHECK_FALSE(ks_1sample(s.column(k), [&](double t) { return marginal_cdf(m.dims[k], t); }).reject);

    // Transformed uniforms carry the calibrated rank correlation.
    const double target = pair_rank_corr(m.pair(0, 1)).value;
    const double r = pearson(uniforms(s, m.dims[0], 0), uniforms(s, m.dims[1], 1));
    CHECK(std::abs(r - target) < 3.0 * (1 - target * target) / std::sqrt(static_cast<double>(n)));

    SUBCASE("mixed drifts") {
        PortfolioModel mixed = m;
        mixed.dims[1].mu = 0.0;
        const ExitTimeSamples t = sample_drifted_2d(mixed, calibrate(mixed), 5000, 2);
        for (std::size_t k = 0; k < 2; ++k)
            CHECK_FALSE(ks_1sample(t.column(k), [&](double x) { return marginal_cdf(mixed.dims[k], x); }).reject);
    }
    CHECK_THROWS_AS(sample_drifted_2d(credit_model(3, -0.05, 0.1), c, 10, 1), ValidationError);
}

TEST_CASE("selector uniforms are independent of the normals") {
    const std::size_t n = 100000;
    std::vector<double> u(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        Stream normals(4, i, Substream::normals), selector(4, i, Substream::selector);
        boost::random::normal_distribution<double> normal;
        z[i] = normal(normals);
        u[i] = selector.uniform();
    }
    CHECK(std::abs(pearson(u, z)) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("samples do not depend on the thread count") {
    const PortfolioModel m = credit_model(2, -0.05, 0.1);
    const CalibratedCopula c = calibrate(m);
    set_thread_count(1);
    const ExitTimeSamples one = sample_copula(m, c, 3000, 21);
    set_thread_count(4);
    const ExitTimeSamples four = sample_copula(m, c, 3000, 21);
    set_thread_count(0);
    CHECK(one.raw() == four.raw());
}
