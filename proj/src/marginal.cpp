#include "fpt/marginal.hpp"

#include "fpt/errors.hpp"

#include <boost/random/normal_distribution.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace fpt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DimensionParams reflected(const DimensionParams& p) {
    DimensionParams q = p;
    q.mu = -p.mu;
    return q;
}

// log(1 - Phi(x)), switching to the asymptotic series once the tail underflows.
double log_normal_ccdf(double x) {
    if (x < 30.0) return std::log(std_normal_ccdf(x));
    const double inv2 = 1.0 / (x * x);
    return -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) +
           std::log1p(-inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2)));
}

}  // namespace

void DimensionParams::validate() const {
    if (!std::isfinite(mu) || !std::isfinite(x0) || !std::isfinite(barrier))
        throw ValidationError("dimension parameters must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw ValidationError("sigma must be positive and finite");
    if (x0 == barrier) throw ValidationError("start value must differ from the barrier");
}

std::vector<double> ExitTimeSamples::column(std::size_t dim) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(i, dim);
    return out;
}

double log_marginal_density(const DimensionParams& p, double t) {
    if (!(t > 0.0)) return -kInf;
    const double d = p.gap();
    const double dev = p.mu * t - d;
    return std::log(std::abs(d) / p.sigma) - 0.5 * std::log(2.0 * std::numbers::pi * t * t * t) -
           dev * dev / (2.0 * p.sigma * p.sigma * t);
}

double marginal_density(const DimensionParams& p, double t) {
    if (std::isinf(t)) return 0.0;
    return std::exp(log_marginal_density(p, t));
}

double marginal_cdf(const DimensionParams& p, double t) {
    if (!(t > 0.0)) return 0.0;
    const double a = std::abs(p.gap());
    if (p.mu == 0.0) return 2.0 * std_normal_ccdf(a / (p.sigma * std::sqrt(t)));
    // Drift component towards the barrier; negative means defective.
    const double nu = p.gap() > 0.0 ? p.mu : -p.mu;
    const double s2 = p.sigma * p.sigma;
    if (std::isinf(t)) return nu > 0.0 ? 1.0 : std::exp(2.0 * nu * a / s2);
    const double root_t = p.sigma * std::sqrt(t);
    const double direct = std_normal_ccdf((a - nu * t) / root_t);
    const double mirror = std::exp(2.0 * nu * a / s2 + log_normal_ccdf((a + nu * t) / root_t));
    return std::min(1.0, direct + mirror);
}

std::vector<double> marginal_cdf_sorted(const DimensionParams& p, std::span<const double> ts) {
    std::vector<double> out(ts.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] < prev) throw DomainError("marginal_cdf_sorted needs ascending times");
        prev = ts[i];
        out[i] = marginal_cdf(p, ts[i]);
    }
    return out;
}

double defective_mass(const DimensionParams& p) {
    if (!p.defective()) return 0.0;
    return -std::expm1(-2.0 * std::abs(p.mu * p.gap()) / (p.sigma * p.sigma));
}

double chi_transform(const DimensionParams& p, double t) {
    const double dev = p.mu * t - p.gap();
    return dev * dev / (p.sigma * p.sigma * t);
}

double chi_transform_derivative(const DimensionParams& p, double t) {
    const double d = p.gap();
    const double mt = p.mu * t;
    return (mt * mt - d * d) / (p.sigma * p.sigma * t * t);
}

double uniform_transform(const DimensionParams& p, double t) {
    if (std::isinf(t)) return p.mu == 0.0 ? 0.0 : 1.0;
    const double dev = std::abs(p.mu * t - p.gap()) / (p.sigma * std::sqrt(t));
    // 2 Phi(x) - 1 without cancellation for small x.
    return std::erf(dev / std::numbers::sqrt2);
}

RootPair roots(const DimensionParams& p, double chi2) {
    if (!(chi2 >= 0.0)) throw DomainError("roots needs chi2 >= 0");
    const double d = p.gap();
    const double s2 = p.sigma * p.sigma;
    if (p.mu == 0.0) {
        const double x = d * d / (s2 * chi2);
        return {x, x};
    }
    if (p.defective()) throw DomainError("roots needs a non-defective dimension");
    const double mean = d / p.mu;
    const double mu2 = p.mu * p.mu;
    const double spread = std::sqrt(s2 * chi2) * std::sqrt(4.0 * p.mu * d + s2 * chi2);
    const double larger = mean + (s2 * chi2 + spread) / (2.0 * mu2);
    // Vieta: x1 x2 = mean^2, avoids cancellation in the smaller root.
    return {mean * mean / larger, larger};
}

double smaller_root_prob(const DimensionParams& p, const RootPair& rp) {
    if (rp.x1 == rp.x2) return 1.0;
    auto log_weight = [&](double x) {
        return log_marginal_density(p, x) - std::log(std::abs(chi_transform_derivative(p, x)));
    };
    const double diff = log_weight(rp.x2) - log_weight(rp.x1);
    return 1.0 / (1.0 + std::exp(diff));
}

double sample_marginal(const DimensionParams& p, Stream& normals, Stream& selector) {
    if (p.defective()) {
        if (selector.uniform() < defective_mass(p)) return kInf;
        // Given a finite exit, the path law is that of the reflected drift.
        return sample_marginal(reflected(p), normals, selector);
    }
    boost::random::normal_distribution<double> normal;
    const double z = normal(normals);
    const RootPair rp = roots(p, z * z);
    if (rp.x1 == rp.x2) return rp.x1;
    return selector.uniform() < smaller_root_prob(p, rp) ? rp.x1 : rp.x2;
}

}  // namespace fpt
