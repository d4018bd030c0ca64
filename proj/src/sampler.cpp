#include "fpt/sampler.hpp"

#include "fpt/errors.hpp"
#include "fpt/parallel.hpp"
#include "fpt/random.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace fpt {

namespace {

constexpr int kMaxRedraws = 1000;

void check_copula(const PortfolioModel& model, const CalibratedCopula& copula) {
    const auto n = static_cast<Eigen::Index>(model.size());
    if (copula.chol.rows() != n || copula.chol.cols() != n)
        throw ValidationError("copula dimension " + std::to_string(copula.chol.rows()) +
                              " does not match model dimension " + std::to_string(n));
}

// Correlated normal scores for one scenario.
void correlated_normals(const Eigen::MatrixXd& chol, Stream& stream, std::vector<double>& iid,
                        std::vector<double>& out) {
    boost::random::normal_distribution<double> normal;
    const std::size_t n = iid.size();
    for (auto& g : iid) g = normal(stream);
    for (std::size_t k = 0; k < n; ++k) {
        double z = 0.0;
        for (std::size_t j = 0; j <= k; ++j) z += chol(k, j) * iid[j];
        out[k] = z;
    }
}

}  // namespace

double chi_from_normal(double z) {
    // Phi^{-1}((Phi(z) + 1) / 2) = -Phi^{-1}(Phi(-z) / 2), which keeps the
    // upper tail accurate.
    const double q = std_normal_quantile(0.5 * std_normal_cdf(-z));
    return q * q;
}

std::size_t RootSelection::pick(double u) const {
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (probs[k] <= 0.0) continue;
        acc += probs[k];
        last = k;
        if (u < acc) return k;
    }
    return last;
}

RootSelection select_roots(std::span<const DimensionParams> dims, std::span<const RootPair> rps,
                           const LogDensity& log_density) {
    const std::size_t n = dims.size();
    if (rps.size() != n) throw ValidationError("one root pair per dimension is required");
    const std::size_t combos = std::size_t{1} << n;
    std::vector<double> logw(combos, -std::numeric_limits<double>::infinity());
    std::vector<double> point(n);
    for (std::size_t c = 0; c < combos; ++c) {
        bool valid = true;
        double log_jac = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const bool larger = (c >> (n - 1 - k)) & 1u;
            const bool single = rps[k].x1 == rps[k].x2;
            if (larger && single) {
                valid = false;
                break;
            }
            point[k] = larger ? rps[k].x2 : rps[k].x1;
            if (!single) log_jac += std::log(std::abs(chi_transform_derivative(dims[k], point[k])));
        }
        if (valid) logw[c] = log_density(point) - log_jac;
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    if (!std::isfinite(top)) {
        if (top > 0.0) throw DegenerateError("root selection weight is infinite");
        throw DegenerateError("joint density vanishes at every root combination");
    }
    RootSelection sel;
    sel.probs.resize(combos);
    double total = 0.0;
    for (std::size_t c = 0; c < combos; ++c) total += sel.probs[c] = std::exp(logw[c] - top);
    for (auto& p : sel.probs) p /= total;
    return sel;
}

RootSelection root_probs(const JointDensity& density, const RootPair& rp1, const RootPair& rp2) {
    const DimensionParams dims[2] = {density.model().first, density.model().second};
    const RootPair rps[2] = {rp1, rp2};
    return select_roots(dims, rps, [&](std::span<const double> x) {
        return density.log_value(x[0], x[1]);
    });
}

ExitTimeSamples sample_zero_drift(const PortfolioModel& model, const CalibratedCopula& copula,
                                  std::size_t n, std::uint64_t seed) {
    model.validate();
    if (!model.zero_drift()) throw ValidationError("sample_zero_drift needs every mu = 0");
    check_copula(model, copula);
    const std::size_t dims = model.size();
    std::vector<double> scale(dims);
    for (std::size_t k = 0; k < dims; ++k) {
        const auto& d = model.dims[k];
        scale[k] = d.gap() * d.gap() / (d.sigma * d.sigma);
    }
    ExitTimeSamples out(n, dims);
    parallel_for(n, [&](std::size_t i) {
        Stream normals(seed, i, Substream::normals);
        std::vector<double> iid(dims), z(dims);
        correlated_normals(copula.chol, normals, iid, z);
        for (std::size_t k = 0; k < dims; ++k) out(i, k) = scale[k] / chi_from_normal(z[k]);
    });
    return out;
}

ExitTimeSamples sample_drifted_2d(const PortfolioModel& model, const CalibratedCopula& copula,
                                  std::size_t n, std::uint64_t seed, SamplerStats* stats) {
    model.validate();
    if (model.size() != 2)
        throw ValidationError(
            "drifted sampling is limited to two dimensions: the joint exit density is unknown for N > 2");
    check_copula(model, copula);
    for (std::size_t k = 0; k < 2; ++k)
        if (model.dims[k].defective())
            throw ValidationError("dims[" + std::to_string(k) + "]: drift points away from the barrier");
    const JointDensity density(model.pair(0, 1));

    std::atomic<std::size_t> redraws{0};
    ExitTimeSamples out(n, 2);
    parallel_for(n, [&](std::size_t i) {
        Stream normals(seed, i, Substream::normals);
        Stream selector(seed, i, Substream::selector);
        std::vector<double> iid(2), z(2);
        for (int attempt = 0;; ++attempt) {
            correlated_normals(copula.chol, normals, iid, z);
            const RootPair rp1 = roots(model.dims[0], chi_from_normal(z[0]));
            const RootPair rp2 = roots(model.dims[1], chi_from_normal(z[1]));
            const double u = selector.uniform();
            try {
                const std::size_t c = root_probs(density, rp1, rp2).pick(u);
                out(i, 0) = (c & 2u) ? rp1.x2 : rp1.x1;
                out(i, 1) = (c & 1u) ? rp2.x2 : rp2.x1;
                return;
            } catch (const DegenerateError&) {
                if (attempt >= kMaxRedraws) throw;
                ++redraws;
            }
        }
    });
    if (stats) stats->redraws = redraws.load();
    return out;
}

ExitTimeSamples sample_copula(const PortfolioModel& model, const CalibratedCopula& copula,
                              std::size_t n, std::uint64_t seed, SamplerStats* stats) {
    if (model.zero_drift()) {
        if (stats) stats->redraws = 0;
        return sample_zero_drift(model, copula, n, seed);
    }
    return sample_drifted_2d(model, copula, n, seed, stats);
}

}  // namespace fpt
