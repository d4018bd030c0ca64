#pragma once

#include "fpt/marginal.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fpt {

// probs[i] is the fraction of scenarios with exactly i coordinates exited by
// the horizon.
struct DefaultDistribution {
    std::vector<double> probs;
    std::vector<double> std_errors;
    std::size_t scenarios = 0;
    double horizon = 0.0;
};

DefaultDistribution default_probs(const ExitTimeSamples& samples, double horizon);

struct KsReport {
    double statistic = 0.0;
    double alpha = 0.01;
    bool reject = false;
    double p_value = 1.0;
    double critical = 0.0;  // one-sample only: asymptotic critical value
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    std::size_t excluded_a = 0;  // rows dropped for +inf entries
    std::size_t excluded_b = 0;
};

// Kolmogorov limiting survival function P(sqrt(n) D > lambda).
double kolmogorov_sf(double lambda);

KsReport ks_1sample(std::span<const double> samples, const std::function<double(double)>& cdf,
                    double alpha = 0.01);

struct KsOptions {
    double alpha = 0.01;
    int permutations = 199;
    std::uint64_t seed = 7;
};

// Largest difference of empirical quadrant measures over all 2^d orientations,
// with corners at the pooled data points. Rows holding +inf are dropped. The
// decision comes from a label-permutation distribution.
KsReport ks_2sample_md(const ExitTimeSamples& a, const ExitTimeSamples& b, const KsOptions& opts = {});

// The statistic alone on finite rows.
double peacock_statistic(const ExitTimeSamples& a, const ExitTimeSamples& b);

}  // namespace fpt
