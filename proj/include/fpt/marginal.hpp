#pragma once

#include "fpt/numerics.hpp"
#include "fpt/random.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace fpt {

// dX = mu dt + sigma dW started at x0, absorbed at barrier.
struct DimensionParams {
    double mu = 0.0;
    double sigma = 1.0;
    double x0 = 0.0;
    double barrier = 1.0;

    void validate() const;
    double gap() const { return barrier - x0; }
    // Drift points away from the barrier, so the barrier may never be hit.
    bool defective() const { return mu * gap() < 0.0; }

    bool operator==(const DimensionParams&) const = default;
};

// Row-major block of exit times, one row per scenario. +inf marks a
// coordinate that never crossed (or was censored).
class ExitTimeSamples {
public:
    ExitTimeSamples() = default;
    ExitTimeSamples(std::size_t scenarios, std::size_t dims)
        : dims_(dims), data_(scenarios * dims) {}

    std::size_t size() const { return dims_ == 0 ? 0 : data_.size() / dims_; }
    std::size_t dims() const { return dims_; }

    double& operator()(std::size_t row, std::size_t dim) { return data_[row * dims_ + dim]; }
    double operator()(std::size_t row, std::size_t dim) const { return data_[row * dims_ + dim]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * dims_, dims_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dims_, dims_}; }

    std::vector<double> column(std::size_t dim) const;
    const std::vector<double>& raw() const { return data_; }

private:
    std::size_t dims_ = 0;
    std::vector<double> data_;
};

double marginal_density(const DimensionParams& p, double t);
double log_marginal_density(const DimensionParams& p, double t);

// P(tau <= t) in closed form. At t = +inf this is the total hitting mass.
double marginal_cdf(const DimensionParams& p, double t);

// marginal_cdf at each point of an ascending sequence.
std::vector<double> marginal_cdf_sorted(const DimensionParams& p, std::span<const double> ts);

double defective_mass(const DimensionParams& p);

// H(t) = (mu t - gap)^2 / (sigma^2 t); chi-squared(1) when t is the exit time.
double chi_transform(const DimensionParams& p, double t);
double chi_transform_derivative(const DimensionParams& p, double t);

// U = F_chi2(H(t)) = 2 Phi(sqrt(H(t))) - 1, uniform on (0, 1).
double uniform_transform(const DimensionParams& p, double t);

// Both solutions of H(x) = chi2, smaller first. Equal when mu = 0.
struct RootPair {
    double x1 = 0.0;
    double x2 = 0.0;
};

RootPair roots(const DimensionParams& p, double chi2);

// Probability of taking the smaller root in the one-dimensional sampler.
double smaller_root_prob(const DimensionParams& p, const RootPair& rp);

// One exact draw of the exit time; +inf with the defective probability.
double sample_marginal(const DimensionParams& p, Stream& normals, Stream& selector);

}  // namespace fpt
