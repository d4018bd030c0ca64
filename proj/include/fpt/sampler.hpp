#pragma once

#include "fpt/calibration.hpp"
#include "fpt/density2d.hpp"
#include "fpt/marginal.hpp"
#include "fpt/model.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fpt {

// Squared |N(0,1)| quantile of the normal score z: chi-squared(1) when z is
// standard normal, and increasing in z.
double chi_from_normal(double z);

// Probabilities of the 2^N root combinations, indexed lexicographically with
// coordinate 0 most significant and bit value 0 for the smaller root.
struct RootSelection {
    std::vector<double> probs;

    // Combination whose interval [p_0 + ... + p_{k-1}, ... + p_k) holds u.
    std::size_t pick(double u) const;
};

// Log density over the exit-time vector, used to weigh root combinations.
using LogDensity = std::function<double(std::span<const double>)>;

// Weights f(roots) / prod |H_k'(root_k)| normalised to one. Coordinates with a
// single root take part with that root only. Throws DegenerateError when every
// combination has zero density.
RootSelection select_roots(std::span<const DimensionParams> dims, std::span<const RootPair> rps,
                           const LogDensity& log_density);

// The two-dimensional case, weighting with the joint exit density.
RootSelection root_probs(const JointDensity& density, const RootPair& rp1, const RootPair& rp2);

struct SamplerStats {
    std::size_t redraws = 0;  // scenarios redrawn after a degenerate root selection
};

// Zero-drift copula sampler: tau_k = gap_k^2 / (sigma_k^2 chi_k^2).
ExitTimeSamples sample_zero_drift(const PortfolioModel& model, const CalibratedCopula& copula,
                                  std::size_t n, std::uint64_t seed);

// Two drifted coordinates: copula chi-squared pair, both roots each, joint
// density root selection with an independent uniform.
ExitTimeSamples sample_drifted_2d(const PortfolioModel& model, const CalibratedCopula& copula,
                                  std::size_t n, std::uint64_t seed, SamplerStats* stats = nullptr);

// Dispatches on the drift configuration.
ExitTimeSamples sample_copula(const PortfolioModel& model, const CalibratedCopula& copula,
                              std::size_t n, std::uint64_t seed, SamplerStats* stats = nullptr);

}  // namespace fpt
