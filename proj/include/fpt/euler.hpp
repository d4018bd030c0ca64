#pragma once

#include "fpt/marginal.hpp"
#include "fpt/model.hpp"

#include <cstddef>
#include <cstdint>

namespace fpt {

struct EulerConfig {
    double step = 0.0015625;
    double horizon = 10.0;
    std::size_t scenarios = 100000;
    std::uint64_t seed = 1;

    void validate() const;
};

// Discretised paths with crossings checked at grid points only. Coordinates
// still alive at the horizon come back as +inf.
ExitTimeSamples euler_sample(const PortfolioModel& model, const EulerConfig& cfg);

// A factor L with L L^T = corr. Cholesky when it succeeds, otherwise the
// symmetric square root with negative eigenvalues dropped.
Eigen::MatrixXd correlation_factor(const Eigen::MatrixXd& corr);

}  // namespace fpt
