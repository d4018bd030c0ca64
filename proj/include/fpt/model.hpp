#pragma once

#include "fpt/density2d.hpp"
#include "fpt/marginal.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace fpt {

// N coordinates with instantaneous correlation matrix corr.
struct PortfolioModel {
    std::vector<DimensionParams> dims;
    Eigen::MatrixXd corr;

    void validate() const;
    std::size_t size() const { return dims.size(); }
    bool zero_drift() const;
    PairModel pair(std::size_t i, std::size_t j) const;
};

// Equal-parameter model with a constant off-diagonal correlation.
PortfolioModel uniform_model(std::size_t n, const DimensionParams& d, double rho);

}  // namespace fpt
