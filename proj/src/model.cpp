#include "fpt/model.hpp"

#include "fpt/errors.hpp"

#include <cmath>
#include <string>

namespace fpt {

void PortfolioModel::validate() const {
    const auto n = static_cast<Eigen::Index>(dims.size());
    if (n < 1) throw ValidationError("model needs at least one dimension");
    for (std::size_t i = 0; i < dims.size(); ++i) {
        try {
            dims[i].validate();
        } catch (const ValidationError& e) {
            throw ValidationError("dims[" + std::to_string(i) + "]: " + e.what());
        }
    }
    if (corr.rows() != n || corr.cols() != n)
        throw ValidationError("corr must be " + std::to_string(n) + "x" + std::to_string(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (corr(i, i) != 1.0) throw ValidationError("corr diagonal must be 1");
        for (Eigen::Index j = 0; j < i; ++j) {
            if (!std::isfinite(corr(i, j)) || corr(i, j) != corr(j, i))
                throw ValidationError("corr must be symmetric and finite");
            if (!(std::abs(corr(i, j)) < 1.0))
                throw ValidationError("corr off-diagonals must lie in (-1, 1)");
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12)
        throw ValidationError("corr must be positive semidefinite");
}

bool PortfolioModel::zero_drift() const {
    for (const auto& d : dims)
        if (d.mu != 0.0) return false;
    return true;
}

PairModel PortfolioModel::pair(std::size_t i, std::size_t j) const {
    return {dims[i], dims[j], corr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))};
}

PortfolioModel uniform_model(std::size_t n, const DimensionParams& d, double rho) {
    PortfolioModel m;
    m.dims.assign(n, d);
    const auto k = static_cast<Eigen::Index>(n);
    m.corr = Eigen::MatrixXd::Constant(k, k, rho);
    m.corr.diagonal().setOnes();
    return m;
}

}  // namespace fpt
