#include "fpt/euler.hpp"

#include "fpt/errors.hpp"
#include "fpt/parallel.hpp"
#include "fpt/random.hpp"

#include <boost/random/normal_distribution.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace fpt {

void EulerConfig::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("euler.step must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ValidationError("euler.horizon must be positive");
    if (!(step < horizon)) throw ValidationError("euler.step must be smaller than euler.horizon");
    if (scenarios < 1) throw ValidationError("euler.scenarios must be at least 1");
}

Eigen::MatrixXd correlation_factor(const Eigen::MatrixXd& corr) {
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

ExitTimeSamples euler_sample(const PortfolioModel& model, const EulerConfig& cfg) {
    model.validate();
    cfg.validate();
    const std::size_t n = model.size();
    const Eigen::MatrixXd factor = correlation_factor(model.corr);
    const auto steps = static_cast<std::size_t>(std::floor(cfg.horizon / cfg.step * (1.0 + 1e-12)));
    const double root_h = std::sqrt(cfg.step);

    std::vector<double> drift_step(n), vol_step(n), side(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& d = model.dims[k];
        drift_step[k] = d.mu * cfg.step;
        vol_step[k] = d.sigma * root_h;
        side[k] = d.x0 > d.barrier ? 1.0 : -1.0;
    }

    ExitTimeSamples out(cfg.scenarios, n);
    parallel_for(cfg.scenarios, [&](std::size_t i) {
        Stream normals(cfg.seed, i, Substream::normals);
        boost::random::normal_distribution<double> normal;
        std::vector<double> x(n), z(n);
        std::vector<bool> alive(n, true);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = model.dims[k].x0;
            out(i, k) = std::numeric_limits<double>::infinity();
        }
        std::size_t remaining = n;
        for (std::size_t step = 1; step <= steps && remaining > 0; ++step) {
            for (std::size_t k = 0; k < n; ++k) z[k] = normal(normals);
            for (std::size_t k = 0; k < n; ++k) {
                double eps = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    eps += factor(k, j) * z[j];
                x[k] += drift_step[k] + vol_step[k] * eps;
                if (alive[k] && side[k] * (x[k] - model.dims[k].barrier) <= 0.0) {
                    alive[k] = false;
                    out(i, k) = static_cast<double>(step) * cfg.step;
                    --remaining;
                }
            }
        }
    });
    return out;
}

}  // namespace fpt
