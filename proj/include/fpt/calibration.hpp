#pragma once

#include "fpt/density2d.hpp"
#include "fpt/model.hpp"
#include "fpt/numerics.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace fpt {

enum class CalibrationMethod { quadrature, euler_mc };

CalibrationMethod parse_method(const std::string& name);
std::string to_string(CalibrationMethod m);

struct RepairReport {
    double max_eigen_clip = 0.0;   // largest amount an eigenvalue was raised by
    double frobenius_shift = 0.0;  // ||repaired - raw||_F
};

struct CalibratedCopula {
    Eigen::MatrixXd sigma;
    Eigen::MatrixXd chol;  // lower triangular, chol * chol^T = sigma
    RepairReport repair;
};

struct RankCorrelation {
    double value = 0.0;
    double std_error = 0.0;  // quadrature error bound, or Monte Carlo standard error
};

struct EulerMcOptions {
    std::size_t paths = 20000;
    double step = 0.01;
    double horizon = 1000.0;
    std::uint64_t seed = 20240501;
};

struct CalibrationOptions {
    CalibrationMethod method = CalibrationMethod::quadrature;
    QuadratureSpec quadrature{1e-10, 1e-7, 4000};
    EulerMcOptions euler;
};

// Correlation of U_i = 2 Phi(|mu_i t - gap_i| / (sigma_i sqrt t)) - 1 over the
// joint law of the two exit times.
RankCorrelation pair_rank_corr(const PairModel& m, const CalibrationOptions& opts = {});

// Gaussian correlation whose normal-scores rank correlation is rho_u.
double spearman_to_pearson(double rho_u);

// Pairwise calibration, assembled and repaired to a valid correlation matrix.
CalibratedCopula calibrate(const PortfolioModel& model, const CalibrationOptions& opts = {});

// Symmetrises, clips eigenvalues at 1e-10 when the Cholesky factorisation
// fails, restores the unit diagonal and factorises.
CalibratedCopula assemble_copula(const Eigen::MatrixXd& raw);

// Stable 64-bit key of the model and method, used by the cache.
std::uint64_t model_hash(const PortfolioModel& model, const CalibrationOptions& opts);

// JSON file mapping hex model hashes to sigma entries.
std::optional<CalibratedCopula> load_cached(const std::string& path, std::uint64_t key);
void store_cached(const std::string& path, std::uint64_t key, const CalibratedCopula& c);

// calibrate() through the cache; an empty path disables caching.
CalibratedCopula calibrate_cached(const PortfolioModel& model, const CalibrationOptions& opts,
                                  const std::string& cache_path);

}  // namespace fpt
