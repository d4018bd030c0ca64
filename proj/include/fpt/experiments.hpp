#pragma once

#include "fpt/analysis.hpp"
#include "fpt/calibration.hpp"
#include "fpt/config.hpp"
#include "fpt/sampler.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fpt {

struct RunReport {
    ExitTimeSamples samples;
    DefaultDistribution probs;
    std::optional<CalibratedCopula> copula;
    SamplerStats stats;
};

// calibrate -> sample (or Euler) -> default probabilities, writing samples
// when the config names an output path.
RunReport run(const RunConfig& cfg);

// The credit example used throughout the reference tables: x0 = log 5,
// barrier 0, sigma 1, equal drifts and equal correlations.
PortfolioModel credit_model(std::size_t n, double mu, double rho);

struct ComparisonRow {
    std::string label;
    double computed = 0.0;
    double std_error = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct TableReport {
    int table = 0;
    std::string title;
    std::vector<ComparisonRow> rows;

    bool pass() const;
};

struct ReproduceOptions {
    std::size_t scenarios = 1000000;
    std::size_t ks_scenarios = 100000;
    double ks_step = 0.00078125;  // half the baseline Euler step
    std::uint64_t seed = 1;
    double alpha = 0.01;
    int permutations = 199;
    CalibrationMethod calibration = CalibrationMethod::quadrature;
    std::string cache_path;
};

TableReport reproduce(int table_id, const ReproduceOptions& opts = {});

std::string format_report(const TableReport& r);
std::string format_probs(const DefaultDistribution& d);

}  // namespace fpt
