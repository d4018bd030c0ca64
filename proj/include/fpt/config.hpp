#pragma once

#include "fpt/calibration.hpp"
#include "fpt/euler.hpp"
#include "fpt/marginal.hpp"
#include "fpt/model.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace fpt {

enum class SamplingMethod { copula, euler };

struct RunConfig {
    PortfolioModel model;
    SamplingMethod method = SamplingMethod::copula;
    CalibrationMethod calibration = CalibrationMethod::quadrature;
    EulerConfig euler;  // step and horizon used when method is euler
    std::size_t scenarios = 1000000;
    std::uint64_t seed = 1;
    double horizon = 10.0;
    std::string output_path;  // samples CSV; empty skips writing
    std::string cache_path;   // calibration cache; empty disables it

    void validate() const;
};

// JSON document:
//   {"dims": [{"mu":..,"sigma":..,"x0":..,"barrier":..}, ...],
//    "corr": [[...], ...], "method": "copula"|"euler",
//    "calibration": "quadrature"|"euler_mc", "scenarios": n, "seed": s,
//    "horizon": T, "euler": {"step": h, "horizon": T}, "output": path,
//    "cache": path}
// Only dims and corr are required.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

// Model-only form of the same document.
PortfolioModel parse_model(const std::string& text);

// CSV with header tau_1,...,tau_N, +inf written as "inf".
void write_samples(std::ostream& out, const ExitTimeSamples& s);
void write_samples(const std::string& path, const ExitTimeSamples& s);
ExitTimeSamples read_samples(std::istream& in);
ExitTimeSamples read_samples(const std::string& path);

}  // namespace fpt
