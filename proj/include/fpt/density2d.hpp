#pragma once

#include "fpt/marginal.hpp"
#include "fpt/numerics.hpp"

#include <cmath>
#include <memory>
#include <vector>

namespace fpt {

struct PairModel {
    DimensionParams first;
    DimensionParams second;
    double rho = 0.0;

    void validate() const;
    bool zero_drift() const { return first.mu == 0.0 && second.mu == 0.0; }
};

// Polar description of the pair after rotating to independent coordinates.
struct DensityGeometry {
    double rho_tilde = 0.0;
    double alpha = 0.0;   // wedge opening angle
    double r0 = 0.0;      // start distance from the wedge apex
    double theta0 = 0.0;  // start angle, measured from the first coordinate's edge
    double mu1_tilde = 0.0;
    double mu2_tilde = 0.0;
};

DensityGeometry geometry(const PairModel& m);

// e^{-z} * sum_{n>=1} n sin(n pi phi / angle) I_{n pi / angle}(z): the angular
// kernel of the wedge exit density. Uses the Bessel series where it is
// accurate and the image expansion for large z.
class WedgeKernel {
public:
    WedgeKernel(double angle, double phi);

    // Log of the kernel. Interpolates a table of series values in log z, and
    // switches to the image expansion past switch_point().
    double log_scaled(double z) const;

    // Series value with its truncation bound, no switching.
    double series(double z, double* tail_bound = nullptr, int* terms = nullptr) const;
    // Image expansion; relative error about exp(-z (1 + cos phi)).
    double images(double z) const;

    double switch_point() const { return switch_z_; }
    bool images_valid() const { return images_valid_; }

private:
    double angle_;
    double phi_;
    double switch_z_;
    bool images_valid_;
    double log_lo_;
    double step_;
    std::vector<double> table_;
};

struct DensityPoint {
    double value = 0.0;
    double tail_bound = 0.0;  // truncation bound of the Bessel series
    int terms = 0;
};

// Joint density of the two exit times. Construction precomputes the geometry
// and per-model tables; evaluation is then cheap and thread-safe.
class JointDensity {
public:
    explicit JointDensity(const PairModel& m);
    ~JointDensity();
    JointDensity(JointDensity&&) noexcept;
    JointDensity& operator=(JointDensity&&) noexcept;

    double operator()(double s, double t) const { return std::exp(log_value(s, t)); }
    double log_value(double s, double t) const;

    // Independent route: each Bessel term's r-integral by adaptive quadrature,
    // then summed. Slow; used for validation.
    DensityPoint reference(double s, double t, const QuadratureSpec& spec = reference_spec()) const;
    static QuadratureSpec reference_spec() { return {1e-16, 1e-12, 2000}; }

    const PairModel& model() const { return model_; }
    const DensityGeometry& geom() const { return geom_; }

private:
    struct Tables;
    PairModel model_;
    DensityGeometry geom_;
    std::unique_ptr<Tables> tables_;
};

// Convenience one-off evaluation.
double joint_density(const PairModel& m, double s, double t);

// E(chi1^2 chi2^2) for a zero-drift pair.
QuadratureResult chi2_product_moment(const PairModel& m, const QuadratureSpec& spec = {});

}  // namespace fpt
