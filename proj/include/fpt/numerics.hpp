#pragma once

#include <functional>
#include <vector>

namespace fpt {

struct QuadratureSpec {
    double abs_tol = 1e-9;
    double rel_tol = 1e-8;
    int max_subdivisions = 2000;

    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
};

double std_normal_pdf(double z);
double std_normal_cdf(double z);
// Upper tail 1 - cdf(z), accurate for large z.
double std_normal_ccdf(double z);
double std_normal_quantile(double p);

// Modified Bessel function of the first kind, I_order(z). With log_scaled set
// the natural log of the value is returned instead, which never overflows.
double bessel_i(double order, double z, bool log_scaled = false);
inline double log_bessel_i(double order, double z) { return bessel_i(order, z, true); }

using Integrand = std::function<double(double)>;
using Integrand2 = std::function<double(double, double)>;

// Adaptive Gauss-Kronrod 7/15. b may be +infinity.
QuadratureResult integrate_1d(const Integrand& f, double a, double b,
                              const QuadratureSpec& spec = {});

// Integral over (0, inf)^2, split into the triangles s < t and t < s. The
// integrand is never evaluated on the diagonal.
QuadratureResult integrate_2d(const Integrand2& f, const QuadratureSpec& spec = {});

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

}  // namespace fpt
