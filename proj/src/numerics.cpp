#include "fpt/numerics.hpp"

#include "fpt/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

namespace fpt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Acklam's rational approximation for the lower half, p <= 0.5.
double quantile_initial(double p) {
    static constexpr std::array<double, 6> a = {
        -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
        1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b = {
        -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
        6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr std::array<double, 6> c = {
        -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
        -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d = {
        7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
        3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double lower_quantile(double p) {
    double x = quantile_initial(p);
    // One Halley step against the erfc-based cdf. Skipped where exp(x^2/2)
    // would overflow; the initial value is already good to ~1e-9 there.
    if (p > 1e-300) {
        const double e = std_normal_cdf(x) - p;
        const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

// Power series, rescaled as it grows so that large z cannot overflow.
double log_bessel_series(double nu, double z) {
    const double q = 0.25 * z * z;
    double term = 1.0;
    double sum = 1.0;
    double log_scale = 0.0;
    for (int k = 1; k < 100000; ++k) {
        const double ratio = q / (k * (nu + k));
        term *= ratio;
        sum += term;
        if (sum > 1e250) {
            sum *= 1e-250;
            term *= 1e-250;
            log_scale += 250.0 * std::numbers::ln10;
        }
        if (ratio < 1.0 && term < 0.5 * kEps * sum) break;
    }
    return nu * std::log(0.5 * z) - std::lgamma(nu + 1.0) + std::log(sum) + log_scale;
}

// Large-argument expansion. Returns false when the terms stop shrinking
// before full precision is reached.
bool log_bessel_hankel(double nu, double z, double& out) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    double prev = kInf;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -(mu - odd * odd) / (8.0 * k * z);
        const double mag = std::abs(term);
        if (mag < 0.5 * kEps * std::abs(sum)) {
            out = z - 0.5 * std::log(2.0 * std::numbers::pi * z) + std::log(sum);
            return true;
        }
        if (mag > prev) return false;
        prev = mag;
        sum += term;
    }
    return false;
}

// QUADPACK 15-point Kronrod rule with its embedded 7-point Gauss rule.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    int piece;
    bool operator<(const Panel& o) const { return error < o.error; }
};

struct Piece {
    Integrand f;
    double a, b;
};

Panel gk15(const Integrand& f, double a, double b, int piece) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    double abs_sum = std::abs(kronrod);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = f(centre - dx);
        f2[j] = f(centre + dx);
        kronrod += kWgk[j] * (f1[j] + f2[j]);
        abs_sum += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) gauss += kWg[j / 2] * (f1[j] + f2[j]);
    }
    const double mean = 0.5 * kronrod;
    double asc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

    const double value = kronrod * half;
    const double res_abs = abs_sum * std::abs(half);
    const double res_asc = asc * std::abs(half);
    double err = std::abs((kronrod - gauss) * half);
    if (res_asc != 0.0 && err != 0.0)
        err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    if (res_abs > std::numeric_limits<double>::min() / (50.0 * kEps))
        err = std::max(50.0 * kEps * res_abs, err);
    return {a, b, value, err, piece};
}

// Bisects the panel with the largest error estimate until the summed error
// meets the tolerance. Several pieces share one error budget.
QuadratureResult adaptive(const std::vector<Piece>& pieces, const QuadratureSpec& spec) {
    std::priority_queue<Panel> open;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        Panel p = gk15(pieces[i].f, pieces[i].a, pieces[i].b, static_cast<int>(i));
        total += p.value;
        total_err += p.error;
        open.push(p);
    }
    double frozen_err = 0.0;  // panels too narrow to split further
    double frozen_val = 0.0;
    int splits = 0;

    auto target = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };

    while (total_err > target()) {
        if (open.empty() || splits >= spec.max_subdivisions) {
            throw ConvergenceError("adaptive quadrature did not reach tolerance", total,
                                   total_err);
        }
        Panel worst = open.top();
        open.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) ||
            (worst.b - worst.a) < 1e3 * kEps * std::max(std::abs(worst.a), std::abs(worst.b))) {
            frozen_val += worst.value;
            frozen_err += worst.error;
            continue;
        }
        const Integrand& f = pieces[worst.piece].f;
        Panel left = gk15(f, worst.a, mid, worst.piece);
        Panel right = gk15(f, mid, worst.b, worst.piece);
        ++splits;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        open.push(left);
        open.push(right);
    }
    // Recompute from the panels to shed accumulated cancellation in the running sums.
    double value = frozen_val;
    double error = frozen_err;
    while (!open.empty()) {
        value += open.top().value;
        error += open.top().error;
        open.pop();
    }
    return {value, error, splits};
}

}  // namespace

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw ValidationError("quadrature tolerances must be positive");
    if (max_subdivisions < 1) throw ValidationError("max_subdivisions must be at least 1");
}

double std_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double std_normal_ccdf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0, 1)");
    if (p > 0.5) return -lower_quantile(1.0 - p);
    return lower_quantile(p);
}

double bessel_i(double order, double z, bool log_scaled) {
    if (!(order >= 0.0) || !(z >= 0.0) || std::isinf(order))
        throw DomainError("bessel_i needs finite order >= 0 and z >= 0");
    double log_value;
    if (z == 0.0) {
        log_value = order == 0.0 ? 0.0 : -kInf;
    } else if (std::isinf(z)) {
        log_value = kInf;
    } else if (z > std::max(30.0, 2.0 * order) && log_bessel_hankel(order, z, log_value)) {
        // done
    } else {
        log_value = log_bessel_series(order, z);
    }
    if (log_scaled) return log_value;
    if (log_value > std::log(std::numeric_limits<double>::max()))
        throw OverflowError("bessel_i overflows; request the log-scaled value");
    return std::exp(log_value);
}

QuadratureResult integrate_1d(const Integrand& f, double a, double b, const QuadratureSpec& spec) {
    spec.validate();
    if (std::isnan(a) || std::isnan(b) || std::isinf(a))
        throw DomainError("integrate_1d needs a finite lower limit");
    if (a == b) return {};
    if (b < a) {
        auto r = integrate_1d(f, b, a, spec);
        r.value = -r.value;
        return r;
    }
    if (std::isinf(b)) {
        // r = u / (1 - u). The half u > 1/2 is parameterised by w = 1 - u so
        // that points near u = 1 keep full relative precision.
        auto near = [&](double u) {
            const double w = 1.0 - u;
            return f(a + u / w) / (w * w);
        };
        auto far = [&](double w) {
            if (w <= 0.0) return 0.0;
            return f(a + (1.0 - w) / w) / (w * w);
        };
        return adaptive({{near, 0.0, 0.5}, {far, 0.0, 0.5}}, spec);
    }
    return adaptive({{f, a, b}}, spec);
}

QuadratureResult integrate_2d(const Integrand2& f, const QuadratureSpec& spec) {
    spec.validate();
    // Rows are held to a relative tolerance only. An absolute one lets far-tail
    // rows stop after a single panel with a badly low value, and those rows
    // carry the slowly decaying part of the mass.
    QuadratureSpec inner = spec;
    inner.abs_tol = std::numeric_limits<double>::min();
    inner.rel_tol = 0.25 * spec.rel_tol;
    QuadratureSpec outer = spec;
    outer.abs_tol = 0.25 * spec.abs_tol;
    outer.rel_tol = 0.25 * spec.rel_tol;

    // Each triangle is parameterised by base = min(s, t) and gap = |t - s|,
    // both on (0, inf) and mapped to (0, 1) by integrate_1d.
    QuadratureResult total;
    for (bool lower : {true, false}) {
        double row_abs = 0.0;
        auto row = [&](double base) {
            auto cell = [&](double gap) {
                if (gap <= 0.0) return 0.0;
                const double other = base + gap;
                return lower ? f(base, other) : f(other, base);
            };
            return integrate_1d(cell, 0.0, kInf, inner).value;
        };
        auto r = integrate_1d(row, 0.0, kInf, outer);
        row_abs = std::abs(r.value);
        total.value += r.value;
        // Estimate only: each row meets the inner relative tolerance.
        total.error += r.error + inner.rel_tol * row_abs;
        total.subdivisions += r.subdivisions;
    }
    return total;
}

GaussRule gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre needs n >= 1");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

}  // namespace fpt
