#include "fpt/density2d.hpp"

#include "fpt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace fpt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kLogTiny = -745.0;

// Bessel series stopping rule, applied to term magnitudes n*I (the sine
// factor can vanish for whole residue classes of n).
constexpr double kSeriesRelTol = 1e-12;
constexpr int kSeriesMinTerms = 10;
constexpr int kSeriesMaxTerms = 500;
constexpr int kSeriesQuietRun = 3;

// Series rounding error grows like eps*exp((1-cos phi) z) and the image
// remainder shrinks like exp(-(1+cos phi) z); they cross near z = 18.4.
constexpr double kImageSwitch = 18.4;

constexpr double kTableLogLo = -13.8;  // z = 1e-6
constexpr double kTableStep = 0.01;

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

const GaussRule& panel_rule() {
    static const GaussRule rule = gauss_legendre(16);
    return rule;
}

// log of int_0^inf exp(beta r - a r^2 + c r) * kernel(c r) dr, kernel given
// in log form with the e^{-z} scaling.
double log_r_integral(double beta, double a, double c, const WedgeKernel& kernel) {
    auto g = [&](double r) {
        if (r <= 0.0) return -kInf;
        return (beta + c) * r - a * r * r + kernel.log_scaled(c * r);
    };
    const double width = 1.0 / std::sqrt(2.0 * a);
    const double envelope_peak = std::max(0.0, (beta + c) / (2.0 * a));
    double lo = 0.0;
    double hi = envelope_peak + std::sqrt(40.0 / a) + width;

    // Golden-section search for the mode; the log-integrand is unimodal.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double g1 = g(x1), g2 = g(x2);
    for (int it = 0; it < 60 && (hi - lo) > 1e-3 * width; ++it) {
        if (g1 < g2) {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = g(x1);
        }
    }
    const double mode = 0.5 * (lo + hi);
    const double peak = std::max(g1, g2);
    if (peak == -kInf) return -kInf;

    const double from = std::max(0.0, mode - 12.0 * width);
    const double to = mode + 12.0 * width;
    // When the window reaches r = 0 the integrand starts like r^(pi/alpha),
    // which is not smooth there; grade the panels towards zero.
    const bool graded = from == 0.0;
    constexpr int panels = 8;
    const auto& rule = panel_rule();
    double sum = 0.0;
    auto edge = [&](int p) {
        const double x = static_cast<double>(p) / panels;
        return from + (to - from) * (graded ? x * x * x : x);
    };
    for (int p = 0; p < panels; ++p) {
        const double lo_edge = edge(p);
        const double hi_edge = edge(p + 1);
        const double mid = 0.5 * (lo_edge + hi_edge);
        const double half = 0.5 * (hi_edge - lo_edge);
        double part = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k)
            part += rule.weights[k] * std::exp(g(mid + half * rule.nodes[k]) - peak);
        sum += part * half;
    }
    return peak + std::log(sum);
}

}  // namespace

void PairModel::validate() const {
    first.validate();
    second.validate();
    if (!(std::abs(rho) < 1.0)) throw ValidationError("pair correlation must lie in (-1, 1)");
}

DensityGeometry geometry(const PairModel& m) {
    m.validate();
    const double d1 = m.first.gap();
    const double d2 = m.second.gap();
    const double s1 = m.first.sigma;
    const double s2 = m.second.sigma;
    DensityGeometry g;
    g.rho_tilde = sgn(d1 * d2) * m.rho;
    const double rt = g.rho_tilde;
    const double root = std::sqrt(1.0 - rt * rt);
    g.alpha = rt == 0.0 ? kPi / 2.0 : std::atan2(root, -rt);
    const double a1 = std::abs(d1);
    const double a2 = std::abs(d2);
    g.r0 = std::sqrt((a1 * a1 * s2 * s2 + a2 * a2 * s1 * s1 - 2.0 * a1 * a2 * rt * s1 * s2) /
                     (1.0 - rt * rt)) /
           (s1 * s2);
    const double den = a1 * s2 - rt * a2 * s1;
    g.theta0 = den == 0.0 ? kPi / 2.0 : std::atan2(s1 * a2 * root, den);
    const double rho_root = std::sqrt(1.0 - m.rho * m.rho);
    const double gamma1 = (s2 * m.first.mu - s1 * m.second.mu * m.rho) / (s1 * s2 * rho_root);
    const double gamma2 = m.second.mu / s2;
    g.mu1_tilde = sgn(m.first.x0 - m.first.barrier) * gamma1;
    g.mu2_tilde = sgn(m.second.x0 - m.second.barrier) * gamma2;
    return g;
}

WedgeKernel::WedgeKernel(double angle, double phi)
    : angle_(angle), phi_(phi), log_lo_(kTableLogLo), step_(kTableStep) {
    if (!(angle > 0.0) || !(phi > 0.0) || !(phi < angle))
        throw DomainError("wedge kernel needs 0 < phi < angle");
    images_valid_ = phi < kPi;
    switch_z_ = images_valid_ ? kImageSwitch : 60.0;
    const int n = static_cast<int>(std::ceil((std::log(switch_z_) - log_lo_) / step_)) + 3;
    table_.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v = series(std::exp(log_lo_ + i * step_));
        table_[i] = v > 0.0 ? std::log(v) : kLogTiny;
    }
}

double WedgeKernel::series(double z, double* tail_bound, int* terms) const {
    if (tail_bound) *tail_bound = 0.0;
    if (terms) *terms = 0;
    if (z <= 0.0) return 0.0;
    const double order_step = kPi / angle_;
    double sum = 0.0;
    double largest = 0.0;
    double prev_mag = 0.0;
    int quiet = 0;
    for (int n = 1; n <= kSeriesMaxTerms; ++n) {
        const double mag = n * std::exp(log_bessel_i(n * order_step, z) - z);
        sum += std::sin(n * kPi * phi_ / angle_) * mag;
        largest = std::max(largest, mag);
        const bool small = mag <= kSeriesRelTol * std::abs(sum) || mag <= 1e-18 * largest;
        quiet = small ? quiet + 1 : 0;
        if (n >= kSeriesMinTerms && quiet >= kSeriesQuietRun) {
            if (tail_bound) {
                const double q = prev_mag > 0.0 ? mag / prev_mag : 0.0;
                *tail_bound = q < 1.0 ? mag * q / (1.0 - q) : mag;
            }
            if (terms) *terms = n;
            return sum;
        }
        prev_mag = mag;
    }
    throw ConvergenceError("wedge Bessel series hit the term cap", sum, prev_mag);
}

double WedgeKernel::images(double z) const {
    double sum = 0.0;
    for (int j = 0;; ++j) {
        const double t = phi_ + 2.0 * j * angle_;
        if (t >= kPi) break;
        sum += std::sin(t) * std::exp(-z * (1.0 - std::cos(t)));
    }
    for (int k = 1;; ++k) {
        const double t = 2.0 * k * angle_ - phi_;
        if (t >= kPi) break;
        sum -= std::sin(t) * std::exp(-z * (1.0 - std::cos(t)));
    }
    return angle_ * angle_ * z / (2.0 * kPi * kPi) * sum;
}

double WedgeKernel::log_scaled(double z) const {
    if (!(z > 0.0)) return -kInf;
    if (z > switch_z_) {
        const double v = images_valid_ ? images(z) : series(z);
        return v > 0.0 ? std::log(v) : kLogTiny;
    }
    const double u = std::log(z);
    const double pos = (u - log_lo_) / step_;
    if (pos < 1.0 || pos > static_cast<double>(table_.size()) - 3.0) {
        const double v = series(z);
        return v > 0.0 ? std::log(v) : kLogTiny;
    }
    const int i = static_cast<int>(pos);
    const double x = pos - i;
    // Four-point Lagrange through nodes i-1 .. i+2.
    const double y0 = table_[i - 1], y1 = table_[i], y2 = table_[i + 1], y3 = table_[i + 2];
    return -x * (x - 1.0) * (x - 2.0) / 6.0 * y0 + (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0 * y1 -
           (x + 1.0) * x * (x - 2.0) / 2.0 * y2 + (x + 1.0) * x * (x - 1.0) / 6.0 * y3;
}

// Per-branch constants: which exit happens first decides the prefactor,
// Gaussian rate, linear drift term and wedge angle used.
struct BranchTerms {
    double log_prefactor;  // everything outside the r-integral
    double beta;
    double a;
    double c;
    bool first_exits_first;
};

struct JointDensity::Tables {
    WedgeKernel first_kernel;   // s < t, angle alpha - theta0
    WedgeKernel second_kernel;  // t < s, angle theta0
    // Closed zero-drift forms on the doubled wedge, when their image
    // expansions are valid.
    std::optional<WedgeKernel> closed_first;
    std::optional<WedgeKernel> closed_second;
};

namespace {

BranchTerms branch_terms(const DensityGeometry& g, double s, double t) {
    const double sa = std::sin(g.alpha);
    const double ca = std::cos(g.alpha);
    const double base = 0.5 * std::log(kPi / 2.0) + std::log(sa) - 2.0 * std::log(g.alpha);
    const double m1 = g.mu1_tilde;
    const double m2 = g.mu2_tilde;
    const double start_drift = m1 * std::cos(g.theta0) + m2 * std::sin(g.theta0);
    BranchTerms b{};
    if (s < t) {
        const double u = t - s;
        b.first_exits_first = true;
        b.log_prefactor = base - std::log(s) - 1.5 * std::log(u) -
                          g.r0 * (g.r0 / (2.0 * s) + start_drift) - 0.5 * (m1 * m1 * s + m2 * m2 * t);
        b.beta = m1 * ca;
        b.a = (t - s * ca * ca) / (2.0 * s * u);
        b.c = g.r0 / s;
    } else {
        const double u = s - t;
        const double cross = m1 * sa - m2 * ca;
        b.first_exits_first = false;
        b.log_prefactor = base - std::log(t) - 1.5 * std::log(u) -
                          g.r0 * (g.r0 / (2.0 * t) + start_drift) -
                          0.5 * (m1 * m1 + m2 * m2) * t - 0.5 * cross * cross * u;
        b.beta = m1 * ca * ca + m2 * sa * ca;
        b.a = (s - t * ca * ca) / (2.0 * t * u);
        b.c = g.r0 / t;
    }
    return b;
}

}  // namespace

JointDensity::JointDensity(const PairModel& m) : model_(m), geom_(geometry(m)) {
    if (m.first.defective() || m.second.defective())
        throw ValidationError("joint density needs both coordinates non-defective");
    const double a = geom_.alpha;
    const double th = geom_.theta0;
    tables_ = std::make_unique<Tables>(Tables{WedgeKernel(a, a - th), WedgeKernel(a, th), {}, {}});
    if (m.zero_drift()) {
        if (2.0 * (a - th) < kPi) tables_->closed_first.emplace(2.0 * a, 2.0 * (a - th));
        if (2.0 * th < kPi) tables_->closed_second.emplace(2.0 * a, 2.0 * th);
    }
}

JointDensity::~JointDensity() = default;
JointDensity::JointDensity(JointDensity&&) noexcept = default;
JointDensity& JointDensity::operator=(JointDensity&&) noexcept = default;

double JointDensity::log_value(double s, double t) const {
    if (!(s > 0.0) || !(t > 0.0)) return -kInf;
    if (std::isinf(s) || std::isinf(t)) return -kInf;
    if (s == t) {
        // Approach from s < t. Near the diagonal the density behaves like
        // (t - s)^(pi/(2 alpha) - 1); when that blows up we return the value at
        // the neighbouring double instead of +inf so quadrature stays finite.
        const double exponent = kPi / (2.0 * geom_.alpha) - 1.0;
        if (exponent > 1e-12) return -kInf;
        t = std::nextafter(s, kInf);
    }
    const auto& g = geom_;
    const bool first = s < t;
    const auto& closed = first ? tables_->closed_first : tables_->closed_second;
    if (closed) {
        const double lo = std::min(s, t);
        const double hi = std::max(s, t);
        const double u = hi - lo;
        const double sa = std::sin(g.alpha);
        const double q = hi - lo * std::cos(g.alpha) * std::cos(g.alpha);
        const double z = g.r0 * g.r0 * u / (4.0 * lo * q);
        const double log_pref = std::log(kPi * sa / (2.0 * g.alpha * g.alpha)) -
                                0.5 * std::log(lo * q) - std::log(u);
        return log_pref - g.r0 * g.r0 * sa * sa / (2.0 * q) + closed->log_scaled(z);
    }
    const BranchTerms b = branch_terms(g, s, t);
    const auto& kernel = first ? tables_->first_kernel : tables_->second_kernel;
    return b.log_prefactor + log_r_integral(b.beta, b.a, b.c, kernel);
}

DensityPoint JointDensity::reference(double s, double t, const QuadratureSpec& spec) const {
    if (!(s > 0.0) || !(t > 0.0) || s == t)
        throw DomainError("reference density needs positive, distinct s and t");
    const auto& g = geom_;
    const BranchTerms b = branch_terms(g, s, t);
    const double phi = b.first_exits_first ? g.alpha - g.theta0 : g.theta0;
    const double order_step = kPi / g.alpha;

    // Envelope exp((beta + c) r - a r^2) bounds every term; shift by its peak
    // and cut the range where it has fallen by 1e-16.
    const double env_mode = std::max(0.0, (b.beta + b.c) / (2.0 * b.a));
    const double shift = (b.beta + b.c) * env_mode - b.a * env_mode * env_mode;
    const double r_max = env_mode + std::sqrt(std::log(1e16) / b.a);

    double sum = 0.0;
    double prev_mag = 0.0;
    int quiet = 0;
    for (int n = 1; n <= kSeriesMaxTerms; ++n) {
        const double order = n * order_step;
        auto integrand = [&](double r) {
            if (r <= 0.0) return 0.0;
            return std::exp(b.beta * r - b.a * r * r + log_bessel_i(order, b.c * r) - shift);
        };
        const double integral = integrate_1d(integrand, 0.0, r_max, spec).value;
        const double mag = n * integral;
        sum += std::sin(n * kPi * phi / g.alpha) * mag;
        quiet = mag <= kSeriesRelTol * std::abs(sum) ? quiet + 1 : 0;
        if (n >= kSeriesMinTerms && quiet >= kSeriesQuietRun) {
            const double q = prev_mag > 0.0 ? mag / prev_mag : 0.0;
            const double tail = q < 1.0 ? mag * q / (1.0 - q) : mag;
            const double scale = std::exp(b.log_prefactor + shift);
            return {std::max(0.0, sum) * scale, tail * scale, n};
        }
        prev_mag = mag;
    }
    throw ConvergenceError("density series hit the term cap",
                           sum * std::exp(b.log_prefactor + shift), prev_mag);
}

double joint_density(const PairModel& m, double s, double t) { return JointDensity(m)(s, t); }

QuadratureResult chi2_product_moment(const PairModel& m, const QuadratureSpec& spec) {
    if (!m.zero_drift()) throw ValidationError("chi2_product_moment needs zero drifts");
    const JointDensity f(m);
    const double d1 = m.first.gap() / m.first.sigma;
    const double d2 = m.second.gap() / m.second.sigma;
    const double scale = d1 * d1 * d2 * d2;
    auto integrand = [&](double s, double t) { return f(s, t) / (s * t); };
    auto r = integrate_2d(integrand, spec);
    r.value *= scale;
    r.error *= scale;
    return r;
}

}  // namespace fpt
