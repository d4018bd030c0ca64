#include "fpt/analysis.hpp"

#include "fpt/errors.hpp"
#include "fpt/parallel.hpp"
#include "fpt/random.hpp"

#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fpt {

namespace {

// Finite rows of both samples, pooled; the first n_a belong to a.
struct Pooled {
    std::size_t dims = 0;
    std::size_t n_a = 0;
    std::vector<double> data;  // row-major
    std::size_t size() const { return data.size() / dims; }
};

std::size_t append_finite(const ExitTimeSamples& s, std::vector<double>& data) {
    std::size_t kept = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto row = s.row(i);
        if (std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); })) {
            data.insert(data.end(), row.begin(), row.end());
            ++kept;
        }
    }
    return kept;
}

// Dense 0-based ranks with ties sharing a rank.
std::vector<std::uint32_t> dense_ranks(const std::vector<double>& v) {
    std::vector<std::uint32_t> order(v.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return v[x] < v[y]; });
    std::vector<std::uint32_t> rank(v.size());
    std::uint32_t r = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k > 0 && v[order[k]] != v[order[k - 1]]) ++r;
        rank[order[k]] = r;
    }
    return rank;
}

class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t i) {
        for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
    }
    std::int64_t prefix(std::size_t i) const {  // count with index <= i
        std::int64_t s = 0;
        for (++i; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

private:
    std::vector<std::int64_t> tree_;
};

// Two-dimensional statistic from per-point ranks. label[k] is true for sample a.
double statistic_2d(const std::vector<std::uint32_t>& rx, const std::vector<std::uint32_t>& ry,
                    const std::vector<std::uint32_t>& order_x, const std::vector<char>& label,
                    std::size_t n_a, std::size_t n_b) {
    const std::size_t n = rx.size();
    const std::uint32_t ny = *std::max_element(ry.begin(), ry.end()) + 1;
    // Cumulative counts by y rank for each sample, for #(y <= Y).
    std::vector<std::int64_t> ya(ny, 0), yb(ny, 0);
    for (std::size_t k = 0; k < n; ++k) (label[k] ? ya : yb)[ry[k]]++;
    for (std::uint32_t r = 1; r < ny; ++r) {
        ya[r] += ya[r - 1];
        yb[r] += yb[r - 1];
    }
    Fenwick fa(ny), fb(ny);
    const double ia = 1.0 / static_cast<double>(n_a);
    const double ib = 1.0 / static_cast<double>(n_b);
    double best = 0.0;
    std::int64_t xa = 0, xb = 0;
    std::size_t k = 0;
    while (k < n) {
        // Insert the whole tie group in x, then use each of its points as a corner.
        std::size_t end = k;
        const std::uint32_t gx = rx[order_x[k]];
        while (end < n && rx[order_x[end]] == gx) {
            const auto p = order_x[end];
            if (label[p]) {
                fa.add(ry[p]);
                ++xa;
            } else {
                fb.add(ry[p]);
                ++xb;
            }
            ++end;
        }
        for (std::size_t j = k; j < end; ++j) {
            const auto y = ry[order_x[j]];
            const std::int64_t a1 = fa.prefix(y), b1 = fb.prefix(y);
            const std::int64_t a2 = xa - a1, b2 = xb - b1;
            const std::int64_t a3 = ya[y] - a1, b3 = yb[y] - b1;
            const std::int64_t a4 = static_cast<std::int64_t>(n_a) - a1 - a2 - a3;
            const std::int64_t b4 = static_cast<std::int64_t>(n_b) - b1 - b2 - b3;
            best = std::max({best, std::abs(a1 * ia - b1 * ib), std::abs(a2 * ia - b2 * ib),
                             std::abs(a3 * ia - b3 * ib), std::abs(a4 * ia - b4 * ib)});
        }
        k = end;
    }
    return best;
}

// Any dimension, O(n^2 2^d).
double statistic_naive(const Pooled& p, const std::vector<char>& label, std::size_t n_a,
                       std::size_t n_b) {
    const std::size_t n = p.size(), d = p.dims;
    const std::size_t orient = std::size_t{1} << d;
    std::vector<std::int64_t> ca(orient), cb(orient);
    double best = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::fill(ca.begin(), ca.end(), 0);
        std::fill(cb.begin(), cb.end(), 0);
        const double* corner = &p.data[c * d];
        for (std::size_t k = 0; k < n; ++k) {
            const double* x = &p.data[k * d];
            std::size_t q = 0;
            for (std::size_t j = 0; j < d; ++j) q = (q << 1) | (x[j] > corner[j] ? 1u : 0u);
            (label[k] ? ca : cb)[q]++;
        }
        for (std::size_t q = 0; q < orient; ++q)
            best = std::max(best, std::abs(static_cast<double>(ca[q]) / n_a -
                                           static_cast<double>(cb[q]) / n_b));
    }
    return best;
}

class StatisticEngine {
public:
    explicit StatisticEngine(const Pooled& p) : pooled_(p) {
        if (p.dims > 2) return;
        const std::size_t n = p.size();
        std::vector<double> xs(n), ys(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            xs[k] = p.data[k * p.dims];
            if (p.dims == 2) ys[k] = p.data[k * p.dims + 1];
        }
        rx_ = dense_ranks(xs);
        ry_ = dense_ranks(ys);
        order_x_.resize(n);
        std::iota(order_x_.begin(), order_x_.end(), 0u);
        std::sort(order_x_.begin(), order_x_.end(), [&](auto a, auto b) { return rx_[a] < rx_[b]; });
    }

    double operator()(const std::vector<char>& label) const {
        const std::size_t n_a = pooled_.n_a, n_b = pooled_.size() - pooled_.n_a;
        if (pooled_.dims <= 2) return statistic_2d(rx_, ry_, order_x_, label, n_a, n_b);
        return statistic_naive(pooled_, label, n_a, n_b);
    }

private:
    const Pooled& pooled_;
    std::vector<std::uint32_t> rx_, ry_, order_x_;
};

Pooled pool(const ExitTimeSamples& a, const ExitTimeSamples& b, KsReport* report) {
    if (a.dims() != b.dims()) throw ValidationError("samples have different dimensions");
    if (a.dims() == 0) throw ValidationError("samples have no coordinates");
    Pooled p;
    p.dims = a.dims();
    p.n_a = append_finite(a, p.data);
    const std::size_t n_b = append_finite(b, p.data);
    if (report) {
        report->n_a = p.n_a;
        report->n_b = n_b;
        report->excluded_a = a.size() - p.n_a;
        report->excluded_b = b.size() - n_b;
    }
    if (p.n_a == 0 || n_b == 0) throw ValidationError("a sample has no finite rows");
    return p;
}

std::vector<char> initial_labels(const Pooled& p) {
    std::vector<char> label(p.size(), 0);
    std::fill(label.begin(), label.begin() + static_cast<std::ptrdiff_t>(p.n_a), 1);
    return label;
}

}  // namespace

DefaultDistribution default_probs(const ExitTimeSamples& samples, double horizon) {
    if (samples.size() == 0) throw ValidationError("default_probs needs at least one scenario");
    if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
    const std::size_t n = samples.size(), d = samples.dims();
    std::vector<std::size_t> counts(d + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = samples.row(i);
        counts[std::count_if(row.begin(), row.end(), [&](double t) { return t <= horizon; })]++;
    }
    DefaultDistribution out;
    out.scenarios = n;
    out.horizon = horizon;
    for (std::size_t k = 0; k <= d; ++k) {
        const double p = static_cast<double>(counts[k]) / static_cast<double>(n);
        out.probs.push_back(p);
        out.std_errors.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(n)));
    }
    return out;
}

double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsReport ks_1sample(std::span<const double> samples, const std::function<double(double)>& cdf,
                    double alpha) {
    if (samples.empty()) throw ValidationError("ks_1sample needs samples");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    std::vector<double> x(samples.begin(), samples.end());
    if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }))
        throw DomainError("ks_1sample needs finite samples");
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    // Invert the limiting law for the critical value.
    double lo = 0.2, hi = 5.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (kolmogorov_sf(mid) > alpha ? lo : hi) = mid;
    }
    KsReport r;
    r.statistic = d;
    r.alpha = alpha;
    r.n_a = x.size();
    r.critical = 0.5 * (lo + hi) / std::sqrt(n);
    r.p_value = kolmogorov_sf(std::sqrt(n) * d);
    r.reject = d > r.critical;
    return r;
}

double peacock_statistic(const ExitTimeSamples& a, const ExitTimeSamples& b) {
    const Pooled p = pool(a, b, nullptr);
    return StatisticEngine(p)(initial_labels(p));
}

KsReport ks_2sample_md(const ExitTimeSamples& a, const ExitTimeSamples& b, const KsOptions& opts) {
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    if (opts.permutations < 1) throw ValidationError("permutations must be at least 1");
    KsReport r;
    r.alpha = opts.alpha;
    const Pooled p = pool(a, b, &r);
    const StatisticEngine stat(p);
    const std::vector<char> base = initial_labels(p);
    r.statistic = stat(base);

    std::vector<double> perm_stats(static_cast<std::size_t>(opts.permutations));
    parallel_for(perm_stats.size(), [&](std::size_t k) {
        Stream stream(opts.seed, k, Substream::selector);
        std::vector<char> label = base;
        for (std::size_t i = label.size() - 1; i > 0; --i) {
            boost::random::uniform_int_distribution<std::size_t> pick(0, i);
            std::swap(label[i], label[pick(stream)]);
        }
        perm_stats[k] = stat(label);
    });
    const auto at_least = std::count_if(perm_stats.begin(), perm_stats.end(),
                                        [&](double s) { return s >= r.statistic; });
    r.p_value = static_cast<double>(1 + at_least) / (1.0 + opts.permutations);
    r.reject = r.p_value <= opts.alpha;
    return r;
}

}  // namespace fpt
