#include "fpt/calibration.hpp"

#include "fpt/errors.hpp"
#include "fpt/euler.hpp"
#include "fpt/marginal.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace fpt {

namespace {

using nlohmann::json;

RankCorrelation rank_corr_quadrature(const PairModel& m, const QuadratureSpec& spec) {
    const JointDensity density(m);
    auto integrand = [&](double s, double t) {
        const double f = density(s, t);
        if (f == 0.0) return 0.0;
        return uniform_transform(m.first, s) * uniform_transform(m.second, t) * f;
    };
    const QuadratureResult r = integrate_2d(integrand, spec);
    return {12.0 * (r.value - 0.25), 12.0 * r.error};
}

RankCorrelation rank_corr_euler(const PairModel& m, const EulerMcOptions& o) {
    PortfolioModel model;
    model.dims = {m.first, m.second};
    model.corr = Eigen::Matrix2d{{1.0, m.rho}, {m.rho, 1.0}};
    EulerConfig cfg;
    cfg.step = o.step;
    cfg.horizon = o.horizon;
    cfg.scenarios = o.paths;
    cfg.seed = o.seed;
    const ExitTimeSamples s = euler_sample(model, cfg);

    const std::size_t n = s.size();
    double m1 = 0, m2 = 0;
    std::vector<double> u1(n), u2(n);
    for (std::size_t i = 0; i < n; ++i) {
        u1[i] = uniform_transform(m.first, s(i, 0));
        u2[i] = uniform_transform(m.second, s(i, 1));
        m1 += u1[i];
        m2 += u2[i];
    }
    m1 /= n;
    m2 /= n;
    double c = 0, v1 = 0, v2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        c += (u1[i] - m1) * (u2[i] - m2);
        v1 += (u1[i] - m1) * (u1[i] - m1);
        v2 += (u2[i] - m2) * (u2[i] - m2);
    }
    const double r = c / std::sqrt(v1 * v2);
    return {r, (1.0 - r * r) / std::sqrt(static_cast<double>(n))};
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

CalibrationMethod parse_method(const std::string& name) {
    if (name == "quadrature") return CalibrationMethod::quadrature;
    if (name == "euler_mc") return CalibrationMethod::euler_mc;
    throw ValidationError("method must be quadrature or euler_mc, got '" + name + "'");
}

std::string to_string(CalibrationMethod m) {
    return m == CalibrationMethod::quadrature ? "quadrature" : "euler_mc";
}

RankCorrelation pair_rank_corr(const PairModel& m, const CalibrationOptions& opts) {
    m.validate();
    if (m.first.defective() || m.second.defective())
        throw ValidationError("rank correlation needs non-defective dimensions");
    if (opts.method == CalibrationMethod::euler_mc) return rank_corr_euler(m, opts.euler);
    if (m.rho == 0.0) return {0.0, 0.0};
    return rank_corr_quadrature(m, opts.quadrature);
}

double spearman_to_pearson(double rho_u) {
    if (!(std::abs(rho_u) <= 1.0 + 1e-9)) throw DomainError("rank correlation must lie in [-1, 1]");
    const double r = 2.0 * std::sin(std::numbers::pi * rho_u / 6.0);
    if (std::abs(r) > 1.0) {
        std::cerr << "warning: clamping Gaussian correlation " << r << " to +-1\n";
        return std::copysign(1.0, r);
    }
    return r;
}

CalibratedCopula assemble_copula(const Eigen::MatrixXd& raw) {
    if (raw.rows() != raw.cols() || raw.rows() < 1)
        throw ValidationError("copula matrix must be square");
    CalibratedCopula out;
    out.sigma = 0.5 * (raw + raw.transpose());
    out.sigma.diagonal().setOnes();

    Eigen::LLT<Eigen::MatrixXd> llt(out.sigma);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.sigma);
        Eigen::VectorXd lambda = eig.eigenvalues();
        const Eigen::VectorXd clipped = lambda.cwiseMax(1e-10);
        out.repair.max_eigen_clip = (clipped - lambda).maxCoeff();
        Eigen::MatrixXd fixed = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
        const Eigen::VectorXd scale = fixed.diagonal().cwiseSqrt().cwiseInverse();
        fixed = scale.asDiagonal() * fixed * scale.asDiagonal();
        fixed = 0.5 * (fixed + fixed.transpose());
        fixed.diagonal().setOnes();
        out.repair.frobenius_shift = (fixed - out.sigma).norm();
        out.sigma = fixed;
        llt.compute(out.sigma);
        if (llt.info() != Eigen::Success)
            throw Error("copula matrix is not positive definite after repair");
        std::cerr << "warning: copula matrix repaired, max eigenvalue clip "
                  << out.repair.max_eigen_clip << ", Frobenius shift " << out.repair.frobenius_shift
                  << "\n";
    }
    out.chol = llt.matrixL();
    return out;
}

CalibratedCopula calibrate(const PortfolioModel& model, const CalibrationOptions& opts) {
    model.validate();
    const std::size_t n = model.size();
    for (std::size_t k = 0; k < n; ++k)
        if (model.dims[k].defective())
            throw ValidationError("dims[" + std::to_string(k) + "]: defective dimensions cannot be calibrated");
    if (!model.zero_drift() && n > 2)
        throw ValidationError(
            "drifted models are limited to two dimensions: the joint exit density is unknown for N > 2");

    Eigen::MatrixXd raw = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = spearman_to_pearson(pair_rank_corr(model.pair(i, j), opts).value);
            raw(i, j) = raw(j, i) = r;
        }
    return assemble_copula(raw);
}

std::uint64_t model_hash(const PortfolioModel& model, const CalibrationOptions& opts) {
    std::ostringstream key;
    key.precision(17);
    key << "n=" << model.size() << ";method=" << to_string(opts.method) << ";";
    for (const auto& d : model.dims)
        key << d.mu << "," << d.sigma << "," << d.x0 << "," << d.barrier << ";";
    for (Eigen::Index i = 0; i < model.corr.rows(); ++i)
        for (Eigen::Index j = 0; j < model.corr.cols(); ++j) key << model.corr(i, j) << ",";
    if (opts.method == CalibrationMethod::euler_mc)
        key << "paths=" << opts.euler.paths << ";step=" << opts.euler.step
            << ";horizon=" << opts.euler.horizon << ";seed=" << opts.euler.seed;
    else
        key << "tol=" << opts.quadrature.abs_tol << "," << opts.quadrature.rel_tol;

    // FNV-1a
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : key.str()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::optional<CalibratedCopula> load_cached(const std::string& path, std::uint64_t key) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    json doc;
    try {
        in >> doc;
    } catch (const json::exception&) {
        return std::nullopt;
    }
    const auto it = doc.find(hex(key));
    if (it == doc.end()) return std::nullopt;
    const auto& rows = it->at("sigma");
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd sigma(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) sigma(i, j) = rows.at(i).at(j).get<double>();
    CalibratedCopula c = assemble_copula(sigma);
    c.repair.max_eigen_clip = it->value("max_eigen_clip", 0.0);
    c.repair.frobenius_shift = it->value("frobenius_shift", 0.0);
    return c;
}

void store_cached(const std::string& path, std::uint64_t key, const CalibratedCopula& c) {
    json doc = json::object();
    {
        std::ifstream in(path);
        if (in) {
            try {
                in >> doc;
            } catch (const json::exception&) {
                doc = json::object();
            }
        }
    }
    json rows = json::array();
    for (Eigen::Index i = 0; i < c.sigma.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < c.sigma.cols(); ++j) row.push_back(c.sigma(i, j));
        rows.push_back(row);
    }
    doc[hex(key)] = {{"sigma", rows},
                     {"max_eigen_clip", c.repair.max_eigen_clip},
                     {"frobenius_shift", c.repair.frobenius_shift}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write calibration cache " + path);
    out << doc.dump(2) << "\n";
}

CalibratedCopula calibrate_cached(const PortfolioModel& model, const CalibrationOptions& opts,
                                  const std::string& cache_path) {
    if (cache_path.empty()) return calibrate(model, opts);
    const std::uint64_t key = model_hash(model, opts);
    if (auto hit = load_cached(cache_path, key)) return *hit;
    CalibratedCopula c = calibrate(model, opts);
    store_cached(cache_path, key, c);
    return c;
}

}  // namespace fpt
