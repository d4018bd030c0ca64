#include "fpt/analysis.hpp"
#include "fpt/calibration.hpp"
#include "fpt/config.hpp"
#include "fpt/density2d.hpp"
#include "fpt/errors.hpp"
#include "fpt/euler.hpp"
#include "fpt/experiments.hpp"
#include "fpt/parallel.hpp"
#include "fpt/sampler.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace fpt;

struct Flags {
    std::string config;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;
    std::optional<double> horizon;
    std::optional<double> step;
    unsigned threads = 0;
    std::string out;
    double alpha = 0.01;
    std::string method = "quadrature";
    std::string cache;
};

void add_common(CLI::App* cmd, Flags& f, bool needs_config) {
    auto* c = cmd->add_option("--config", f.config, "model or run config (JSON)");
    if (needs_config) c->required();
    cmd->add_option("--threads", f.threads, "worker threads, 0 = all cores");
    cmd->add_option("--out", f.out, "output file (default: standard output)");
}

void add_sampling(CLI::App* cmd, Flags& f) {
    cmd->add_option("--n", f.n, "scenarios");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--horizon", f.horizon, "default horizon T");
}

RunConfig load_run(const Flags& f) {
    RunConfig cfg = load_config(f.config);
    if (f.n) cfg.scenarios = *f.n;
    if (f.seed) cfg.seed = *f.seed;
    if (f.horizon) {
        cfg.horizon = *f.horizon;
        cfg.euler.horizon = *f.horizon;
    }
    if (f.step) cfg.euler.step = *f.step;
    if (!f.out.empty()) cfg.output_path = f.out;
    if (!f.cache.empty()) cfg.cache_path = f.cache;
    cfg.calibration = parse_method(f.method);
    cfg.validate();
    return cfg;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw Error("cannot write " + path);
    return file;
}

void emit_samples(const ExitTimeSamples& s, const std::string& path) {
    std::ofstream file;
    write_samples(open_out(path, file), s);
}

int cmd_density(const Flags& f, double s_max, double t_max, int points) {
    const PortfolioModel m = parse_model([&] {
        std::ifstream in(f.config);
        if (!in) throw ValidationError("cannot open " + f.config);
        return std::string(std::istreambuf_iterator<char>(in), {});
    }());
    if (m.size() < 2) throw ValidationError("density needs at least two dimensions");
    if (points < 1) throw ValidationError("--points must be at least 1");
    const JointDensity density(m.pair(0, 1));
    std::ofstream file;
    std::ostream& out = open_out(f.out, file);
    out << "s,t,density\n";
    char buf[96];
    for (int i = 1; i <= points; ++i)
        for (int j = 1; j <= points; ++j) {
            const double s = s_max * i / points, t = t_max * j / points;
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s, t, density(s, t));
            out << buf;
        }
    return 0;
}

int cmd_calibrate(const Flags& f) {
    const RunConfig cfg = load_run(f);
    CalibrationOptions co;
    co.method = cfg.calibration;
    const CalibratedCopula c = calibrate_cached(cfg.model, co, cfg.cache_path);
    nlohmann::json sigma = nlohmann::json::array();
    for (Eigen::Index i = 0; i < c.sigma.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < c.sigma.cols(); ++j) row.push_back(c.sigma(i, j));
        sigma.push_back(row);
    }
    const nlohmann::json doc = {{"sigma", sigma},
                                {"method", to_string(co.method)},
                                {"max_eigen_clip", c.repair.max_eigen_clip},
                                {"frobenius_shift", c.repair.frobenius_shift}};
    std::ofstream file;
    open_out(f.out, file) << doc.dump(2) << "\n";
    return 0;
}

int cmd_sample(const Flags& f, SamplingMethod method) {
    RunConfig cfg = load_run(f);
    cfg.method = method;
    cfg.output_path.clear();
    std::cerr << "sampling " << cfg.scenarios << " scenarios on " << thread_count() << " threads\n";
    const RunReport rep = run(cfg);
    if (rep.copula && rep.copula->repair.frobenius_shift > 0.0)
        std::cerr << "copula repaired, Frobenius shift " << rep.copula->repair.frobenius_shift << "\n";
    if (rep.stats.redraws > 0) std::cerr << "root selection redraws: " << rep.stats.redraws << "\n";
    std::cerr << format_probs(rep.probs);
    emit_samples(rep.samples, f.out);
    return 0;
}

int cmd_run(const Flags& f) {
    const RunConfig cfg = load_run(f);
    const RunReport rep = run(cfg);
    if (rep.copula)
        std::cerr << "copula Frobenius repair shift " << rep.copula->repair.frobenius_shift << "\n";
    if (rep.stats.redraws > 0) std::cerr << "root selection redraws: " << rep.stats.redraws << "\n";
    std::cout << format_probs(rep.probs);
    return 0;
}

int cmd_default_probs(const std::string& samples, double horizon) {
    std::cout << format_probs(default_probs(read_samples(samples), horizon));
    return 0;
}

int cmd_kstest(const Flags& f, const std::string& a, const std::string& b, int permutations) {
    const ExitTimeSamples sa = read_samples(a);
    if (!b.empty()) {
        KsOptions ko;
        ko.alpha = f.alpha;
        ko.permutations = permutations;
        if (f.seed) ko.seed = *f.seed;
        const KsReport r = ks_2sample_md(sa, read_samples(b), ko);
        std::printf("statistic %.6f p-value %.4f %s (finite rows %zu/%zu, excluded %zu/%zu)\n",
                    r.statistic, r.p_value, r.reject ? "reject H0" : "retain H0", r.n_a, r.n_b,
                    r.excluded_a, r.excluded_b);
        return 0;
    }
    if (f.config.empty()) throw ValidationError("kstest needs --b or --config");
    const RunConfig cfg = load_run(f);
    if (cfg.model.size() != sa.dims()) throw ValidationError("samples and config dimensions differ");
    for (std::size_t k = 0; k < sa.dims(); ++k) {
        std::vector<double> col;
        for (double t : sa.column(k))
            if (std::isfinite(t)) col.push_back(t);
        const auto& p = cfg.model.dims[k];
        const KsReport r = ks_1sample(col, [&](double t) { return marginal_cdf(p, t); }, f.alpha);
        std::printf("tau_%zu: statistic %.6f critical %.6f p-value %.4f %s\n", k + 1, r.statistic,
                    r.critical, r.p_value, r.reject ? "reject H0" : "retain H0");
    }
    return 0;
}

int cmd_reproduce(const Flags& f, int table) {
    ReproduceOptions o;
    if (f.n) o.scenarios = *f.n;
    if (f.seed) o.seed = *f.seed;
    if (f.step) o.ks_step = *f.step;
    o.alpha = f.alpha;
    o.calibration = parse_method(f.method);
    o.cache_path = f.cache;
    const TableReport r = reproduce(table, o);
    std::ofstream file;
    open_out(f.out, file) << format_report(r);
    return r.pass() ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"First-exit times of correlated Brownian motions"};
    app.require_subcommand(1);
    Flags f;

    auto* density = app.add_subcommand("density", "joint exit density of the first pair on a grid");
    add_common(density, f, true);
    double s_max = 20.0, t_max = 20.0;
    int points = 50;
    density->add_option("--s-max", s_max, "largest s");
    density->add_option("--t-max", t_max, "largest t");
    density->add_option("--points", points, "grid points per axis");

    auto* calibrate = app.add_subcommand("calibrate", "Gaussian copula correlation matrix");
    add_common(calibrate, f, true);
    calibrate->add_option("--method", f.method, "quadrature or euler_mc");
    calibrate->add_option("--cache", f.cache, "calibration cache file");

    auto* sample = app.add_subcommand("sample", "copula exit-time samples as CSV");
    add_common(sample, f, true);
    add_sampling(sample, f);
    sample->add_option("--method", f.method, "calibration method");
    sample->add_option("--cache", f.cache, "calibration cache file");

    auto* euler = app.add_subcommand("euler", "Euler baseline samples as CSV");
    add_common(euler, f, true);
    add_sampling(euler, f);
    euler->add_option("--step", f.step, "time step");

    auto* probs = app.add_subcommand("default-probs", "P_i from a samples file");
    std::string samples_path;
    double horizon = 10.0;
    probs->add_option("--samples", samples_path, "samples CSV")->required();
    probs->add_option("--horizon", horizon, "horizon T");

    auto* kstest = app.add_subcommand("kstest", "two-sample, or one-sample against the marginals");
    add_common(kstest, f, false);
    std::string a_path, b_path;
    int permutations = 199;
    kstest->add_option("--a", a_path, "samples CSV")->required();
    kstest->add_option("--b", b_path, "second samples CSV");
    kstest->add_option("--alpha", f.alpha, "significance level");
    kstest->add_option("--seed", f.seed, "permutation seed");
    kstest->add_option("--permutations", permutations, "permutation replicates");

    auto* repro = app.add_subcommand("reproduce", "recompute a reference table");
    int table = 2;
    repro->add_option("table", table, "table id 1-8")->required()->check(CLI::Range(1, 8));
    repro->add_option("--threads", f.threads, "worker threads, 0 = all cores");
    repro->add_option("--out", f.out, "report file");
    repro->add_option("--n", f.n, "scenarios");
    repro->add_option("--seed", f.seed, "random seed");
    repro->add_option("--step", f.step, "Euler step for table 1");
    repro->add_option("--alpha", f.alpha, "significance level for table 1");
    repro->add_option("--method", f.method, "calibration method");
    repro->add_option("--cache", f.cache, "calibration cache file");

    auto* runc = app.add_subcommand("run", "calibrate, sample and report P_i");
    add_common(runc, f, true);
    add_sampling(runc, f);
    runc->add_option("--step", f.step, "Euler step when the config method is euler");
    runc->add_option("--method", f.method, "calibration method");
    runc->add_option("--cache", f.cache, "calibration cache file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        set_thread_count(f.threads);
        if (*density) return cmd_density(f, s_max, t_max, points);
        if (*calibrate) return cmd_calibrate(f);
        if (*sample) return cmd_sample(f, SamplingMethod::copula);
        if (*euler) return cmd_sample(f, SamplingMethod::euler);
        if (*probs) return cmd_default_probs(samples_path, horizon);
        if (*kstest) return cmd_kstest(f, a_path, b_path, permutations);
        if (*repro) return cmd_reproduce(f, table);
        if (*runc) return cmd_run(f);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << " (estimate " << e.estimate() << ", error " << e.error() << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
