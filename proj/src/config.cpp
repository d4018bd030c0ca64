#include "fpt/config.hpp"

#include "fpt/errors.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace fpt {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double number(const json& obj, const char* key, const std::string& where, double fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) throw ValidationError(where + key + ": expected a number");
    return it->get<double>();
}

std::uint64_t count(const json& obj, const char* key, const std::string& where, std::uint64_t fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
        throw ValidationError(where + key + ": expected a non-negative integer");
    return it->get<std::uint64_t>();
}

std::string text(const json& obj, const char* key, const std::string& fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_string()) throw ValidationError(std::string(key) + ": expected a string");
    return it->get<std::string>();
}

PortfolioModel model_from(const json& doc) {
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");
    const auto dims = doc.find("dims");
    if (dims == doc.end() || !dims->is_array()) throw ValidationError("dims: expected an array");
    PortfolioModel m;
    for (std::size_t i = 0; i < dims->size(); ++i) {
        const json& d = (*dims)[i];
        const std::string where = "dims[" + std::to_string(i) + "].";
        if (!d.is_object()) throw ValidationError("dims[" + std::to_string(i) + "]: expected an object");
        for (const char* key : {"x0", "barrier"})
            if (!d.contains(key)) throw ValidationError(where + key + ": missing");
        DimensionParams p;
        p.mu = number(d, "mu", where, 0.0);
        p.sigma = number(d, "sigma", where, 1.0);
        p.x0 = number(d, "x0", where, 0.0);
        p.barrier = number(d, "barrier", where, 0.0);
        m.dims.push_back(p);
    }
    const auto n = static_cast<Eigen::Index>(m.dims.size());
    const auto corr = doc.find("corr");
    if (corr == doc.end() || !corr->is_array()) throw ValidationError("corr: expected an array of rows");
    if (static_cast<Eigen::Index>(corr->size()) != n)
        throw ValidationError("corr: expected " + std::to_string(n) + " rows");
    m.corr.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = (*corr)[i];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            throw ValidationError("corr[" + std::to_string(i) + "]: expected " + std::to_string(n) + " entries");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!row[j].is_number())
                throw ValidationError("corr[" + std::to_string(i) + "][" + std::to_string(j) + "]: expected a number");
            m.corr(i, j) = row[j].get<double>();
        }
    }
    m.validate();
    return m;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
}

void format_double(std::ostream& out, double v) {
    if (std::isinf(v)) {
        out << (v > 0 ? "inf" : "-inf");
        return;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

double parse_double(std::string_view field, std::size_t line) {
    if (field == "inf" || field == "+inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ValidationError("samples line " + std::to_string(line) + ": bad number '" +
                              std::string(field) + "'");
    return v;
}

}  // namespace

void RunConfig::validate() const {
    model.validate();
    if (scenarios < 1) throw ValidationError("scenarios: must be at least 1");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("horizon: must be positive");
    if (method == SamplingMethod::euler) euler.validate();
}

RunConfig parse_config(const std::string& text) {
    const json doc = parse_json(text);
    RunConfig cfg;
    cfg.model = model_from(doc);
    const std::string method = fpt::text(doc, "method", "copula");
    if (method == "copula") cfg.method = SamplingMethod::copula;
    else if (method == "euler") cfg.method = SamplingMethod::euler;
    else throw ValidationError("method: expected copula or euler, got '" + method + "'");
    cfg.calibration = parse_method(fpt::text(doc, "calibration", "quadrature"));
    cfg.scenarios = count(doc, "scenarios", "", cfg.scenarios);
    cfg.seed = count(doc, "seed", "", cfg.seed);
    cfg.horizon = number(doc, "horizon", "", cfg.horizon);
    cfg.euler.horizon = cfg.horizon;
    if (const auto e = doc.find("euler"); e != doc.end()) {
        if (!e->is_object()) throw ValidationError("euler: expected an object");
        cfg.euler.step = number(*e, "step", "euler.", cfg.euler.step);
        cfg.euler.horizon = number(*e, "horizon", "euler.", cfg.euler.horizon);
    }
    cfg.euler.scenarios = cfg.scenarios;
    cfg.euler.seed = cfg.seed;
    cfg.output_path = fpt::text(doc, "output", "");
    cfg.cache_path = fpt::text(doc, "cache", "");
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

PortfolioModel parse_model(const std::string& text) { return model_from(parse_json(text)); }

std::string serialize_config(const RunConfig& cfg) {
    json dims = json::array();
    for (const auto& d : cfg.model.dims)
        dims.push_back({{"mu", d.mu}, {"sigma", d.sigma}, {"x0", d.x0}, {"barrier", d.barrier}});
    json corr = json::array();
    for (Eigen::Index i = 0; i < cfg.model.corr.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < cfg.model.corr.cols(); ++j) row.push_back(cfg.model.corr(i, j));
        corr.push_back(row);
    }
    json doc = {{"dims", dims},
                {"corr", corr},
                {"method", cfg.method == SamplingMethod::copula ? "copula" : "euler"},
                {"calibration", to_string(cfg.calibration)},
                {"scenarios", cfg.scenarios},
                {"seed", cfg.seed},
                {"horizon", cfg.horizon},
                {"euler", {{"step", cfg.euler.step}, {"horizon", cfg.euler.horizon}}},
                {"output", cfg.output_path},
                {"cache", cfg.cache_path}};
    return doc.dump(2) + "\n";
}

void write_samples(std::ostream& out, const ExitTimeSamples& s) {
    for (std::size_t k = 0; k < s.dims(); ++k) out << (k ? "," : "") << "tau_" << (k + 1);
    out << "\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t k = 0; k < s.dims(); ++k) {
            if (k) out << ",";
            format_double(out, s(i, k));
        }
        out << "\n";
    }
}

void write_samples(const std::string& path, const ExitTimeSamples& s) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    write_samples(out, s);
}

ExitTimeSamples read_samples(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("samples file is empty");
    std::size_t dims = 1;
    for (char c : line) dims += c == ',';
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t fields = 0, start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string_view field(line.data() + start,
                                         (comma == std::string::npos ? line.size() : comma) - start);
            values.push_back(parse_double(field, lineno));
            ++fields;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields != dims)
            throw ValidationError("samples line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(dims) + " fields");
    }
    ExitTimeSamples s(values.size() / dims, dims);
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t k = 0; k < dims; ++k) s(i, k) = values[i * dims + k];
    return s;
}

ExitTimeSamples read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    return read_samples(in);
}

}  // namespace fpt
