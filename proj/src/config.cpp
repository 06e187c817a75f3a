#include "satstab/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "satstab/errors.hpp"

namespace satstab {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    require(obj.is_object(), std::string(where) + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) {
            ok = ok || key == a;
        }
        require(ok, "unknown key '" + key + "' in " + std::string(where));
    }
}

double number(const json& v, std::string_view name) {
    require(v.is_number(), std::string(name) + " must be a number");
    const double d = v.get<double>();
    require(std::isfinite(d), std::string(name) + " must be finite");
    return d;
}

std::vector<double> numbers(const json& v, std::string_view name) {
    require(v.is_array(), std::string(name) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        out.push_back(number(e, name));
    }
    return out;
}

Eigen::MatrixXd matrix(const json& v, std::string_view name) {
    require(v.is_array() && !v.empty(), std::string(name) + " must be a nonempty array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    const auto cols = static_cast<Eigen::Index>(numbers(v[0], name).size());
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto r = numbers(v[static_cast<std::size_t>(i)], name);
        require(static_cast<Eigen::Index>(r.size()) == cols, std::string(name) + " rows differ in length");
        for (Eigen::Index j = 0; j < cols; ++j) {
            M(i, j) = r[static_cast<std::size_t>(j)];
        }
    }
    return M;
}

json matrix_json(const Eigen::MatrixXd& M) {
    json out = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            row.push_back(M(i, j));
        }
        out.push_back(row);
    }
    return out;
}

} // namespace

void ExperimentConfig::validate() const {
    require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0 (got " + std::to_string(lambda) + ")");
    require(std::isfinite(length) && length > 0.0, "length must be > 0");
    require(delta >= 0.0 && nu >= 0.0, "delta and nu must be >= 0");
    ell.validate();
    require(dt > 0.0, "dt must be > 0");
    require(T >= 0.0, "T must be >= 0");
    for (const auto& a : actuators) {
        a.validate(length);
    }
    if (mode == ModalMode::Boundary) {
        require(bc == BoundaryCondition::Clamped, "boundary mode requires bc = clamped");
        require(delta == 0.0 && nu == 0.0, "boundary mode is linear: delta and nu must be 0");
    }
    require(synthesis.q > 0.0 && synthesis.r > 0.0, "lqr weights must be > 0");
    if (initial.modal.empty()) {
        require(initial.preset == "mode1" || initial.preset == "unstable" || initial.preset == "bump",
                "initial.preset must be mode1, unstable or bump");
        require(std::isfinite(initial.amplitude), "initial.amplitude must be finite");
    }
}

ExperimentConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(doc, "config",
                   {"bc", "mode", "lambda", "length", "delta", "nu", "ell", "actuators", "synthesis", "J", "dt",
                    "T", "initial", "seed", "output"});
    ExperimentConfig cfg;
    if (doc.contains("bc")) {
        require(doc["bc"].is_string(), "bc must be a string");
        cfg.bc = parse_boundary_condition(doc["bc"].get<std::string>());
    }
    if (doc.contains("mode")) {
        require(doc["mode"].is_string(), "mode must be a string");
        const auto m = doc["mode"].get<std::string>();
        require(m == "internal" || m == "boundary", "mode must be 'internal' or 'boundary'");
        cfg.mode = m == "internal" ? ModalMode::Internal : ModalMode::Boundary;
    }
    if (doc.contains("lambda")) cfg.lambda = number(doc["lambda"], "lambda");
    if (doc.contains("length")) cfg.length = number(doc["length"], "length");
    if (doc.contains("delta")) cfg.delta = number(doc["delta"], "delta");
    if (doc.contains("nu")) cfg.nu = number(doc["nu"], "nu");
    if (doc.contains("ell")) {
        const json& e = doc["ell"];
        if (e.is_string()) {
            require(e.get<std::string>() == "inf", "ell must be a number or \"inf\"");
            cfg.ell = SaturationLevel::unbounded();
        } else {
            cfg.ell.ell = number(e, "ell");
        }
    }
    if (doc.contains("actuators")) {
        require(doc["actuators"].is_array(), "actuators must be an array");
        for (const auto& a : doc["actuators"]) {
            reject_unknown(a, "actuator", {"indicator", "modes"});
            require(a.size() == 1, "each actuator needs exactly one of indicator/modes");
            if (a.contains("indicator")) {
                const auto ab = numbers(a["indicator"], "indicator");
                require(ab.size() == 2, "indicator must be [a, b]");
                cfg.actuators.push_back(ActuatorShape::indicator(ab[0], ab[1]));
            } else {
                cfg.actuators.push_back(ActuatorShape::mode_combination(numbers(a["modes"], "modes")));
            }
        }
    }
    if (doc.contains("synthesis")) {
        const json& s = doc["synthesis"];
        reject_unknown(s, "synthesis", {"poles", "lqr", "P", "D", "C"});
        require(!(s.contains("poles") && s.contains("lqr")), "synthesis takes poles or lqr, not both");
        if (s.contains("poles")) cfg.synthesis.poles = numbers(s["poles"], "poles");
        if (s.contains("lqr")) {
            reject_unknown(s["lqr"], "synthesis.lqr", {"q", "r"});
            cfg.synthesis.lqr = true;
            if (s["lqr"].contains("q")) cfg.synthesis.q = number(s["lqr"]["q"], "lqr.q");
            if (s["lqr"].contains("r")) cfg.synthesis.r = number(s["lqr"]["r"], "lqr.r");
        }
        require(s.contains("P") == s.contains("D"), "synthesis.P and synthesis.D must be given together");
        if (s.contains("P")) cfg.synthesis.P = matrix(s["P"], "synthesis.P");
        if (s.contains("D")) {
            const auto d = numbers(s["D"], "synthesis.D");
            cfg.synthesis.D = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
        }
        if (s.contains("C")) cfg.synthesis.C = matrix(s["C"], "synthesis.C");
    }
    if (doc.contains("J")) {
        require(doc["J"].is_number_integer() && doc["J"].get<long long>() >= 0, "J must be a nonnegative integer");
        cfg.J = doc["J"].get<std::size_t>();
    }
    if (doc.contains("dt")) cfg.dt = number(doc["dt"], "dt");
    if (doc.contains("T")) cfg.T = number(doc["T"], "T");
    if (doc.contains("initial")) {
        const json& in = doc["initial"];
        reject_unknown(in, "initial", {"modal", "preset", "amplitude"});
        require(!(in.contains("modal") && in.contains("preset")), "initial takes modal or preset, not both");
        if (in.contains("modal")) {
            cfg.initial.modal = numbers(in["modal"], "initial.modal");
            require(!cfg.initial.modal.empty(), "initial.modal must not be empty");
            require(!in.contains("amplitude"), "initial.amplitude only applies to presets");
        }
        if (in.contains("preset")) {
            require(in["preset"].is_string(), "initial.preset must be a string");
            cfg.initial.preset = in["preset"].get<std::string>();
        }
        if (in.contains("amplitude")) cfg.initial.amplitude = number(in["amplitude"], "initial.amplitude");
    }
    if (doc.contains("seed")) {
        require(doc["seed"].is_number_unsigned(), "seed must be a nonnegative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("output")) {
        reject_unknown(doc["output"], "output", {"dir"});
        if (doc["output"].contains("dir")) {
            require(doc["output"]["dir"].is_string(), "output.dir must be a string");
            cfg.output_dir = doc["output"]["dir"].get<std::string>();
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json doc;
    doc["bc"] = std::string(to_string(cfg.bc));
    doc["mode"] = cfg.mode == ModalMode::Internal ? "internal" : "boundary";
    doc["lambda"] = cfg.lambda;
    doc["length"] = cfg.length;
    doc["delta"] = cfg.delta;
    doc["nu"] = cfg.nu;
    if (cfg.ell.is_infinite()) {
        doc["ell"] = "inf";
    } else {
        doc["ell"] = cfg.ell.ell;
    }
    doc["actuators"] = json::array();
    for (const auto& a : cfg.actuators) {
        if (a.kind == ActuatorShape::Kind::Indicator) {
            doc["actuators"].push_back({{"indicator", {a.a, a.b}}});
        } else {
            doc["actuators"].push_back({{"modes", a.coefficients}});
        }
    }
    json s = json::object();
    if (cfg.synthesis.lqr) {
        s["lqr"] = {{"q", cfg.synthesis.q}, {"r", cfg.synthesis.r}};
    } else {
        s["poles"] = cfg.synthesis.poles;
    }
    if (cfg.synthesis.P) s["P"] = matrix_json(*cfg.synthesis.P);
    if (cfg.synthesis.D) s["D"] = std::vector<double>(cfg.synthesis.D->begin(), cfg.synthesis.D->end());
    if (cfg.synthesis.C) s["C"] = matrix_json(*cfg.synthesis.C);
    doc["synthesis"] = s;
    doc["J"] = cfg.J;
    doc["dt"] = cfg.dt;
    doc["T"] = cfg.T;
    if (!cfg.initial.modal.empty()) {
        doc["initial"] = {{"modal", cfg.initial.modal}};
    } else {
        doc["initial"] = {{"preset", cfg.initial.preset}, {"amplitude", cfg.initial.amplitude}};
    }
    doc["seed"] = cfg.seed;
    doc["output"] = {{"dir", cfg.output_dir}};
    return doc.dump(2);
}

void apply_env_overrides(ExperimentConfig& cfg) {
    if (const char* s = std::getenv("SATSTAB_SEED"); s != nullptr && *s != '\0') {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s, &end, 10);
        require(end != nullptr && *end == '\0', std::string("SATSTAB_SEED is not an integer: ") + s);
        cfg.seed = v;
    }
}

} // namespace satstab
