#pragma once

// Run configuration: a JSON document with three lowercase sections,
//
//   {
//     "problem": { dimension, resolution, k, l, ftil, phi, phi_z, gamma0,
//                  [n, gamma, sign, box_lo, box_hi, ftil_z, beta,
//                   subsolution] },
//     "solver":  { [tol_r, tol_b, max_iterations, shrink, max_halvings,
//                   eps0, eps_shrink, eps_final, m_adm, relative_margin] },
//     "output":  { [report_path, field_dump, field_path, convergence_path] }
//   }
//
// parse_config validates every key (unknown keys are rejected), applies the
// documented defaults so the result echoes the full effective configuration,
// and parses all data expressions.  build_problem turns a RunConfig into a
// ready-to-solve ProblemSpec, evaluating expressions on the grid so that a
// bad configuration fails here and not mid-solve.

#include <hessquot/expression.hpp>
#include <hessquot/problem.hpp>
#include <hessquot/solver.hpp>

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hessquot {

/// Configuration rejection: names the offending field and the reason.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, const std::string& reason)
        : std::runtime_error(field.empty() ? reason : field + ": " + reason),
          field_(std::move(field)) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

struct ProblemConfig {
    int dimension = 0;
    std::vector<double> box_lo;  // size == dimension
    std::vector<double> box_hi;
    int resolution = 0;
    int n = 0;
    int k = 0;
    int l = 0;
    double gamma = 1.0;
    int sign = -1;
    std::string ftil;
    std::string ftil_z = "0";
    std::string phi;
    std::string phi_z;
    double gamma0 = 0.0;
    std::vector<std::string> beta;  // empty: inward unit normal
    std::string subsolution;        // empty: quadratic ansatz start

    friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

struct OutputConfig {
    std::string report_path = "report.json";
    bool field_dump = false;
    std::string field_path = "field.csv";
    std::string convergence_path = "convergence.csv";

    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
    ProblemConfig problem;
    SolverConfig solver;
    OutputConfig output;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail_config {

using json = nlohmann::ordered_json;

inline void require_keys(const json& obj, const std::string& section,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (item.key() == a) known = true;
        if (!known) throw ConfigError(section + "." + item.key(), "unknown key");
    }
}

inline const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

inline int get_int(const json& obj, const std::string& section, const char* key,
                   std::optional<int> fallback = std::nullopt) {
    const json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError(section + "." + key, "required key is missing");
    }
    if (!v->is_number_integer()) throw ConfigError(section + "." + key, "expected an integer");
    return v->get<int>();
}

inline double get_double(const json& obj, const std::string& section, const char* key,
                         std::optional<double> fallback = std::nullopt) {
    const json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError(section + "." + key, "required key is missing");
    }
    if (!v->is_number()) throw ConfigError(section + "." + key, "expected a number");
    return v->get<double>();
}

inline bool get_bool(const json& obj, const std::string& section, const char* key,
                     bool fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(section + "." + key, "expected true or false");
    return v->get<bool>();
}

inline std::string get_string(const json& obj, const std::string& section, const char* key,
                              std::optional<std::string> fallback = std::nullopt) {
    const json* v = find(obj, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError(section + "." + key, "required key is missing");
    }
    if (!v->is_string()) throw ConfigError(section + "." + key, "expected a string");
    return v->get<std::string>();
}

inline std::vector<double> get_double_array(const json& obj, const std::string& section,
                                            const char* key, int size,
                                            std::vector<double> fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_array() || int(v->size()) != size)
        throw ConfigError(section + "." + key,
                          "expected an array of " + std::to_string(size) + " numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(section + "." + key, "expected numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

inline expr::Expression parse_expression(const std::string& text, const std::string& field,
                                         const expr::VariableSet& vars) {
    try {
        return expr::Expression::parse(text, vars);
    } catch (const expr::ExpressionError& e) {
        throw ConfigError(field, e.what());
    }
}

}  // namespace detail_config

/// Parse and validate a configuration document.  Unknown keys are rejected;
/// defaults are applied so the returned value is the complete effective
/// configuration; operator and expression rules are enforced here.
inline RunConfig parse_config(const std::string& text) {
    using detail_config::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("syntax error: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("", "top level must be an object");
    detail_config::require_keys(doc, "config", {"problem", "solver", "output"});

    const json* prob = detail_config::find(doc, "problem");
    if (!prob) throw ConfigError("problem", "required section is missing");
    if (!prob->is_object()) throw ConfigError("problem", "expected an object");
    detail_config::require_keys(
        *prob, "problem",
        {"dimension", "box_lo", "box_hi", "resolution", "n", "k", "l", "gamma", "sign", "ftil",
         "ftil_z", "phi", "phi_z", "gamma0", "beta", "subsolution"});

    RunConfig cfg;
    ProblemConfig& p = cfg.problem;
    p.dimension = detail_config::get_int(*prob, "problem", "dimension");
    if (p.dimension != 2 && p.dimension != 3)
        throw ConfigError("problem.dimension", "must be 2 or 3");
    p.resolution = detail_config::get_int(*prob, "problem", "resolution");
    if (p.resolution < 2) throw ConfigError("problem.resolution", "must be at least 2");
    p.box_lo = detail_config::get_double_array(*prob, "problem", "box_lo", p.dimension,
                                               std::vector<double>(p.dimension, 0.0));
    p.box_hi = detail_config::get_double_array(*prob, "problem", "box_hi", p.dimension,
                                               std::vector<double>(p.dimension, 1.0));
    for (int a = 0; a < p.dimension; ++a)
        if (!(p.box_hi[a] > p.box_lo[a]))
            throw ConfigError("problem.box_hi", "box extents must be positive on every axis");
    p.n = detail_config::get_int(*prob, "problem", "n", p.dimension);
    if (p.n != p.dimension)
        throw ConfigError("problem.n", "operator dimension must match the grid dimension");
    p.k = detail_config::get_int(*prob, "problem", "k");
    p.l = detail_config::get_int(*prob, "problem", "l");
    p.gamma = detail_config::get_double(*prob, "problem", "gamma", 1.0);
    p.sign = detail_config::get_int(*prob, "problem", "sign", -1);
    try {
        OperatorSpec probe(p.n, p.k, p.l, p.gamma, p.sign);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("problem", e.what());
    }
    p.gamma0 = detail_config::get_double(*prob, "problem", "gamma0");
    if (!(p.gamma0 > 0.0)) throw ConfigError("problem.gamma0", "must be positive");

    p.ftil = detail_config::get_string(*prob, "problem", "ftil");
    p.ftil_z = detail_config::get_string(*prob, "problem", "ftil_z", std::string("0"));
    p.phi = detail_config::get_string(*prob, "problem", "phi");
    p.phi_z = detail_config::get_string(*prob, "problem", "phi_z");
    const auto interior = expr::VariableSet::interior(p.dimension);
    const auto boundary = expr::VariableSet::boundary(p.dimension);
    detail_config::parse_expression(p.ftil, "problem.ftil", interior);
    detail_config::parse_expression(p.ftil_z, "problem.ftil_z", interior);
    detail_config::parse_expression(p.phi, "problem.phi", boundary);
    detail_config::parse_expression(p.phi_z, "problem.phi_z", boundary);

    if (const auto* b = detail_config::find(*prob, "beta")) {
        if (!b->is_array() || int(b->size()) != p.dimension)
            throw ConfigError("problem.beta", "expected an array of " +
                                                  std::to_string(p.dimension) + " expressions");
        for (const auto& comp : *b) {
            if (!comp.is_string()) throw ConfigError("problem.beta", "expected strings");
            p.beta.push_back(comp.get<std::string>());
            detail_config::parse_expression(p.beta.back(), "problem.beta",
                                            expr::VariableSet::direction(p.dimension));
        }
    }
    if (const auto* s = detail_config::find(*prob, "subsolution")) {
        if (!s->is_string()) throw ConfigError("problem.subsolution", "expected a string");
        p.subsolution = s->get<std::string>();
        detail_config::parse_expression(p.subsolution, "problem.subsolution",
                                        expr::VariableSet::field(p.dimension));
    }

    if (const json* sol = detail_config::find(doc, "solver")) {
        if (!sol->is_object()) throw ConfigError("solver", "expected an object");
        detail_config::require_keys(*sol, "solver",
                                    {"tol_r", "tol_b", "max_iterations", "shrink", "max_halvings",
                                     "eps0", "eps_shrink", "eps_final", "m_adm",
                                     "relative_margin"});
        SolverConfig& s = cfg.solver;
        s.tol_r = detail_config::get_double(*sol, "solver", "tol_r", s.tol_r);
        s.tol_b = detail_config::get_double(*sol, "solver", "tol_b", s.tol_b);
        s.max_iterations = detail_config::get_int(*sol, "solver", "max_iterations",
                                                  s.max_iterations);
        s.shrink = detail_config::get_double(*sol, "solver", "shrink", s.shrink);
        s.max_halvings = detail_config::get_int(*sol, "solver", "max_halvings", s.max_halvings);
        s.eps0 = detail_config::get_double(*sol, "solver", "eps0", s.eps0);
        s.eps_shrink = detail_config::get_double(*sol, "solver", "eps_shrink", s.eps_shrink);
        s.eps_final = detail_config::get_double(*sol, "solver", "eps_final", s.eps_final);
        s.m_adm = detail_config::get_double(*sol, "solver", "m_adm", s.m_adm);
        s.relative_margin = detail_config::get_bool(*sol, "solver", "relative_margin",
                                                    s.relative_margin);
    }
    try {
        cfg.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("solver", e.what());
    }

    if (const json* out = detail_config::find(doc, "output")) {
        if (!out->is_object()) throw ConfigError("output", "expected an object");
        detail_config::require_keys(*out, "output",
                                    {"report_path", "field_dump", "field_path",
                                     "convergence_path"});
        OutputConfig& o = cfg.output;
        o.report_path = detail_config::get_string(*out, "output", "report_path", o.report_path);
        o.field_dump = detail_config::get_bool(*out, "output", "field_dump", o.field_dump);
        o.field_path = detail_config::get_string(*out, "output", "field_path", o.field_path);
        o.convergence_path = detail_config::get_string(*out, "output", "convergence_path",
                                                       o.convergence_path);
    }
    return cfg;
}

/// Serialize the complete effective configuration.  parse_config of the
/// result reproduces the RunConfig exactly (round-trip identity); optional
/// expressions are emitted only when set.
inline std::string serialize_config(const RunConfig& cfg) {
    using detail_config::json;
    json prob;
    prob["dimension"] = cfg.problem.dimension;
    prob["box_lo"] = cfg.problem.box_lo;
    prob["box_hi"] = cfg.problem.box_hi;
    prob["resolution"] = cfg.problem.resolution;
    prob["n"] = cfg.problem.n;
    prob["k"] = cfg.problem.k;
    prob["l"] = cfg.problem.l;
    prob["gamma"] = cfg.problem.gamma;
    prob["sign"] = cfg.problem.sign;
    prob["ftil"] = cfg.problem.ftil;
    prob["ftil_z"] = cfg.problem.ftil_z;
    prob["phi"] = cfg.problem.phi;
    prob["phi_z"] = cfg.problem.phi_z;
    prob["gamma0"] = cfg.problem.gamma0;
    if (!cfg.problem.beta.empty()) prob["beta"] = cfg.problem.beta;
    if (!cfg.problem.subsolution.empty()) prob["subsolution"] = cfg.problem.subsolution;

    json sol;
    sol["tol_r"] = cfg.solver.tol_r;
    sol["tol_b"] = cfg.solver.tol_b;
    sol["max_iterations"] = cfg.solver.max_iterations;
    sol["shrink"] = cfg.solver.shrink;
    sol["max_halvings"] = cfg.solver.max_halvings;
    sol["eps0"] = cfg.solver.eps0;
    sol["eps_shrink"] = cfg.solver.eps_shrink;
    sol["eps_final"] = cfg.solver.eps_final;
    sol["m_adm"] = cfg.solver.m_adm;
    sol["relative_margin"] = cfg.solver.relative_margin;

    json out;
    out["report_path"] = cfg.output.report_path;
    out["field_dump"] = cfg.output.field_dump;
    out["field_path"] = cfg.output.field_path;
    out["convergence_path"] = cfg.output.convergence_path;

    json doc;
    doc["problem"] = std::move(prob);
    doc["solver"] = std::move(sol);
    doc["output"] = std::move(out);
    return doc.dump(2) + "\n";
}

/// Build the solvable problem a configuration describes.  Expression data
/// are bound into the problem's callbacks; every construction-time failure
/// (grid geometry, oblique field, data sampling, subsolution finiteness) is
/// reported as a ConfigError.
inline ProblemSpec build_problem(const RunConfig& cfg) {
    const ProblemConfig& p = cfg.problem;
    const auto interior = expr::VariableSet::interior(p.dimension);
    const auto boundary = expr::VariableSet::boundary(p.dimension);
    const expr::Expression ftil = expr::Expression::parse(p.ftil, interior);
    const expr::Expression ftil_z = expr::Expression::parse(p.ftil_z, interior);
    const expr::Expression phi = expr::Expression::parse(p.phi, boundary);
    const expr::Expression phi_z = expr::Expression::parse(p.phi_z, boundary);

    Eigen::Vector3d lo = Eigen::Vector3d::Zero(), hi = Eigen::Vector3d::Zero();
    for (int a = 0; a < p.dimension; ++a) {
        lo[a] = p.box_lo[a];
        hi[a] = p.box_hi[a];
    }

    ObliqueField field = normal_oblique_field();
    if (!p.beta.empty()) {
        std::vector<expr::Expression> comps;
        for (const std::string& c : p.beta)
            comps.push_back(
                expr::Expression::parse(c, expr::VariableSet::direction(p.dimension)));
        field = [comps](const Eigen::Vector3d& x, const Eigen::Vector3d& nu) {
            expr::Scope s;
            s.x = x;
            s.nu = nu;
            Eigen::Vector3d b = Eigen::Vector3d::Zero();
            for (std::size_t i = 0; i < comps.size(); ++i) b[int(i)] = comps[i](s);
            return b;
        };
    }

    try {
        auto grid = GridDomain::box(p.dimension, lo, hi, p.resolution, field);
        std::optional<ScalarField> seed;
        if (!p.subsolution.empty()) {
            const expr::Expression ubar =
                expr::Expression::parse(p.subsolution, expr::VariableSet::field(p.dimension));
            seed = sample(grid, [ubar](const Eigen::Vector3d& x) {
                expr::Scope s;
                s.x = x;
                return ubar(s);
            });
        }
        return ProblemSpec(
            grid, OperatorSpec(p.n, p.k, p.l, p.gamma, p.sign),
            [ftil](const Eigen::Vector3d& x, double z) {
                expr::Scope s;
                s.x = x;
                s.z = z;
                return ftil(s);
            },
            [ftil_z](const Eigen::Vector3d& x, double z) {
                expr::Scope s;
                s.x = x;
                s.z = z;
                return ftil_z(s);
            },
            [phi](const Eigen::Vector3d& x, double z, const Eigen::Vector3d& nu) {
                expr::Scope s;
                s.x = x;
                s.z = z;
                s.nu = nu;
                return phi(s);
            },
            [phi_z](const Eigen::Vector3d& x, double z, const Eigen::Vector3d& nu) {
                expr::Scope s;
                s.x = x;
                s.z = z;
                s.nu = nu;
                return phi_z(s);
            },
            p.gamma0, std::move(seed));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("problem", e.what());
    }
}

}  // namespace hessquot
