#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "convergence_lab.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"
#include "relaxer.hpp"

namespace nlx {

// ---------------------------------------------------------------------------
// Run configuration: one JSON file describes kernel, domain, field, sweep and
// audit parameters.  Parsing is lossless and strict: every key must be known.
// ---------------------------------------------------------------------------

struct RunConfig {
    KernelPair pair = make_prototype_pair();
    std::string kernel_id = "ball_abs+ball_linear";
    BoxDomain domain{vec3{0, 0, 0}, vec3{1, 1, 1}, {32, 32, 32}};
    FieldSpec field{.family = "helix"};
    std::vector<double> eps;

    std::vector<double> deltas{0.5, 0.25, 0.125};
    std::array<vec3, 3> cone_dirs{vec3{1, 0, 0}, vec3{0, 1, 0}, vec3{0, 0, 1}};
    double cone_aperture = 0.05;
    double delta_squared = 0.5;
    double recovery_tolerance = 0.08;
    double rate_noise_floor = 0;
    HypothesisTolerances hyp_tol;
    QuadratureSpec quadrature;

    RelaxConfig relax;
    bool has_relax = false;

    std::string out_dir = ".";
    int threads = 0;  // 0 = library default
    bool csv_timing = false;
};

namespace detail {

using nlohmann::json;

// Tracks which keys were consumed; anything left over is a config error.
class strict_object {
  public:
    strict_object(const json& j, std::string context) : j_(j), ctx_(std::move(context)) {
        if (!j.is_object()) throw config_error(ctx_ + " must be a JSON object");
    }
    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    const json& require(const std::string& key) {
        const json* p = get(key);
        if (!p) throw config_error(ctx_ + " is missing required key '" + key + "'");
        return *p;
    }
    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key))
                throw config_error("unknown key '" + key + "' in " + ctx_);
    }

  private:
    const json& j_;
    std::string ctx_;
    std::set<std::string> seen_;
};

inline double as_double(const json& j, const std::string& ctx) {
    if (!j.is_number()) throw config_error(ctx + " must be a number");
    return j.get<double>();
}

inline int as_int(const json& j, const std::string& ctx) {
    if (!j.is_number_integer()) throw config_error(ctx + " must be an integer");
    return j.get<int>();
}

inline bool as_bool(const json& j, const std::string& ctx) {
    if (!j.is_boolean()) throw config_error(ctx + " must be a boolean");
    return j.get<bool>();
}

inline std::string as_string(const json& j, const std::string& ctx) {
    if (!j.is_string()) throw config_error(ctx + " must be a string");
    return j.get<std::string>();
}

inline vec3 as_vec3(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 3) throw config_error(ctx + " must be an array of 3 numbers");
    return {as_double(j[0], ctx), as_double(j[1], ctx), as_double(j[2], ctx)};
}

inline mat3 as_mat3(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 3) throw config_error(ctx + " must be 3 rows of 3 numbers");
    mat3 m;
    for (int r = 0; r < 3; ++r) {
        vec3 row = as_vec3(j[r], ctx);
        m(r, 0) = row.x;
        m(r, 1) = row.y;
        m(r, 2) = row.z;
    }
    return m;
}

inline std::vector<double> as_double_list(const json& j, const std::string& ctx) {
    if (!j.is_array()) throw config_error(ctx + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(as_double(v, ctx));
    return out;
}

inline void parse_kernel(const json& j, RunConfig& cfg) {
    strict_object o(j, "kernel");
    if (const json* p = o.get("pair")) {
        std::string id = as_string(*p, "kernel.pair");
        if (id != "prototype") throw config_error("unknown kernel pair id: " + id);
        cfg.pair = make_prototype_pair();
        o.finish();
        cfg.kernel_id = cfg.pair.rho.name + "+" + cfg.pair.nu.name;
        return;
    }
    cfg.pair.rho = make_symmetric_profile(as_string(o.require("rho"), "kernel.rho"));
    const json& nu = o.require("nu");
    if (nu.is_string()) {
        std::string id = nu.get<std::string>();
        if (id != "ball_linear") throw config_error("unknown vector kernel profile: " + id);
        cfg.pair.nu = make_ball_linear();
    } else {
        strict_object t(nu, "kernel.nu");
        std::string path = as_string(t.require("table"), "kernel.nu.table");
        bool anti = true, normalize = true;
        if (const json* p = t.get("antisymmetrize")) anti = as_bool(*p, "kernel.nu.antisymmetrize");
        if (const json* p = t.get("normalize")) normalize = as_bool(*p, "kernel.nu.normalize");
        t.finish();
        cfg.pair.nu = make_custom_odd(load_vector_table(path), anti, normalize, cfg.quadrature);
    }
    o.finish();
    cfg.kernel_id = cfg.pair.rho.name + "+" + cfg.pair.nu.name;
}

inline void parse_domain(const json& j, RunConfig& cfg) {
    strict_object o(j, "domain");
    vec3 corner{0, 0, 0}, sides{1, 1, 1};
    std::array<int, 3> res{32, 32, 32};
    if (const json* p = o.get("corner")) corner = as_vec3(*p, "domain.corner");
    if (const json* p = o.get("sides")) sides = as_vec3(*p, "domain.sides");
    if (const json* p = o.get("resolution")) {
        if (!p->is_array() || p->size() != 3)
            throw config_error("domain.resolution must be an array of 3 integers");
        for (int a = 0; a < 3; ++a) res[a] = as_int((*p)[a], "domain.resolution");
    }
    o.finish();
    try {
        cfg.domain = BoxDomain(corner, sides, res);
    } catch (const input_error& e) {
        throw config_error(std::string("domain: ") + e.what());
    }
}

inline void parse_field(const json& j, RunConfig& cfg) {
    strict_object o(j, "field");
    FieldSpec s;
    s.family = as_string(o.require("family"), "field.family");
    if (s.family == "constant") {
        s.on_sphere = true;
        if (const json* p = o.get("value")) s.c = as_vec3(*p, "field.value");
        if (const json* p = o.get("on_sphere")) s.on_sphere = as_bool(*p, "field.on_sphere");
    } else if (s.family == "linear") {
        s.on_sphere = false;
        if (const json* p = o.get("matrix")) s.A = as_mat3(*p, "field.matrix");
        if (const json* p = o.get("on_sphere")) s.on_sphere = as_bool(*p, "field.on_sphere");
    } else if (s.family == "helix") {
        if (const json* p = o.get("k")) s.k = as_double(*p, "field.k");
        if (const json* p = o.get("axis")) s.axis = as_int(*p, "field.axis");
    } else if (s.family == "skyrmion_bubble") {
        if (const json* p = o.get("radius")) s.radius = as_double(*p, "field.radius");
        if (const json* p = o.get("chirality")) s.chirality = as_double(*p, "field.chirality");
    } else if (s.family == "random_bandlimited") {
        s.on_sphere = true;
        if (const json* p = o.get("seed")) {
            if (!p->is_number_integer() || p->get<long long>() < 0)
                throw config_error("field.seed must be a nonnegative integer");
            s.seed = p->get<std::uint64_t>();
        }
        if (const json* p = o.get("max_frequency")) s.max_frequency = as_int(*p, "field.max_frequency");
        if (const json* p = o.get("on_sphere")) s.on_sphere = as_bool(*p, "field.on_sphere");
    } else {
        throw config_error("unknown field family: " + s.family);
    }
    o.finish();
    cfg.field = s;
}

inline void parse_audit(const json& j, RunConfig& cfg) {
    strict_object o(j, "audit");
    if (const json* p = o.get("deltas")) cfg.deltas = as_double_list(*p, "audit.deltas");
    if (const json* p = o.get("cone_directions")) {
        if (!p->is_array() || p->size() != 3)
            throw config_error("audit.cone_directions must be 3 unit vectors");
        for (int c = 0; c < 3; ++c) cfg.cone_dirs[c] = as_vec3((*p)[c], "audit.cone_directions");
    }
    if (const json* p = o.get("cone_aperture"))
        cfg.cone_aperture = as_double(*p, "audit.cone_aperture");
    if (const json* p = o.get("delta_squared"))
        cfg.delta_squared = as_double(*p, "audit.delta_squared");
    o.finish();
}

inline void parse_tolerances(const json& j, RunConfig& cfg) {
    strict_object o(j, "tolerances");
    auto opt = [&](const char* key, double& slot) {
        if (const json* p = o.get(key)) slot = as_double(*p, std::string("tolerances.") + key);
    };
    opt("mass", cfg.hyp_tol.mass);
    opt("nonneg", cfg.hyp_tol.nonneg);
    opt("odd", cfg.hyp_tol.odd);
    opt("tail", cfg.hyp_tol.tail);
    opt("cone", cfg.hyp_tol.cone);
    opt("kappa", cfg.hyp_tol.kappa);
    opt("dzyalo_step", cfg.hyp_tol.dzyalo_step);
    opt("colnorm_slack", cfg.hyp_tol.colnorm_slack);
    opt("ratio_max", cfg.hyp_tol.ratio_max);
    opt("ratio_variation", cfg.hyp_tol.ratio_variation);
    opt("recovery", cfg.recovery_tolerance);
    opt("rate_noise_floor", cfg.rate_noise_floor);
    o.finish();
}

inline void parse_quadrature(const json& j, RunConfig& cfg) {
    strict_object o(j, "quadrature");
    if (const json* p = o.get("rule")) {
        std::string r = as_string(*p, "quadrature.rule");
        if (r == "spherical")
            cfg.quadrature.rule = QuadratureSpec::Rule::spherical;
        else if (r == "cartesian")
            cfg.quadrature.rule = QuadratureSpec::Rule::cartesian;
        else
            throw config_error("quadrature.rule must be 'spherical' or 'cartesian'");
    }
    if (const json* p = o.get("radial")) cfg.quadrature.n_r = as_int(*p, "quadrature.radial");
    if (const json* p = o.get("polar")) cfg.quadrature.n_theta = as_int(*p, "quadrature.polar");
    if (const json* p = o.get("azimuthal"))
        cfg.quadrature.n_phi = as_int(*p, "quadrature.azimuthal");
    if (const json* p = o.get("cartesian_points"))
        cfg.quadrature.n_cart = as_int(*p, "quadrature.cartesian_points");
    o.finish();
}

inline void parse_relax(const json& j, RunConfig& cfg) {
    strict_object o(j, "relax");
    RelaxConfig r;
    r.pair = cfg.pair;
    std::string energy = as_string(o.require("energy"), "relax.energy");
    if (energy == "nonlocal")
        r.selector = RelaxConfig::Energy::nonlocal;
    else if (energy == "local")
        r.selector = RelaxConfig::Energy::local;
    else
        throw config_error("relax.energy must be 'nonlocal' or 'local'");
    if (const json* p = o.get("eps")) r.eps = as_double(*p, "relax.eps");
    if (const json* p = o.get("anisotropy")) {
        if (p->is_string()) {
            if (p->get<std::string>() != "isotropic")
                throw config_error("relax.anisotropy must be 'isotropic' or a 3x3 matrix");
            r.A = AnisotropyMatrix::isotropic();
        } else {
            try {
                r.A = AnisotropyMatrix::from(as_mat3(*p, "relax.anisotropy"));
            } catch (const input_error& e) {
                throw config_error(std::string("relax.anisotropy: ") + e.what());
            }
        }
    }
    if (const json* p = o.get("coupling")) {
        if (p->is_string()) {
            if (p->get<std::string>() != "diagonal_third")
                throw config_error("relax.coupling must be 'diagonal_third' or a 3x3 matrix");
            r.D = DzyaloshinskiiMatrix::diagonal(1.0 / 3.0);
        } else {
            mat3 M = as_mat3(*p, "relax.coupling");
            try {
                r.D = DzyaloshinskiiMatrix::from({M.col(0), M.col(1), M.col(2)});
            } catch (const input_error& e) {
                throw config_error(std::string("relax.coupling: ") + e.what());
            }
        }
    }
    if (const json* p = o.get("well_strength"))
        r.well_strength = as_double(*p, "relax.well_strength");
    if (const json* p = o.get("max_iterations"))
        r.max_iterations = as_int(*p, "relax.max_iterations");
    if (const json* p = o.get("initial_step")) r.initial_step = as_double(*p, "relax.initial_step");
    if (const json* p = o.get("backtracking_factor"))
        r.backtracking_factor = as_double(*p, "relax.backtracking_factor");
    if (const json* p = o.get("armijo_constant"))
        r.armijo_constant = as_double(*p, "relax.armijo_constant");
    if (const json* p = o.get("gradient_tolerance"))
        r.gradient_tolerance = as_double(*p, "relax.gradient_tolerance");
    o.finish();
    try {
        r.validate();
    } catch (const input_error& e) {
        throw config_error(std::string("relax: ") + e.what());
    }
    cfg.relax = r;
    cfg.has_relax = true;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    detail::strict_object o(j, "config");
    RunConfig cfg;
    // quadrature first: kernel table normalization uses it
    if (const auto* p = o.get("quadrature")) detail::parse_quadrature(*p, cfg);
    if (const auto* p = o.get("kernel")) detail::parse_kernel(*p, cfg);
    if (const auto* p = o.get("domain")) detail::parse_domain(*p, cfg);
    if (const auto* p = o.get("field")) detail::parse_field(*p, cfg);
    if (const auto* p = o.get("eps")) {
        cfg.eps = detail::as_double_list(*p, "eps");
        for (double e : cfg.eps)
            if (!(e > 0)) throw config_error("eps values must be positive");
    }
    if (const auto* p = o.get("audit")) detail::parse_audit(*p, cfg);
    if (const auto* p = o.get("tolerances")) detail::parse_tolerances(*p, cfg);
    if (const auto* p = o.get("relax")) detail::parse_relax(*p, cfg);
    if (const auto* p = o.get("out")) cfg.out_dir = detail::as_string(*p, "out");
    if (const auto* p = o.get("threads")) {
        cfg.threads = detail::as_int(*p, "threads");
        if (cfg.threads < 0) throw config_error("threads must be nonnegative");
    }
    if (const auto* p = o.get("csv_timing")) cfg.csv_timing = detail::as_bool(*p, "csv_timing");
    o.finish();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

// Named field presets for quick CLI runs; overrides the config's field block.
inline void apply_preset(RunConfig& cfg, const std::string& name) {
    FieldSpec s;
    if (name == "helix") {
        s.family = "helix";
        s.k = 2 * M_PI;
        s.axis = 3;
    } else if (name == "linear") {
        s.family = "linear";
        s.A = mat3::identity();
        s.on_sphere = false;
    } else if (name == "skyrmion") {
        s.family = "skyrmion_bubble";
        s.radius = 0.25;
        s.chirality = 1.0;
    } else if (name == "constant") {
        s.family = "constant";
        s.c = {0, 0, 1};
        s.on_sphere = true;
    } else {
        throw config_error("unknown preset: " + name);
    }
    cfg.field = s;
}

}  // namespace nlx
