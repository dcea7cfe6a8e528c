#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "compensated.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "local_energy.hpp"
#include "nonlocal_energy.hpp"
#include "pair_sum.hpp"

namespace nlx {

// ---------------------------------------------------------------------------
// Sphere-constrained projected-gradient descent for either energy family.
// ---------------------------------------------------------------------------

struct RelaxConfig {
    enum class Energy { nonlocal, local };
    Energy selector = Energy::local;

    // nonlocal selector
    KernelPair pair = make_prototype_pair();
    double eps = 0.3;

    // local selector; well_strength adds an optional easy-axis anisotropy well
    // K * integral (1 - (m . e3)^2) to the limit energy
    AnisotropyMatrix A = AnisotropyMatrix::isotropic();
    DzyaloshinskiiMatrix D = DzyaloshinskiiMatrix::diagonal(1.0 / 3.0);
    double well_strength = 0;

    // optimizer
    int max_iterations = 500;
    double initial_step = 1.0;
    double backtracking_factor = 0.5;
    double armijo_constant = 1e-4;
    double gradient_tolerance = 1e-6;

    void validate() const {
        if (!(initial_step > 0)) throw input_error("initial step must be positive");
        if (!(backtracking_factor > 0) || !(backtracking_factor < 1))
            throw input_error("backtracking factor must lie in (0,1)");
        if (!(armijo_constant > 0)) throw input_error("armijo constant must be positive");
        if (!(gradient_tolerance > 0)) throw input_error("gradient tolerance must be positive");
        if (max_iterations < 0) throw input_error("iteration budget must be nonnegative");
    }
};

// Energy + exact gradient of the discrete sum, as plain callables so the
// descent loop is selector-agnostic.
struct EnergyModel {
    std::function<double(const DiscreteField&)> energy;
    std::function<std::vector<vec3>(const DiscreteField&)> gradient;
};

inline EnergyModel make_energy_model(const RelaxConfig& cfg, const BoxDomain& dom) {
    cfg.validate();
    if (cfg.selector == RelaxConfig::Energy::nonlocal) {
        auto plan = std::make_shared<PairSummationPlan>(build_pair_plan(cfg.pair, dom, cfg.eps));
        return EnergyModel{
            [plan](const DiscreteField& m) { return nonlocal_energy(*plan, m).e_eps; },
            [plan](const DiscreteField& m) { return nonlocal_gradient(*plan, m); }};
    }
    AnisotropyMatrix A = cfg.A;
    DzyaloshinskiiMatrix D = cfg.D;
    double K = cfg.well_strength;
    auto energy = [A, D, K](const DiscreteField& m) {
        double e = limit_energy(m, A, D).total;
        if (K != 0) {
            neumaier acc;
            for (const vec3& mv : m.v) acc.add(1.0 - mv.z * mv.z);
            e += K * m.dom.cell_volume() * acc.value();
        }
        return e;
    };
    auto gradient = [A, D, K](const DiscreteField& m) {
        std::vector<vec3> g = local_gradient(m, A, D);
        if (K != 0) {
            double V = m.dom.cell_volume();
            for (std::size_t c = 0; c < g.size(); ++c) g[c].z += -2.0 * K * V * m.v[c].z;
        }
        return g;
    };
    return EnergyModel{energy, gradient};
}

// Pointwise tangential part g - (g.m) m; orthogonal to m at every cell.
inline std::vector<vec3> project_tangent(const DiscreteField& m, const std::vector<vec3>& g) {
    if (g.size() != m.v.size()) throw input_error("gradient size does not match the field");
    std::vector<vec3> out(g.size());
    for (std::size_t c = 0; c < g.size(); ++c)
        out[c] = g[c] - dot(g[c], m.v[c]) * m.v[c];
    return out;
}

inline DiscreteField project_tangent(const DiscreteField& m, const DiscreteField& g) {
    DiscreteField out(m.dom);
    out.v = project_tangent(m, g.v);
    out.on_sphere = false;
    return out;
}

struct TraceRow {
    int iter = 0;
    double energy = 0;
    double grad_norm = 0;  // sqrt(V * sum |tangential gradient|^2)
    double step = 0;       // accepted step size (0 for the seed row)
};

struct RelaxTrace {
    std::vector<TraceRow> rows;
    DiscreteField final_field;
    std::string termination;  // "tolerance" | "max_iterations" | "stalled"
    int iterations = 0;
    bool reached_tolerance = false;
};

inline RelaxTrace minimize(const RelaxConfig& cfg, const DiscreteField& seed) {
    cfg.validate();
    if (!seed.on_sphere || max_sphere_deviation(seed) > 1e-12)
        throw input_error("seed field must lie on the unit sphere");
    EnergyModel model = make_energy_model(cfg, seed.dom);
    double V = seed.dom.cell_volume();

    RelaxTrace trace;
    DiscreteField m = seed;
    double E = model.energy(m);
    std::vector<vec3> pg = project_tangent(m, model.gradient(m));
    auto tangent_norm2 = [](const std::vector<vec3>& g) {
        neumaier acc;
        for (const vec3& v : g) acc.add(norm2(v));
        return acc.value();
    };
    double gn2 = tangent_norm2(pg);
    trace.rows.push_back({0, E, std::sqrt(V * gn2), 0.0});

    double step = cfg.initial_step;
    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        if (std::sqrt(V * gn2) <= cfg.gradient_tolerance) {
            trace.termination = "tolerance";
            trace.reached_tolerance = true;
            trace.final_field = std::move(m);
            trace.iterations = iter - 1;
            return trace;
        }
        // backtracking on the retracted point's true energy
        double s = step;
        DiscreteField trial(m.dom);
        trial.on_sphere = true;
        bool accepted = false;
        double Et = 0;
        while (true) {
            for (std::size_t c = 0; c < m.v.size(); ++c) {
                vec3 t = m.v[c] - s * pg[c];
                trial.v[c] = t / norm(t);
            }
            Et = model.energy(trial);
            if (Et <= E - cfg.armijo_constant * s * gn2) {
                accepted = true;
                break;
            }
            s *= cfg.backtracking_factor;
            if (s < 1e-14) break;
        }
        if (!accepted) {
            trace.termination = "stalled";
            trace.final_field = std::move(m);
            trace.iterations = iter - 1;
            return trace;
        }
        m = std::move(trial);
        E = Et;
        pg = project_tangent(m, model.gradient(m));
        gn2 = tangent_norm2(pg);
        trace.rows.push_back({iter, E, std::sqrt(V * gn2), s});
        step = std::min(2.0 * s, cfg.initial_step);
    }
    if (std::sqrt(V * gn2) <= cfg.gradient_tolerance) {
        trace.termination = "tolerance";
        trace.reached_tolerance = true;
    } else {
        trace.termination = "max_iterations";
    }
    trace.final_field = std::move(m);
    trace.iterations = cfg.max_iterations;
    return trace;
}

// Central-difference check of the ambient gradient along a direction field:
// compares sum_c g_c . v_c against (E(m + t v) - E(m - t v)) / 2t.
struct FdCheckResult {
    double analytic = 0;
    double numeric = 0;
    double rel_error = 0;
};

inline FdCheckResult fd_directional_check(const EnergyModel& model, const DiscreteField& m,
                                          const DiscreteField& v, double t = 1e-5) {
    if (v.v.size() != m.v.size()) throw input_error("direction field size mismatch");
    std::vector<vec3> g = model.gradient(m);
    neumaier acc;
    for (std::size_t c = 0; c < g.size(); ++c) acc.add(dot(g[c], v.v[c]));

    DiscreteField plus = m, minus = m;
    plus.on_sphere = minus.on_sphere = false;
    for (std::size_t c = 0; c < m.v.size(); ++c) {
        plus.v[c] += t * v.v[c];
        minus.v[c] -= t * v.v[c];
    }
    FdCheckResult r;
    r.analytic = acc.value();
    r.numeric = (model.energy(plus) - model.energy(minus)) / (2.0 * t);
    r.rel_error = std::abs(r.analytic - r.numeric) / std::max(std::abs(r.numeric), 1e-12);
    return r;
}

}  // namespace nlx
