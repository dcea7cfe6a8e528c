#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "convergence_lab.hpp"
#include "errors.hpp"
#include "kernels.hpp"
#include "local_energy.hpp"
#include "nonlocal_energy.hpp"
#include "relaxer.hpp"
#include "vec3.hpp"

namespace nlx {

using nlohmann::json;

// ---------------------------------------------------------------------------
// CSV (C locale, '.' decimal separator, %.17g doubles).  The timing column is
// zeroed unless explicitly enabled so identical runs produce identical bytes.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

}  // namespace detail

inline std::string sweep_csv_string(const EnergySweep& s, bool timing = false) {
    std::string out = "eps,f_eps,h_eps,e_eps,cross_term,pairs,seconds\n";
    char buf[320];
    for (const SweepRow& r : s.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%llu,%.6f\n", r.eps,
                      r.e.f_eps, r.e.h_eps, r.e.e_eps, r.e.cross_term,
                      static_cast<unsigned long long>(r.e.pairs),
                      timing ? r.e.seconds : 0.0);
        out += buf;
    }
    return out;
}

inline std::string trace_csv_string(const RelaxTrace& t) {
    std::string out = "iter,energy,grad_norm,step\n";
    char buf[256];
    for (const TraceRow& r : t.rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.iter, r.energy, r.grad_norm,
                      r.step);
        out += buf;
    }
    return out;
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw input_error("cannot open output file: " + path);
    f << content;
}

// ---------------------------------------------------------------------------
// JSON summaries.  Non-finite values serialize as null (JSON has no inf).
// ---------------------------------------------------------------------------

inline json to_json(const vec3& v) { return json::array({v.x, v.y, v.z}); }

inline json to_json(const mat3& m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
    return rows;
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

inline json to_json(const EnergyBreakdown& e, bool timing = false) {
    return json{{"f_eps", e.f_eps},
                {"h_eps", e.h_eps},
                {"e_eps", e.e_eps},
                {"cross_term", finite_or_null(e.cross_term)},
                {"pairs", e.pairs},
                {"seconds", timing ? e.seconds : 0.0}};
}

inline json to_json(const RateFit& r) {
    return json{{"rate", r.rate},
                {"constant", r.constant},
                {"residual", r.residual},
                {"points_used", r.used}};
}

inline json to_json(const BoundAuditReport& a) {
    json rows = json::array();
    for (const BoundAuditRow& r : a.rows)
        rows.push_back(json{{"eps", r.eps},
                            {"f_eps", r.f_eps},
                            {"h_eps", r.h_eps},
                            {"e_eps", r.e_eps},
                            {"cross_term", finite_or_null(r.cross_term)},
                            {"cross_bound_constant", finite_or_null(r.cross_bound)},
                            {"ratio_h1", r.ratio_h1},
                            {"coercivity_ok", r.coercivity_ok},
                            {"cross_control_ok", r.cross_control_ok}});
    return json{{"delta_squared", a.delta_squared},
                {"h1_norm_squared", a.h1_norm_squared},
                {"l2_norm_squared", a.l2_norm_squared},
                {"ratio_max", a.ratio_max},
                {"ratio_variation", a.ratio_variation},
                {"violations", a.violations},
                {"all_pass", a.all_pass},
                {"slack_scale", 1e-12},
                {"rows", rows}};
}

inline json to_json(const RecoveryReport& r) {
    json rows = json::array();
    for (const RecoveryRow& row : r.rows)
        rows.push_back(json{{"eps", row.eps},
                            {"e_eps", row.e_eps},
                            {"abs_error", row.abs_error},
                            {"rel_error", row.rel_error}});
    return json{{"limit",
                 json{{"dirichlet", r.limit.dirichlet},
                      {"dmi", r.limit.dmi},
                      {"total", r.limit.total}}},
                {"tolerance", r.tolerance},
                {"last_is_smallest", r.last_is_smallest},
                {"final_rel_error", r.final_rel_error},
                {"pass", r.pass},
                {"rows", rows}};
}

inline json sweep_summary_json(const EnergySweep& s, const BoundAuditReport* audits = nullptr,
                               const RecoveryReport* recovery = nullptr, bool timing = false) {
    json rows = json::array();
    for (const SweepRow& r : s.rows) {
        json row = to_json(r.e, timing);
        row["eps"] = r.eps;
        rows.push_back(row);
    }
    json out{{"field", s.field_id}, {"kernel", s.kernel_id}, {"rows", rows}};
    if (s.has_limits)
        out["limits"] = json{{"f", s.f_limit}, {"h", s.h_limit}, {"e", s.e_limit}};
    if (s.has_rates)
        out["rates"] = json{
            {"f", to_json(s.f_rate)}, {"h", to_json(s.h_rate)}, {"e", to_json(s.e_rate)}};
    if (audits) out["audits"] = to_json(*audits);
    if (recovery) out["recovery"] = to_json(*recovery);
    return out;
}

inline json to_json(const HypothesisReport& rep) {
    json checks = json::array();
    for (const auto& [name, c] : rep.checks)
        checks.push_back(json{{"name", name},
                              {"pass", c.pass},
                              {"tolerance", c.tolerance},
                              {"detail", c.detail}});
    json per_eps = json::array();
    for (const HypothesisEpsEntry& e : rep.entries) {
        json cones = json::array({e.cone_masses[0], e.cone_masses[1], e.cone_masses[2]});
        per_eps.push_back(json{{"eps", e.eps},
                               {"l1_mass_rho", e.l1_mass_rho},
                               {"l1_mass_nu", e.l1_mass_nu},
                               {"rho_min_sampled", e.rho_min_sampled},
                               {"odd_defect", e.odd_defect},
                               {"mass_outside_rho", e.mass_outside_rho},
                               {"mass_outside_nu", e.mass_outside_nu},
                               {"cone_masses", cones},
                               {"kappa", e.kappa},
                               {"dzyalo", to_json(e.dzyalo)},
                               {"dzyalo_max_colnorm", e.dzyalo_max_colnorm},
                               {"ratio_sup", finite_or_null(e.ratio_sup)},
                               {"ratio_violation", e.ratio_violation}});
    }
    json dirs = json::array(
        {to_json(rep.cone_dirs[0]), to_json(rep.cone_dirs[1]), to_json(rep.cone_dirs[2])});
    return json{{"all_pass", rep.all_pass},
                {"checks", checks},
                {"per_eps", per_eps},
                {"deltas", rep.deltas},
                {"cone_directions", dirs},
                {"cone_aperture", rep.cone_aperture},
                {"cones_disjoint", rep.cones_disjoint},
                {"dzyalo_converged", rep.dzyalo_converged}};
}

inline json to_json(const DzyaloEstimate& est) {
    json per_eps = json::array();
    for (std::size_t i = 0; i < est.eps.size(); ++i)
        per_eps.push_back(json{{"eps", est.eps[i]}, {"matrix", to_json(est.per_eps[i])}});
    return json{{"per_eps", per_eps},
                {"extrapolated", to_json(est.extrapolated)},
                {"steps", est.steps},
                {"converged", est.converged}};
}

inline json to_json(const RelaxTrace& t) {
    return json{{"termination", t.termination},
                {"iterations", t.iterations},
                {"reached_tolerance", t.reached_tolerance},
                {"final_energy", t.rows.empty() ? 0.0 : t.rows.back().energy},
                {"final_grad_norm", t.rows.empty() ? 0.0 : t.rows.back().grad_norm}};
}

inline void write_json(const std::string& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

}  // namespace nlx
