#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "compensated.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "local_energy.hpp"
#include "nonlocal_energy.hpp"
#include "pair_sum.hpp"
#include "quadrature.hpp"

namespace nlx {

// ---------------------------------------------------------------------------
// eps sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
    double eps = 0;
    EnergyBreakdown e;
};

struct RateFit {
    double rate = 0;      // slope of log|value - limit| vs log eps
    double constant = 0;  // exp(intercept)
    double residual = 0;  // rms residual of the fit
    int used = 0;         // points that survived the noise-floor cut
};

struct EnergySweep {
    std::string field_id;
    std::string kernel_id;
    std::vector<SweepRow> rows;
    bool has_limits = false;
    double f_limit = 0, h_limit = 0, e_limit = 0;
    bool has_rates = false;
    RateFit f_rate, h_rate, e_rate;
};

inline void require_strictly_decreasing(const std::vector<double>& eps_list) {
    if (eps_list.empty()) throw input_error("eps list must not be empty");
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i)
        if (!(eps_list[i] > eps_list[i + 1]))
            throw input_error("eps list must be strictly decreasing");
}

inline EnergySweep sweep(const KernelPair& pair, const DiscreteField& m,
                         const std::vector<double>& eps_list) {
    require_strictly_decreasing(eps_list);
    EnergySweep s;
    s.kernel_id = pair.rho.name + "+" + pair.nu.name;
    for (double eps : eps_list) {
        PairSummationPlan plan = build_pair_plan(pair, m.dom, eps);
        s.rows.push_back({eps, nonlocal_energy(plan, m)});
    }
    return s;
}

inline void attach_limits(EnergySweep& s, const DiscreteField& m, const AnisotropyMatrix& A,
                          const DzyaloshinskiiMatrix& D) {
    LocalBreakdown lim = limit_energy(m, A, D);
    s.f_limit = lim.dirichlet;
    s.h_limit = lim.dmi;
    s.e_limit = lim.total;
    s.has_limits = true;
}

// Least-squares fit of log|value - limit| against log eps.  Rows whose error
// sits below max(1e-13, 10 * noise_floor) carry no rate information (they
// measure quadrature noise, not convergence) and are excluded.
inline RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& values,
                        double limit, double noise_floor = 0) {
    if (eps.size() != values.size()) throw input_error("rate fit: mismatched columns");
    if (eps.size() < 3) throw input_error("rate fit needs at least 3 rows");
    double cut = std::max(1e-13, 10.0 * noise_floor);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        double err = std::abs(values[i] - limit);
        if (err < cut) continue;
        xs.push_back(std::log(eps[i]));
        ys.push_back(std::log(err));
    }
    if (xs.size() < 2) throw input_error("rate fit degenerate: fewer than 2 usable points");
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0) throw input_error("rate fit degenerate: eps values coincide");
    RateFit fit;
    fit.rate = (n * sxy - sx * sy) / denom;
    double intercept = (sy - fit.rate * sx) / n;
    fit.constant = std::exp(intercept);
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - (intercept + fit.rate * xs[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.used = static_cast<int>(xs.size());
    return fit;
}

inline void attach_rates(EnergySweep& s, double noise_floor = 0) {
    if (!s.has_limits) throw input_error("rate fit needs limits attached to the sweep");
    std::vector<double> eps, f, h, e;
    for (const SweepRow& r : s.rows) {
        eps.push_back(r.eps);
        f.push_back(r.e.f_eps);
        h.push_back(r.e.h_eps);
        e.push_back(r.e.e_eps);
    }
    s.f_rate = fit_rate(eps, f, s.f_limit, noise_floor);
    s.h_rate = fit_rate(eps, h, s.h_limit, noise_floor);
    s.e_rate = fit_rate(eps, e, s.e_limit, noise_floor);
    s.has_rates = true;
}

// ---------------------------------------------------------------------------
// Limit-object estimators
// ---------------------------------------------------------------------------

struct DzyaloEstimate {
    std::vector<double> eps;
    std::vector<mat3> per_eps;    // columns = coupling vectors at that eps
    mat3 extrapolated;            // entrywise linear-in-eps extrapolation to 0
    std::vector<double> steps;    // max-norm of successive differences
    bool converged = true;        // steps non-growing and last step small

    DzyaloshinskiiMatrix matrix() const {
        return DzyaloshinskiiMatrix::from(
            {extrapolated.col(0), extrapolated.col(1), extrapolated.col(2)});
    }
};

inline DzyaloEstimate estimate_dzyalo(const KernelPair& pair,
                                      const std::vector<double>& eps_list,
                                      const QuadratureSpec& qs = {},
                                      double step_tolerance = 1e-6) {
    require_strictly_decreasing(eps_list);
    if (eps_list.size() < 2) throw input_error("coupling estimation needs at least 2 eps values");
    DzyaloEstimate est;
    est.eps = eps_list;
    for (double eps : eps_list) est.per_eps.push_back(dzyalo_matrix(pair, eps, qs));

    for (std::size_t i = 0; i + 1 < est.per_eps.size(); ++i) {
        mat3 diff = est.per_eps[i + 1];
        for (int t = 0; t < 9; ++t) diff.a[t] -= est.per_eps[i].a[t];
        est.steps.push_back(max_abs(diff));
    }
    for (std::size_t i = 0; i + 1 < est.steps.size(); ++i)
        if (est.steps[i + 1] > est.steps[i] + 1e-15) est.converged = false;
    if (!est.steps.empty() && est.steps.back() > step_tolerance) est.converged = false;

    // entrywise linear fit in eps over the last (up to) 3 points, value at 0
    std::size_t n = est.per_eps.size();
    std::size_t k = std::min<std::size_t>(3, n);
    double sx = 0, sxx = 0;
    for (std::size_t i = n - k; i < n; ++i) {
        sx += eps_list[i];
        sxx += eps_list[i] * eps_list[i];
    }
    double denom = k * sxx - sx * sx;
    for (int t = 0; t < 9; ++t) {
        double sy = 0, sxy = 0;
        for (std::size_t i = n - k; i < n; ++i) {
            sy += est.per_eps[i].a[t];
            sxy += eps_list[i] * est.per_eps[i].a[t];
        }
        double slope = denom != 0 ? (k * sxy - sx * sy) / denom : 0.0;
        est.extrapolated.a[t] = (sy - slope * sx) / k;
    }
    return est;
}

// Finite-eps anisotropy proxy: A(eps)_ij = integral rho_eps(z) z_i z_j / |z|^2 dz.
// Unit trace by construction (the integrand traces to rho_eps); radial kernels
// give exactly I/3.
inline AnisotropyMatrix estimate_anisotropy(const KernelPair& pair, double eps,
                                            const QuadratureSpec& qs = {}) {
    if (eps <= 0) throw input_error("eps must be positive");
    double R = eps * pair.rho.support_radius;
    std::array<neumaier, 6> acc;  // xx, yy, zz, xy, xz, yz
    auto visit = [&](const vec3& z, double w) {
        double r2 = norm2(z);
        if (r2 <= 0) return;
        double rho = eval_rho(pair.rho, eps, z);
        if (rho == 0) return;
        double s = w * rho / r2;
        acc[0].add(s * z.x * z.x);
        acc[1].add(s * z.y * z.y);
        acc[2].add(s * z.z * z.z);
        acc[3].add(s * z.x * z.y);
        acc[4].add(s * z.x * z.z);
        acc[5].add(s * z.y * z.z);
    };
    if (qs.rule == QuadratureSpec::Rule::spherical)
        spherical_nodes(0.0, R, qs.n_r, qs.n_theta, qs.n_phi, visit);
    else
        cartesian_midpoint_nodes(R, qs.n_cart, visit);

    mat3 A;
    A(0, 0) = acc[0].value();
    A(1, 1) = acc[1].value();
    A(2, 2) = acc[2].value();
    A(0, 1) = A(1, 0) = acc[3].value();
    A(0, 2) = A(2, 0) = acc[4].value();
    A(1, 2) = A(2, 1) = acc[5].value();
    // unit trace up to quadrature error; rescale so the validator sees trace 1
    double tr = trace(A);
    if (std::abs(tr - 1.0) > 1e-3)
        throw input_error("anisotropy estimate trace far from 1; check the kernel mass");
    for (int t = 0; t < 9; ++t) A.a[t] /= tr;
    return AnisotropyMatrix::from(A);
}

// ---------------------------------------------------------------------------
// Bound audits
//
// (a) the ratio e_eps / ||m||_H1^2 stays bounded along the sweep (reported,
//     plus a variation statistic);
// (b) per eps, the per-pair coercivity split survives aggregation:
//       e_eps >= (1 - d2) f_eps - cross_term / (4 d2)     (default d2 = 1/2)
// (c) per eps, cross_term <= cross_bound_constant * ||m||_L2^2.
// ---------------------------------------------------------------------------

struct BoundAuditRow {
    double eps = 0;
    double f_eps = 0, h_eps = 0, e_eps = 0, cross_term = 0;
    double ratio_h1 = 0;          // e_eps / ||m||_H1^2
    double cross_bound = 0;       // certified constant at this eps
    bool coercivity_ok = false;   // audit (b)
    bool cross_control_ok = false;  // audit (c)
};

struct BoundAuditReport {
    double delta_squared = 0.5;
    double h1_norm_squared = 0;
    double l2_norm_squared = 0;
    std::vector<BoundAuditRow> rows;
    double ratio_max = 0;
    double ratio_variation = 0;  // (max - min) / max over the sweep, 0 if all zero
    int violations = 0;
    bool all_pass = false;
};

inline BoundAuditReport audit_bounds(const KernelPair& pair, const DiscreteField& m,
                                     const std::vector<double>& eps_list,
                                     double delta_squared = 0.5) {
    require_strictly_decreasing(eps_list);
    if (!(delta_squared > 0) || !(delta_squared < 1))
        throw input_error("delta_squared must lie in (0,1)");
    BoundAuditReport rep;
    rep.delta_squared = delta_squared;
    rep.h1_norm_squared = h1_norm_sq(m);
    rep.l2_norm_squared = l2_norm_sq(m);

    double rmin = std::numeric_limits<double>::infinity(), rmax = 0;
    for (double eps : eps_list) {
        PairSummationPlan plan = build_pair_plan(pair, m.dom, eps);
        EnergyBreakdown e = nonlocal_energy(plan, m);
        BoundAuditRow row;
        row.eps = eps;
        row.f_eps = e.f_eps;
        row.h_eps = e.h_eps;
        row.e_eps = e.e_eps;
        row.cross_term = e.cross_term;
        row.cross_bound = plan.cross_bound_constant;
        row.ratio_h1 = e.e_eps / rep.h1_norm_squared;

        double lhs = (1.0 - delta_squared) * e.f_eps - e.cross_term / (4.0 * delta_squared);
        double slack_b = 1e-12 * (std::abs(lhs) + std::abs(e.e_eps) + 1.0);
        row.coercivity_ok = std::isfinite(e.cross_term) ? (e.e_eps >= lhs - slack_b)
                                                        : true;  // empty bound

        double rhs = plan.cross_bound_constant * rep.l2_norm_squared;
        double slack_c = 1e-12 * (std::abs(e.cross_term) + std::abs(rhs) + 1.0);
        row.cross_control_ok = !std::isfinite(rhs) || e.cross_term <= rhs + slack_c;

        if (!row.coercivity_ok) ++rep.violations;
        if (!row.cross_control_ok) ++rep.violations;
        rmin = std::min(rmin, row.ratio_h1);
        rmax = std::max(rmax, row.ratio_h1);
        rep.rows.push_back(row);
    }
    rep.ratio_max = rmax;
    rep.ratio_variation = rmax > 0 ? (rmax - rmin) / rmax : 0.0;
    rep.all_pass = rep.violations == 0 && std::isfinite(rep.ratio_max);
    return rep;
}

// ---------------------------------------------------------------------------
// Recovery check: the sampled field is its own recovery sequence, so e_eps
// must approach the local limit; the last sweep point must carry the smallest
// error and land within the tolerance.
// ---------------------------------------------------------------------------

struct RecoveryRow {
    double eps = 0;
    double e_eps = 0;
    double abs_error = 0;
    double rel_error = 0;
};

struct RecoveryReport {
    LocalBreakdown limit;
    std::vector<RecoveryRow> rows;
    double tolerance = 0.08;
    bool last_is_smallest = false;
    double final_rel_error = 0;
    bool pass = false;
};

inline RecoveryReport recovery_check(const KernelPair& pair, const DiscreteField& m,
                                     const std::vector<double>& eps_list,
                                     const AnisotropyMatrix& A, const DzyaloshinskiiMatrix& D,
                                     double tolerance = 0.08) {
    require_strictly_decreasing(eps_list);
    RecoveryReport rep;
    rep.tolerance = tolerance;
    rep.limit = limit_energy(m, A, D);
    double scale = std::max(std::abs(rep.limit.total), 1e-12);
    for (double eps : eps_list) {
        PairSummationPlan plan = build_pair_plan(pair, m.dom, eps);
        EnergyBreakdown e = nonlocal_energy(plan, m);
        RecoveryRow row;
        row.eps = eps;
        row.e_eps = e.e_eps;
        row.abs_error = std::abs(e.e_eps - rep.limit.total);
        row.rel_error = row.abs_error / scale;
        rep.rows.push_back(row);
    }
    std::size_t best = 0;
    for (std::size_t i = 0; i < rep.rows.size(); ++i)
        if (rep.rows[i].abs_error < rep.rows[best].abs_error) best = i;
    rep.last_is_smallest = best + 1 == rep.rows.size();
    rep.final_rel_error = rep.rows.back().rel_error;
    rep.pass = rep.last_is_smallest && rep.final_rel_error <= tolerance;
    return rep;
}

}  // namespace nlx
