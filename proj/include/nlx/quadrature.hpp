#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "compensated.hpp"
#include "vec3.hpp"

namespace nlx {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
struct gl_rule {
    std::vector<double> x, w;
};

inline gl_rule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    gl_rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.w[i] = w;
        r.w[n - 1 - i] = w;
    }
    return r;
}

struct QuadratureSpec {
    enum class Rule { spherical, cartesian };
    Rule rule = Rule::spherical;
    int n_r = 64, n_theta = 64, n_phi = 128;  // spherical product sizes
    int n_cart = 64;                          // cartesian midpoint cells per axis
};

// Orthonormal {u1, u2} completing a unit axis to a right-handed frame.
inline void frame_from_axis(const vec3& axis, vec3& u1, vec3& u2) {
    vec3 h = std::abs(axis.x) < 0.9 ? vec3{1, 0, 0} : vec3{0, 1, 0};
    u1 = cross(axis, h);
    u1 = u1 / norm(u1);
    u2 = cross(axis, u1);
}

// Spherical product rule: Gauss-Legendre radially on [r_lo, r_hi], Gauss-Legendre
// in mu = cos(angle to axis) on [mu_lo, mu_hi], uniform azimuthal. Exact for
// radial-profile x low-degree-angular-polynomial integrands, and the radial /
// polar windows make shell and cone restrictions exact instead of sampled.
template <class F>
void spherical_nodes(double r_lo, double r_hi, int n_r, int n_t, int n_p, F&& visit,
                     vec3 axis = {0, 0, 1}, double mu_lo = -1.0, double mu_hi = 1.0) {
    if (r_hi <= r_lo || mu_hi <= mu_lo) return;
    gl_rule gr = gauss_legendre(n_r), gm = gauss_legendre(n_t);
    vec3 u1, u2;
    frame_from_axis(axis, u1, u2);
    double dphi = 2.0 * M_PI / n_p;
    for (int i = 0; i < n_r; ++i) {
        double r = 0.5 * (gr.x[i] + 1.0) * (r_hi - r_lo) + r_lo;
        double wr = gr.w[i] * 0.5 * (r_hi - r_lo) * r * r;
        for (int j = 0; j < n_t; ++j) {
            double mu = 0.5 * (gm.x[j] + 1.0) * (mu_hi - mu_lo) + mu_lo;
            double wmu = gm.w[j] * 0.5 * (mu_hi - mu_lo);
            double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
            for (int l = 0; l < n_p; ++l) {
                double phi = (l + 0.5) * dphi;
                vec3 z = r * (mu * axis + st * (std::cos(phi) * u1 + std::sin(phi) * u2));
                visit(z, wr * wmu * dphi);
            }
        }
    }
}

template <class F>
double spherical_integral(F&& f, double r_lo, double r_hi, int n_r, int n_t, int n_p,
                          vec3 axis = {0, 0, 1}, double mu_lo = -1.0, double mu_hi = 1.0) {
    neumaier acc;
    spherical_nodes(r_lo, r_hi, n_r, n_t, n_p,
                    [&](const vec3& z, double w) { acc.add(w * f(z)); }, axis, mu_lo, mu_hi);
    return acc.value();
}

// Product midpoint rule over the bounding cube [-R,R]^3 (integrands vanish
// outside the support ball themselves).
template <class F>
void cartesian_midpoint_nodes(double R, int n, F&& visit) {
    double h = 2.0 * R / n, w = h * h * h;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                visit(vec3{(i + 0.5) * h - R, (j + 0.5) * h - R, (k + 0.5) * h - R}, w);
}

template <class F>
double cartesian_midpoint_integral(F&& f, double R, int n) {
    neumaier acc;
    cartesian_midpoint_nodes(R, n, [&](const vec3& z, double w) { acc.add(w * f(z)); });
    return acc.value();
}

// Deterministic low-discrepancy directions (Fibonacci spiral on the sphere).
inline std::vector<vec3> fibonacci_sphere(int n) {
    std::vector<vec3> dirs;
    dirs.reserve(n);
    const double ga = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        double z = 1.0 - (2.0 * i + 1.0) / n;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = ga * i;
        dirs.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
    return dirs;
}

}  // namespace nlx
