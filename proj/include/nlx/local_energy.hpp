#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "compensated.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "vec3.hpp"

namespace nlx {

// ---------------------------------------------------------------------------
// Coefficient carriers for the local limit energy.  Both are validated on
// construction so downstream code can rely on the invariants.
// ---------------------------------------------------------------------------

// Symmetric, positive semidefinite, unit-trace matrix acting on gradient
// directions in the Dirichlet term.
struct AnisotropyMatrix {
    mat3 A;

    static AnisotropyMatrix from(const mat3& M) {
        double scale = max_abs(M) + 1.0;
        if (max_asymmetry(M) > 1e-9 * scale)
            throw input_error("anisotropy matrix must be symmetric");
        if (std::abs(trace(M) - 1.0) > 1e-9)
            throw input_error("anisotropy matrix must have unit trace");
        auto ev = eigenvalues_sym(M);
        if (ev[0] < -1e-9 * std::max(1.0, std::abs(ev[2])))
            throw input_error("anisotropy matrix must be positive semidefinite");
        return AnisotropyMatrix{M};
    }

    static AnisotropyMatrix isotropic() { return AnisotropyMatrix{mat3::identity(1.0 / 3.0)}; }

    // eigenvalues of a symmetric 3x3 matrix, ascending (trigonometric method)
    static std::array<double, 3> eigenvalues_sym(const mat3& M) {
        double p1 = M(0, 1) * M(0, 1) + M(0, 2) * M(0, 2) + M(1, 2) * M(1, 2);
        if (p1 == 0) {
            std::array<double, 3> d{M(0, 0), M(1, 1), M(2, 2)};
            std::sort(d.begin(), d.end());
            return d;
        }
        double q = trace(M) / 3.0;
        double p2 = (M(0, 0) - q) * (M(0, 0) - q) + (M(1, 1) - q) * (M(1, 1) - q) +
                    (M(2, 2) - q) * (M(2, 2) - q) + 2.0 * p1;
        double p = std::sqrt(p2 / 6.0);
        mat3 B;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) B(r, c) = (M(r, c) - (r == c ? q : 0.0)) / p;
        double detB = B(0, 0) * (B(1, 1) * B(2, 2) - B(1, 2) * B(2, 1)) -
                      B(0, 1) * (B(1, 0) * B(2, 2) - B(1, 2) * B(2, 0)) +
                      B(0, 2) * (B(1, 0) * B(2, 1) - B(1, 1) * B(2, 0));
        double r = std::clamp(detB / 2.0, -1.0, 1.0);
        double phi = std::acos(r) / 3.0;
        double e1 = q + 2.0 * p * std::cos(phi);
        double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
        double e2 = 3.0 * q - e1 - e3;
        std::array<double, 3> ev{e3, e2, e1};
        std::sort(ev.begin(), ev.end());
        return ev;
    }
};

// One coupling vector per derivative direction; column norms at most one
// (the normalized odd kernel cannot produce more).
struct DzyaloshinskiiMatrix {
    std::array<vec3, 3> d;

    static DzyaloshinskiiMatrix from(const std::array<vec3, 3>& cols) {
        for (const vec3& c : cols)
            if (norm(c) > 1.0 + 1e-9)
                throw input_error("coupling column norm exceeds 1: " + std::to_string(norm(c)));
        return DzyaloshinskiiMatrix{cols};
    }

    static DzyaloshinskiiMatrix diagonal(double g) {
        return from({vec3{g, 0, 0}, vec3{0, g, 0}, vec3{0, 0, g}});
    }

    mat3 matrix() const {
        mat3 M;
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < 3; ++r) M(r, c) = d[c][r];
        return M;
    }
};

// ---------------------------------------------------------------------------
// Local energies (cell-volume-weighted midpoint sums over the grid)
// ---------------------------------------------------------------------------

struct LocalBreakdown {
    double dirichlet = 0;
    double dmi = 0;
    double total = 0;
};

// sum_k integral (A grad m_k) . grad m_k
inline double dirichlet_energy(const DiscreteField& m, const AnisotropyMatrix& A) {
    std::array<DiscreteField, 3> G = discrete_gradient(m);
    neumaier acc = parallel_reduce<neumaier>(
        m.v.size(),
        [&](std::size_t lo, std::size_t hi, neumaier& s) {
            for (std::size_t c = lo; c < hi; ++c) {
                double cell = 0;
                for (int k = 0; k < 3; ++k) {
                    vec3 g{G[0].v[c][k], G[1].v[c][k], G[2].v[c][k]};
                    cell += dot(A.A * g, g);
                }
                s.add(cell);
            }
        },
        [](neumaier& a, const neumaier& b) { a.merge(b); });
    return m.dom.cell_volume() * acc.value();
}

// sum_i integral m . (d_i x D_i m)
inline double dmi_energy(const DiscreteField& m, const DzyaloshinskiiMatrix& D) {
    std::array<DiscreteField, 3> G = discrete_gradient(m);
    neumaier acc = parallel_reduce<neumaier>(
        m.v.size(),
        [&](std::size_t lo, std::size_t hi, neumaier& s) {
            for (std::size_t c = lo; c < hi; ++c) {
                double cell = 0;
                for (int i = 0; i < 3; ++i) cell += dot(m.v[c], cross(D.d[i], G[i].v[c]));
                s.add(cell);
            }
        },
        [](neumaier& a, const neumaier& b) { a.merge(b); });
    return m.dom.cell_volume() * acc.value();
}

// gamma * integral (curl m) . m  with curl m = sum_i e_i x D_i m; identical to
// dmi_energy with coupling columns gamma * e_i.
inline double bulk_dmi_energy(const DiscreteField& m, double gamma) {
    std::array<DiscreteField, 3> G = discrete_gradient(m);
    neumaier acc = parallel_reduce<neumaier>(
        m.v.size(),
        [&](std::size_t lo, std::size_t hi, neumaier& s) {
            for (std::size_t c = lo; c < hi; ++c) {
                vec3 curl{G[1].v[c].z - G[2].v[c].y, G[2].v[c].x - G[0].v[c].z,
                          G[0].v[c].y - G[1].v[c].x};
                s.add(dot(curl, m.v[c]));
            }
        },
        [](neumaier& a, const neumaier& b) { a.merge(b); });
    return gamma * m.dom.cell_volume() * acc.value();
}

inline LocalBreakdown limit_energy(const DiscreteField& m, const AnisotropyMatrix& A,
                                   const DzyaloshinskiiMatrix& D) {
    LocalBreakdown out;
    out.dirichlet = dirichlet_energy(m, A);
    out.dmi = dmi_energy(m, D);
    out.total = out.dirichlet + out.dmi;
    return out;
}

// Gradient of limit_energy with respect to the cell values:
//   Dirichlet part: 2 V sum_{a,b} A_ab D_b^T (D_a m)
//   coupling part:  V [ sum_i d_i x (D_i m) + sum_i D_i^T (m x d_i) ]
// where D_a is the discrete derivative matrix along axis a.
inline std::vector<vec3> local_gradient(const DiscreteField& m, const AnisotropyMatrix& A,
                                        const DzyaloshinskiiMatrix& D) {
    const BoxDomain& dom = m.dom;
    double V = dom.cell_volume();
    std::array<DiscreteField, 3> G = discrete_gradient(m);

    std::vector<vec3> g(dom.cells(), vec3{});

    // Dirichlet: accumulate P_b = sum_a A_ab G_a, then scatter through D_b^T
    for (int b = 0; b < 3; ++b) {
        DiscreteField P(dom);
        for (std::size_t c = 0; c < P.v.size(); ++c)
            P.v[c] = A.A(0, b) * G[0].v[c] + A.A(1, b) * G[1].v[c] + A.A(2, b) * G[2].v[c];
        DiscreteField T = derivative_transpose_apply(P, b + 1);
        for (std::size_t c = 0; c < g.size(); ++c) g[c] += 2.0 * V * T.v[c];
    }

    // coupling term, direct part
    for (std::size_t c = 0; c < g.size(); ++c)
        for (int i = 0; i < 3; ++i) g[c] += V * cross(D.d[i], G[i].v[c]);

    // coupling term, adjoint part
    for (int i = 0; i < 3; ++i) {
        DiscreteField U(dom);
        for (std::size_t c = 0; c < U.v.size(); ++c) U.v[c] = cross(m.v[c], D.d[i]);
        DiscreteField T = derivative_transpose_apply(U, i + 1);
        for (std::size_t c = 0; c < g.size(); ++c) g[c] += V * T.v[c];
    }
    return g;
}

}  // namespace nlx
