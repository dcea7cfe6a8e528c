#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "compensated.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "pair_sum.hpp"
#include "parallel.hpp"
#include "vec3.hpp"

namespace nlx {

// ---------------------------------------------------------------------------
// Pair energies on a discrete field.
//
// With the normalized stencil weights of PairSummationPlan, the three reported
// quantities are (V = cell volume, sums over ordered cell pairs (p,q)):
//
//   f_eps      = sum wf(x_p - x_q) |m_p - m_q|^2            V^2
//   h_eps      = sum wh(x_p - x_q) . (m_p x m_q)            V^2
//   cross_term = sum |m_q x wh(x_p - x_q)|^2 / wf(...)      V^2
//
// cross_term is the exact per-pair Young complement of h_eps: splitting
//   wh.(m_p x m_q) = (m_p - m_q).(m_q x wh)
// and applying xy >= -(t/2)x^2 - y^2/(2t) with t = wf gives, pair by pair,
//   wf|dm|^2 + wh.(m_p x m_q) >= (1/2) wf|dm|^2 - (1/2)|m_q x wh|^2/wf,
// i.e. e_pair >= f_pair/2 - cross_pair/2 holds per ordered pair by algebra
// alone.  cross_term is +infinity if some interacting pair has wf = 0 but a
// nonzero numerator (the bound is then empty).
// ---------------------------------------------------------------------------

struct EnergyBreakdown {
    double f_eps = 0;       // symmetric difference energy
    double h_eps = 0;       // antisymmetric cross energy
    double e_eps = 0;       // f_eps + h_eps
    double cross_term = 0;  // Young complement sum (see above)
    std::uint64_t pairs = 0;
    double seconds = 0;
};

namespace detail {

struct pair_accum {
    neumaier f, h, cross;
    bool cross_infinite = false;
    void merge(const pair_accum& o) {
        f.merge(o.f);
        h.merge(o.h);
        cross.merge(o.cross);
        cross_infinite = cross_infinite || o.cross_infinite;
    }
};

}  // namespace detail

inline EnergyBreakdown nonlocal_energy(const PairSummationPlan& plan,
                                       const DiscreteField& m) {
    if (!(m.dom == plan.dom))
        throw input_error("field domain does not match the summation plan");
    auto t0 = std::chrono::steady_clock::now();

    const BoxDomain& d = plan.dom;
    const int n0 = d.n[0], n1 = d.n[1], n2 = d.n[2];
    const std::size_t s0 = static_cast<std::size_t>(n1) * n2, s1 = n2;

    detail::pair_accum acc = parallel_reduce<detail::pair_accum>(
        d.cells(),
        [&](std::size_t lo, std::size_t hi, detail::pair_accum& st) {
            for (std::size_t c = lo; c < hi; ++c) {
                int i = static_cast<int>(c / s0);
                int j = static_cast<int>((c / s1) % n1);
                int k = static_cast<int>(c % n2);
                const vec3& mc = m.v[c];
                for (const StencilEntry& e : plan.entries) {
                    int bi = i + e.offset[0], bj = j + e.offset[1], bk = k + e.offset[2];
                    if (bi >= n0 || bj < 0 || bj >= n1 || bk < 0 || bk >= n2) continue;
                    const vec3& mb = m.v[c + s0 * e.offset[0] + s1 * e.offset[1] + e.offset[2]];
                    vec3 dm = mc - mb;
                    st.f.add(2.0 * e.wf * norm2(dm));
                    st.h.add(2.0 * dot(e.wh, cross(mb, mc)));
                    double num = norm2(cross(mc, e.wh)) + norm2(cross(mb, e.wh));
                    if (e.wf > 0)
                        st.cross.add(num / e.wf);
                    else if (num > 0)
                        st.cross_infinite = true;
                }
            }
        },
        [](detail::pair_accum& a, const detail::pair_accum& b) { a.merge(b); });

    double V2 = d.cell_volume() * d.cell_volume();
    EnergyBreakdown out;
    out.f_eps = V2 * acc.f.value();
    out.h_eps = V2 * acc.h.value();
    out.e_eps = out.f_eps + out.h_eps;
    out.cross_term = acc.cross_infinite ? std::numeric_limits<double>::infinity()
                                        : V2 * acc.cross.value();
    out.pairs = plan.ordered_pairs;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// Reference evaluation: independent ordered double loop over all cell pairs,
// with kernel values taken directly at integer-offset displacements.  Used to
// validate the stencil traversal on small grids.
inline EnergyBreakdown nonlocal_energy_brute(const KernelPair& pair, const DiscreteField& m,
                                             double eps) {
    auto t0 = std::chrono::steady_clock::now();
    const BoxDomain& d = m.dom;
    if (eps < 2.0 * d.max_h())
        throw resolution_error("eps is below the resolution floor for this grid",
                               2.0 * d.max_h());
    double R = eps * std::max(pair.rho.support_radius, pair.nu.support_radius);
    vec3 h = d.spacing();
    double V = d.cell_volume();

    // lattice masses over the full (unclamped) stencil
    neumaier mrho, mnu;
    std::array<int, 3> K{static_cast<int>(std::floor(R / h.x)),
                         static_cast<int>(std::floor(R / h.y)),
                         static_cast<int>(std::floor(R / h.z))};
    for (int i = -K[0]; i <= K[0]; ++i)
        for (int j = -K[1]; j <= K[1]; ++j)
            for (int k = -K[2]; k <= K[2]; ++k) {
                if (i == 0 && j == 0 && k == 0) continue;
                vec3 z{i * h.x, j * h.y, k * h.z};
                if (norm(z) > R) continue;
                mrho.add(eval_rho(pair.rho, eps, z) * V);
                mnu.add(norm(eval_nu(pair.nu, eps, z)) * V);
            }
    double Mrho = mrho.value(), Mnu = mnu.value();
    if (Mrho <= 0) throw input_error("interaction stencil carries no symmetric kernel mass");

    neumaier f, hh, cr;
    bool cr_inf = false;
    std::uint64_t pairs = 0;
    std::size_t N = d.cells();
    for (std::size_t a = 0; a < N; ++a) {
        int ai = static_cast<int>(a / (static_cast<std::size_t>(d.n[1]) * d.n[2]));
        int aj = static_cast<int>((a / d.n[2]) % d.n[1]);
        int ak = static_cast<int>(a % d.n[2]);
        for (std::size_t b = 0; b < N; ++b) {
            if (a == b) continue;
            int bi = static_cast<int>(b / (static_cast<std::size_t>(d.n[1]) * d.n[2]));
            int bj = static_cast<int>((b / d.n[2]) % d.n[1]);
            int bk = static_cast<int>(b % d.n[2]);
            vec3 z{(ai - bi) * h.x, (aj - bj) * h.y, (ak - bk) * h.z};
            double r = norm(z);
            if (r > R) continue;
            double wf = eval_rho(pair.rho, eps, z) / (r * r * Mrho);
            vec3 wh = Mnu > 0 ? eval_nu(pair.nu, eps, z) / (r * Mnu) : vec3{};
            if (wf == 0 && norm2(wh) == 0) continue;
            ++pairs;
            vec3 dm = m.v[a] - m.v[b];
            f.add(wf * norm2(dm));
            hh.add(dot(wh, cross(m.v[a], m.v[b])));
            double num = norm2(cross(m.v[b], wh));
            if (wf > 0)
                cr.add(num / wf);
            else if (num > 0)
                cr_inf = true;
        }
    }
    double V2 = V * V;
    EnergyBreakdown out;
    out.f_eps = V2 * f.value();
    out.h_eps = V2 * hh.value();
    out.e_eps = out.f_eps + out.h_eps;
    out.cross_term = cr_inf ? std::numeric_limits<double>::infinity() : V2 * cr.value();
    out.pairs = pairs;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// Gradient of e_eps = f_eps + h_eps with respect to the cell values:
//   grad_c = V^2 sum_{neighbors q} [ 4 wf (m_c - m_q) + 2 m_q x wh(x_c - x_q) ]
// Each cell writes only its own entry, so the pass is race-free and its
// accumulation order is fixed.
inline std::vector<vec3> nonlocal_gradient(const PairSummationPlan& plan,
                                           const DiscreteField& m) {
    if (!(m.dom == plan.dom))
        throw input_error("field domain does not match the summation plan");
    const BoxDomain& d = plan.dom;
    const int n0 = d.n[0], n1 = d.n[1], n2 = d.n[2];
    const std::ptrdiff_t s0 = static_cast<std::ptrdiff_t>(n1) * n2, s1 = n2;
    double V2 = d.cell_volume() * d.cell_volume();

    std::vector<vec3> g(d.cells());
    parallel_for(d.cells(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c) {
            int i = static_cast<int>(c / s0);
            int j = static_cast<int>((c / s1) % n1);
            int k = static_cast<int>(c % n2);
            const vec3& mc = m.v[c];
            vec3 acc{};
            for (const StencilEntry& e : plan.entries) {
                std::ptrdiff_t step = s0 * e.offset[0] + s1 * e.offset[1] + e.offset[2];
                // neighbor at +offset: kernel argument x_c - x_q = -z, so the
                // stored odd weight enters with a minus sign
                if (i + e.offset[0] < n0 && j + e.offset[1] >= 0 && j + e.offset[1] < n1 &&
                    k + e.offset[2] >= 0 && k + e.offset[2] < n2) {
                    const vec3& mq = m.v[c + step];
                    acc += 4.0 * e.wf * (mc - mq) - 2.0 * cross(mq, e.wh);
                }
                // neighbor at -offset: kernel argument is +z
                if (i - e.offset[0] >= 0 && j - e.offset[1] >= 0 && j - e.offset[1] < n1 &&
                    k - e.offset[2] >= 0 && k - e.offset[2] < n2) {
                    const vec3& mq = m.v[c - step];
                    acc += 4.0 * e.wf * (mc - mq) + 2.0 * cross(mq, e.wh);
                }
            }
            g[c] = V2 * acc;
        }
    });
    return g;
}

// ---------------------------------------------------------------------------
// Generic lattice pair-coupling energy
//
//   E(m) = sum_{ordered p != q} [ J(x_p - x_q) |m_p - m_q|^2
//                                 + D(x_p - x_q) . (m_p x m_q) ] V^2
//
// restricted to |x_p - x_q| <= max_range.  Only the even part of J and the odd
// part of D can contribute, so couplings violating those symmetries are
// rejected up front.  Feeding the normalized stencil weights back in as (J, D)
// reproduces (f_eps, h_eps) of nonlocal_energy exactly: the traversal below
// mirrors the fused pass term for term.
// ---------------------------------------------------------------------------

struct HeisenbergBreakdown {
    double sym = 0;   // J part
    double asym = 0;  // D part
    double total = 0;
};

inline HeisenbergBreakdown heisenberg_energy(
    const DiscreteField& m, const std::function<double(const vec3&)>& J,
    const std::function<vec3(const vec3&)>& D, double max_range) {
    if (max_range <= 0) throw input_error("pair coupling range must be positive");
    const BoxDomain& d = m.dom;
    vec3 h = d.spacing();
    std::array<int, 3> reach{};
    for (int a = 0; a < 3; ++a)
        reach[a] = std::min(d.n[a] - 1, static_cast<int>(std::floor(max_range / h[a])));

    // collect half-stencil offsets and validate coupling symmetry on each
    struct Entry {
        std::array<int, 3> o;
        vec3 z;
        double J;
        vec3 D;
    };
    std::vector<Entry> entries;
    for (int i = 0; i <= reach[0]; ++i)
        for (int j = (i == 0 ? 0 : -reach[1]); j <= reach[1]; ++j)
            for (int k = (i == 0 && j == 0 ? 1 : -reach[2]); k <= reach[2]; ++k) {
                vec3 z{i * h.x, j * h.y, k * h.z};
                if (norm(z) > max_range) continue;
                Entry e{{i, j, k}, z, J(z), D(z)};
                double Jm = J(-z);
                vec3 Dm = D(-z);
                double scale = std::abs(e.J) + std::abs(Jm) + 1.0;
                if (std::abs(e.J - Jm) > 1e-12 * scale)
                    throw input_error("scalar pair coupling must be even in the displacement");
                if (norm(e.D + Dm) > 1e-12 * (norm(e.D) + norm(Dm) + 1.0))
                    throw input_error("vector pair coupling must be odd in the displacement");
                entries.push_back(e);
            }

    const int n0 = d.n[0], n1 = d.n[1], n2 = d.n[2];
    const std::size_t s0 = static_cast<std::size_t>(n1) * n2, s1 = n2;
    detail::pair_accum acc = parallel_reduce<detail::pair_accum>(
        d.cells(),
        [&](std::size_t lo, std::size_t hi, detail::pair_accum& st) {
            for (std::size_t c = lo; c < hi; ++c) {
                int i = static_cast<int>(c / s0);
                int j = static_cast<int>((c / s1) % n1);
                int k = static_cast<int>(c % n2);
                const vec3& mc = m.v[c];
                for (const Entry& e : entries) {
                    int bi = i + e.o[0], bj = j + e.o[1], bk = k + e.o[2];
                    if (bi >= n0 || bj < 0 || bj >= n1 || bk < 0 || bk >= n2) continue;
                    const vec3& mb = m.v[c + s0 * e.o[0] + s1 * e.o[1] + e.o[2]];
                    vec3 dm = mc - mb;
                    st.f.add(2.0 * e.J * norm2(dm));
                    st.h.add(2.0 * dot(e.D, cross(mb, mc)));
                }
            }
        },
        [](detail::pair_accum& a, const detail::pair_accum& b) { a.merge(b); });

    double V2 = d.cell_volume() * d.cell_volume();
    HeisenbergBreakdown out;
    out.sym = V2 * acc.f.value();
    out.asym = V2 * acc.h.value();
    out.total = out.sym + out.asym;
    return out;
}

}  // namespace nlx
