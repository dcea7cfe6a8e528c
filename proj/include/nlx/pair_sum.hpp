#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "compensated.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "vec3.hpp"

namespace nlx {

// ---------------------------------------------------------------------------
// Precomputed interaction stencil for one (kernel pair, domain, eps) triple.
//
// Cell pairs interact through the lattice offset between their centers.  Each
// admissible offset carries two weights:
//
//   wf = rho_eps(z) / (|z|^2 * Mrho)   for the symmetric difference energy
//   wh = nu_eps(z)  / (|z|   * Mnu)    for the antisymmetric cross energy
//
// where Mrho = sum_{o != 0} rho_eps(z_o) V and Mnu = sum_{o != 0} |nu_eps(z_o)| V
// are the discrete lattice masses of the scaled kernels over the full stencil
// 0 < |z_o| <= eps * support_radius (independent of the box size).  Point
// sampling a kernel that concentrates at scale eps carries an O(h/eps) mass
// defect which would otherwise dominate every small-eps energy; dividing by
// the measured lattice mass removes it while leaving the offset-direction
// distribution untouched.  On a cubic lattice the renormalized second-moment
// matrix of the symmetric weights is exactly isotropic, so discrete energies
// approach the same local limits as their continuum counterparts, up to a
// genuine O(eps) boundary layer.
//
// Only lexicographically positive offsets are stored ("half stencil").  The
// stored wh is the normalized odd kernel evaluated AT the positive offset;
// energy code is responsible for orienting it per ordered pair (the kernel is
// evaluated at first-minus-second cell positions).
// ---------------------------------------------------------------------------

struct StencilEntry {
    std::array<int, 3> offset;  // lexicographically positive lattice offset
    vec3 z;                     // physical displacement offset .* spacing
    double wf = 0;              // normalized symmetric pair weight
    vec3 wh{};                  // normalized antisymmetric weight at +offset
    std::uint64_t pair_count = 0;  // ordered pairs realizing +-offset inside the box
};

struct PairSummationPlan {
    BoxDomain dom;
    double eps = 0;
    std::vector<StencilEntry> entries;
    double mass_rho = 0;  // discrete lattice mass of rho_eps before normalization
    double mass_nu = 0;   // discrete lattice mass of |nu_eps| before normalization
    std::uint64_t ordered_pairs = 0;  // total ordered interacting pairs in the box
    double min_eps = 0;               // resolution floor for this domain

    // Certified constant for the cross-term control: summing the per-pair bound
    // |m_q x wh|^2/wf <= |m_q|^2 |wh|^2/wf over any one cell's full stencil gives
    //   cross_term <= cross_bound_constant * (discrete L2 norm of m)^2
    // with cross_bound_constant = V * sum_{o != 0} |wh(z_o)|^2 / wf(z_o)
    // (+infinity if some offset has wf = 0 but wh != 0).
    double cross_bound_constant = 0;

    // Unordered pair visits of the fused energy pass, for cost reporting.
    double cost_estimate() const { return 0.5 * static_cast<double>(ordered_pairs); }
};

inline bool lex_positive(int a, int b, int c) {
    return a > 0 || (a == 0 && (b > 0 || (b == 0 && c > 0)));
}

// Ordered pairs of cells separated by +-offset o: each sign contributes
// prod_i (n_i - |o_i|) ordered pairs when every factor is positive.
inline std::uint64_t ordered_pair_count(const BoxDomain& dom, const std::array<int, 3>& o) {
    std::uint64_t m = 1;
    for (int a = 0; a < 3; ++a) {
        int span = dom.n[a] - std::abs(o[a]);
        if (span <= 0) return 0;
        m *= static_cast<std::uint64_t>(span);
    }
    return 2 * m;
}

inline PairSummationPlan build_pair_plan(const KernelPair& pair, const BoxDomain& dom,
                                         double eps) {
    PairSummationPlan plan;
    plan.dom = dom;
    plan.eps = eps;
    plan.min_eps = 2.0 * dom.max_h();
    if (eps <= 0) throw input_error("interaction range eps must be positive");
    if (eps < plan.min_eps)
        throw resolution_error("eps is below the resolution floor for this grid", plan.min_eps);

    double R = eps * std::max(pair.rho.support_radius, pair.nu.support_radius);
    vec3 h = dom.spacing();
    std::array<int, 3> reach{};
    for (int a = 0; a < 3; ++a) reach[a] = static_cast<int>(std::floor(R / h[a]));

    double V = dom.cell_volume();
    neumaier mrho, mnu;
    std::vector<StencilEntry> kept;
    for (int i = 0; i <= reach[0]; ++i)
        for (int j = (i == 0 ? 0 : -reach[1]); j <= reach[1]; ++j)
            for (int k = (i == 0 && j == 0 ? 1 : -reach[2]); k <= reach[2]; ++k) {
                if (!lex_positive(i, j, k)) continue;
                vec3 z{i * h.x, j * h.y, k * h.z};
                if (norm(z) > R) continue;
                double rho = eval_rho(pair.rho, eps, z);
                vec3 nu = eval_nu(pair.nu, eps, z);
                // masses run over the full stencil: +-o contribute equally
                mrho.add(2.0 * rho * V);
                mnu.add(2.0 * norm(nu) * V);
                if (rho == 0 && norm2(nu) == 0) continue;
                StencilEntry e;
                e.offset = {i, j, k};
                e.z = z;
                e.pair_count = ordered_pair_count(dom, e.offset);
                e.wf = rho;
                e.wh = nu;
                kept.push_back(e);
            }

    plan.mass_rho = mrho.value();
    plan.mass_nu = mnu.value();
    if (plan.mass_rho <= 0)
        throw input_error("interaction stencil carries no symmetric kernel mass");

    neumaier cbound;
    bool cbound_inf = false;
    for (StencilEntry& e : kept) {
        double r = norm(e.z);
        e.wf = e.wf / (r * r * plan.mass_rho);
        e.wh = plan.mass_nu > 0 ? e.wh / (r * plan.mass_nu) : vec3{};
        double wh2 = norm2(e.wh);
        if (e.wf > 0)
            cbound.add(2.0 * wh2 / e.wf);  // offset and its mirror
        else if (wh2 > 0)
            cbound_inf = true;
        plan.ordered_pairs += e.pair_count;
    }
    plan.cross_bound_constant = cbound_inf ? std::numeric_limits<double>::infinity()
                                           : V * cbound.value();

    // offsets kept so far include mass-only entries (no realized pairs); the
    // fused pass iterates only those with pairs inside the box
    std::erase_if(kept, [](const StencilEntry& e) { return e.pair_count == 0; });
    plan.entries = std::move(kept);
    std::sort(plan.entries.begin(), plan.entries.end(),
              [](const StencilEntry& a, const StencilEntry& b) { return a.offset < b.offset; });
    return plan;
}

}  // namespace nlx
