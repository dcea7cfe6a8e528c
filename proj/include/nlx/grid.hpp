#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "compensated.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "vec3.hpp"

namespace nlx {

// ---------------------------------------------------------------------------
// Axis-aligned box with a uniform cell grid; fields are sampled at cell centers.
// ---------------------------------------------------------------------------

struct BoxDomain {
    vec3 corner{0, 0, 0};
    vec3 sides{1, 1, 1};
    std::array<int, 3> n{4, 4, 4};

    BoxDomain() = default;
    BoxDomain(vec3 c, vec3 s, std::array<int, 3> res) : corner(c), sides(s), n(res) {
        for (int a = 0; a < 3; ++a) {
            if (n[a] < 4) throw input_error("domain resolution must be at least 4 per axis");
            if (sides[a] <= 0) throw input_error("domain side lengths must be positive");
        }
    }

    double h(int a) const { return sides[a] / n[a]; }
    vec3 spacing() const { return {h(0), h(1), h(2)}; }
    double max_h() const { return std::max({h(0), h(1), h(2)}); }
    double cell_volume() const { return h(0) * h(1) * h(2); }
    double volume() const { return sides.x * sides.y * sides.z; }
    std::size_t cells() const {
        return static_cast<std::size_t>(n[0]) * n[1] * n[2];
    }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * n[1] + j) * n[2] + k;
    }
    vec3 center(int i, int j, int k) const {
        return {corner.x + (i + 0.5) * h(0), corner.y + (j + 0.5) * h(1),
                corner.z + (k + 0.5) * h(2)};
    }
    vec3 center_of(std::size_t idx) const {
        int k = static_cast<int>(idx % n[2]);
        int j = static_cast<int>((idx / n[2]) % n[1]);
        int i = static_cast<int>(idx / (static_cast<std::size_t>(n[1]) * n[2]));
        return center(i, j, k);
    }

    bool operator==(const BoxDomain& o) const {
        return norm(corner - o.corner) == 0 && norm(sides - o.sides) == 0 && n == o.n;
    }
};

struct DiscreteField {
    BoxDomain dom;
    std::vector<vec3> v;
    bool on_sphere = false;

    DiscreteField() = default;
    explicit DiscreteField(const BoxDomain& d, vec3 fill = {})
        : dom(d), v(d.cells(), fill) {}

    vec3& at(int i, int j, int k) { return v[dom.index(i, j, k)]; }
    const vec3& at(int i, int j, int k) const { return v[dom.index(i, j, k)]; }
};

inline double max_sphere_deviation(const DiscreteField& f) {
    double d = 0;
    for (const vec3& m : f.v) d = std::max(d, std::abs(norm(m) - 1.0));
    return d;
}

inline DiscreteField project_to_sphere(DiscreteField f) {
    for (std::size_t c = 0; c < f.v.size(); ++c) {
        double r = norm(f.v[c]);
        if (r < 1e-8)
            throw degenerate_projection_error(
                "cannot normalize near-zero vector at cell " + std::to_string(c));
        f.v[c] = f.v[c] / r;
    }
    f.on_sphere = true;
    return f;
}

// ---------------------------------------------------------------------------
// Built-in field families
// ---------------------------------------------------------------------------

struct FieldSpec {
    std::string family;  // constant | linear | helix | skyrmion_bubble | random_bandlimited
    bool on_sphere = true;
    vec3 c{0, 0, 1};                      // constant
    mat3 A = mat3::identity();            // linear
    double k = 2 * M_PI;                  // helix wavenumber
    int axis = 3;                         // helix axis (1..3)
    double radius = 0.25;                 // skyrmion core scale
    double chirality = 1.0;               // skyrmion handedness
    std::uint64_t seed = 1;               // random field seed
    int max_frequency = 2;                // random field band limit
};

inline DiscreteField build_constant(const BoxDomain& dom, vec3 c, bool on_sphere) {
    if (on_sphere) {
        double r = norm(c);
        if (r < 1e-8) throw input_error("constant field: zero vector cannot lie on the sphere");
        c = c / r;
    }
    DiscreteField f(dom, c);
    f.on_sphere = on_sphere;
    return f;
}

inline DiscreteField build_linear(const BoxDomain& dom, const mat3& A, bool on_sphere) {
    DiscreteField f(dom);
    for (std::size_t idx = 0; idx < f.v.size(); ++idx) f.v[idx] = A * dom.center_of(idx);
    f.on_sphere = false;
    return on_sphere ? project_to_sphere(std::move(f)) : f;
}

inline DiscreteField build_helix(const BoxDomain& dom, double k, int axis) {
    if (axis < 1 || axis > 3) throw input_error("helix axis must be 1, 2, or 3");
    int a = axis - 1, a1 = (a + 1) % 3, a2 = (a + 2) % 3;
    DiscreteField f(dom);
    for (std::size_t idx = 0; idx < f.v.size(); ++idx) {
        double t = k * dom.center_of(idx)[a];
        vec3 m{};
        m[a1] = std::cos(t);
        m[a2] = std::sin(t);
        f.v[idx] = m;
    }
    f.on_sphere = true;
    return f;
}

// Axially symmetric bubble: polar angle pi*exp(-r/radius) about the box center,
// in-plane components wound once around the center (handedness = chirality sign).
inline DiscreteField build_skyrmion_bubble(const BoxDomain& dom, double radius,
                                           double chirality) {
    if (radius <= 0) throw input_error("skyrmion radius must be positive");
    vec3 c = dom.corner + 0.5 * dom.sides;
    DiscreteField f(dom);
    for (std::size_t idx = 0; idx < f.v.size(); ++idx) {
        vec3 x = dom.center_of(idx);
        double dx = x.x - c.x, dy = x.y - c.y;
        double r = std::hypot(dx, dy);
        double phi = r > 0 ? std::atan2(dy, dx) : 0.0;
        double theta = M_PI * std::exp(-r / radius);
        double st = std::sin(theta);
        f.v[idx] = {-chirality * st * std::sin(phi), chirality * st * std::cos(phi),
                    std::cos(theta)};
    }
    f.on_sphere = true;
    return f;
}

// Finite Fourier sample: a dominant constant mode plus decaying band-limited
// modes, drawn deterministically from the seed, then normalized pointwise.
inline DiscreteField build_random_bandlimited(const BoxDomain& dom, std::uint64_t seed,
                                              int max_frequency, bool on_sphere) {
    if (max_frequency < 0) throw input_error("max_frequency must be nonnegative");
    uniform_rng rng(seed);
    vec3 a0{rng.next_symmetric(), rng.next_symmetric(), rng.next_symmetric()};
    double r0 = norm(a0);
    a0 = (r0 > 1e-6 ? a0 / r0 : vec3{0, 0, 1}) * (0.75 + 0.25 * rng.next());

    struct Mode {
        std::array<int, 3> nvec;
        vec3 a, b;
    };
    std::vector<Mode> modes;
    int F = max_frequency;
    for (int nx = -F; nx <= F; ++nx)
        for (int ny = -F; ny <= F; ++ny)
            for (int nz = -F; nz <= F; ++nz) {
                bool positive = nx > 0 || (nx == 0 && (ny > 0 || (ny == 0 && nz > 0)));
                if (!positive) continue;  // one representative of each +-n pair
                double amp = 0.25 / std::pow(1.0 + nx * nx + ny * ny + nz * nz, 1.5);
                Mode m;
                m.nvec = {nx, ny, nz};
                m.a = {amp * rng.next_symmetric(), amp * rng.next_symmetric(),
                       amp * rng.next_symmetric()};
                m.b = {amp * rng.next_symmetric(), amp * rng.next_symmetric(),
                       amp * rng.next_symmetric()};
                modes.push_back(m);
            }

    DiscreteField f(dom);
    for (std::size_t idx = 0; idx < f.v.size(); ++idx) {
        vec3 x = dom.center_of(idx);
        vec3 xh{(x.x - dom.corner.x) / dom.sides.x, (x.y - dom.corner.y) / dom.sides.y,
                (x.z - dom.corner.z) / dom.sides.z};
        vec3 val = a0;
        for (const Mode& m : modes) {
            double ph = 2 * M_PI * (m.nvec[0] * xh.x + m.nvec[1] * xh.y + m.nvec[2] * xh.z);
            val += std::cos(ph) * m.a + std::sin(ph) * m.b;
        }
        f.v[idx] = val;
    }
    return on_sphere ? project_to_sphere(std::move(f)) : f;
}

inline DiscreteField build_field(const BoxDomain& dom, const FieldSpec& s) {
    if (s.family == "constant") return build_constant(dom, s.c, s.on_sphere);
    if (s.family == "linear") return build_linear(dom, s.A, s.on_sphere);
    if (s.family == "helix") return build_helix(dom, s.k, s.axis);
    if (s.family == "skyrmion_bubble") return build_skyrmion_bubble(dom, s.radius, s.chirality);
    if (s.family == "random_bandlimited")
        return build_random_bandlimited(dom, s.seed, s.max_frequency, s.on_sphere);
    throw input_error("unknown field family: " + s.family);
}

// ---------------------------------------------------------------------------
// Discrete derivatives: central differences inside, one-sided 3-point stencils
// at the ends (both second order, exact on affine fields).
// ---------------------------------------------------------------------------

namespace detail {

// Applies the 1D derivative along `axis` to every grid line; `transpose` applies
// the adjoint of the same matrix (needed for gradients of quadratic forms).
inline DiscreteField apply_derivative(const DiscreteField& f, int axis, bool transpose) {
    const BoxDomain& d = f.dom;
    int na = d.n[axis];
    double inv2h = 1.0 / (2.0 * d.h(axis));
    DiscreteField out(d);
    out.on_sphere = false;

    std::array<std::size_t, 3> stride{static_cast<std::size_t>(d.n[1]) * d.n[2],
                                      static_cast<std::size_t>(d.n[2]), 1};
    std::size_t sa = stride[axis];
    // enumerate lines: iterate all cells with index 0 along `axis`
    std::array<int, 2> other{};
    int o = 0;
    for (int a = 0; a < 3; ++a)
        if (a != axis) other[o++] = a;

    std::size_t n_lines = static_cast<std::size_t>(d.n[other[0]]) * d.n[other[1]];
    parallel_for(n_lines, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t line = lo; line < hi; ++line) {
            int i0 = static_cast<int>(line / d.n[other[1]]);
            int i1 = static_cast<int>(line % d.n[other[1]]);
            std::size_t base = stride[other[0]] * i0 + stride[other[1]] * i1;
            auto src = [&](int t) -> const vec3& { return f.v[base + sa * t]; };
            auto dst = [&](int t) -> vec3& { return out.v[base + sa * t]; };
            if (!transpose) {
                dst(0) = inv2h * (-3.0 * src(0) + 4.0 * src(1) - src(2));
                for (int t = 1; t < na - 1; ++t) dst(t) = inv2h * (src(t + 1) - src(t - 1));
                dst(na - 1) =
                    inv2h * (3.0 * src(na - 1) - 4.0 * src(na - 2) + src(na - 3));
            } else {
                for (int t = 0; t < na; ++t) dst(t) = {};
                // scatter each row of D into the output (adjoint accumulation)
                dst(0) += inv2h * -3.0 * src(0);
                dst(1) += inv2h * 4.0 * src(0);
                dst(2) += inv2h * -1.0 * src(0);
                for (int t = 1; t < na - 1; ++t) {
                    dst(t - 1) += inv2h * -1.0 * src(t);
                    dst(t + 1) += inv2h * 1.0 * src(t);
                }
                dst(na - 1) += inv2h * 3.0 * src(na - 1);
                dst(na - 2) += inv2h * -4.0 * src(na - 1);
                dst(na - 3) += inv2h * 1.0 * src(na - 1);
            }
        }
    });
    return out;
}

}  // namespace detail

inline DiscreteField discrete_derivative(const DiscreteField& f, int axis) {
    if (axis < 1 || axis > 3) throw input_error("derivative axis must be 1, 2, or 3");
    return detail::apply_derivative(f, axis - 1, false);
}

inline DiscreteField derivative_transpose_apply(const DiscreteField& f, int axis) {
    if (axis < 1 || axis > 3) throw input_error("derivative axis must be 1, 2, or 3");
    return detail::apply_derivative(f, axis - 1, true);
}

inline std::array<DiscreteField, 3> discrete_gradient(const DiscreteField& f) {
    return {discrete_derivative(f, 1), discrete_derivative(f, 2), discrete_derivative(f, 3)};
}

// ---------------------------------------------------------------------------
// Norms (cell-volume-weighted midpoint sums)
// ---------------------------------------------------------------------------

inline double l2_norm_sq(const DiscreteField& f) {
    neumaier acc = parallel_reduce<neumaier>(
        f.v.size(),
        [&](std::size_t lo, std::size_t hi, neumaier& s) {
            for (std::size_t c = lo; c < hi; ++c) s.add(norm2(f.v[c]));
        },
        [](neumaier& a, const neumaier& b) { a.merge(b); });
    return f.dom.cell_volume() * acc.value();
}

inline double h1_seminorm_sq(const DiscreteField& f) {
    double total = 0;
    for (int a = 1; a <= 3; ++a) total += l2_norm_sq(discrete_derivative(f, a));
    return total;
}

inline double h1_norm_sq(const DiscreteField& f) { return l2_norm_sq(f) + h1_seminorm_sq(f); }

// ---------------------------------------------------------------------------
// Plain-text field I/O: one row per cell, "i j k mx my mz".
// ---------------------------------------------------------------------------

inline void save_field_text(const DiscreteField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot open field file for writing: " + path);
    char buf[160];
    for (int i = 0; i < f.dom.n[0]; ++i)
        for (int j = 0; j < f.dom.n[1]; ++j)
            for (int k = 0; k < f.dom.n[2]; ++k) {
                const vec3& m = f.at(i, j, k);
                std::snprintf(buf, sizeof buf, "%d %d %d %.17g %.17g %.17g\n", i, j, k, m.x,
                              m.y, m.z);
                out << buf;
            }
}

inline DiscreteField load_field_text(const BoxDomain& dom, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open field file: " + path);
    DiscreteField f(dom);
    std::vector<bool> seen(dom.cells(), false);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        int i, j, k;
        vec3 m;
        if (!(ss >> i >> j >> k >> m.x >> m.y >> m.z))
            throw input_error("malformed field row: " + line);
        if (i < 0 || i >= dom.n[0] || j < 0 || j >= dom.n[1] || k < 0 || k >= dom.n[2])
            throw input_error("field row indices out of range: " + line);
        std::size_t idx = dom.index(i, j, k);
        f.v[idx] = m;
        seen[idx] = true;
    }
    for (bool s : seen)
        if (!s) throw input_error("field file does not cover every cell: " + path);
    return f;
}

}  // namespace nlx
