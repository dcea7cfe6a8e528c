#pragma once

#include <array>
#include <cmath>

namespace nlx {

struct vec3 {
    double x = 0, y = 0, z = 0;

    double&       operator[](int i)       { return i == 0 ? x : (i == 1 ? y : z); }
    const double& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    vec3& operator+=(const vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    vec3& operator-=(const vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    vec3& operator*=(double s)      { x *= s; y *= s; z *= s; return *this; }
};

inline vec3 operator+(vec3 a, const vec3& b) { return a += b; }
inline vec3 operator-(vec3 a, const vec3& b) { return a -= b; }
inline vec3 operator*(double s, vec3 a)      { return a *= s; }
inline vec3 operator*(vec3 a, double s)      { return a *= s; }
inline vec3 operator/(vec3 a, double s)      { return a *= (1.0 / s); }
inline vec3 operator-(const vec3& a)         { return {-a.x, -a.y, -a.z}; }

inline double dot(const vec3& a, const vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline vec3   cross(const vec3& a, const vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const vec3& a) { return dot(a, a); }
inline double norm(const vec3& a)  { return std::sqrt(dot(a, a)); }

inline bool finite(const vec3& a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

// 3x3 matrix, row-major; enough linear algebra for the energy forms.
struct mat3 {
    std::array<double, 9> a{};  // a[3*r+c]

    double&       operator()(int r, int c)       { return a[3 * r + c]; }
    const double& operator()(int r, int c) const { return a[3 * r + c]; }

    static mat3 identity(double s = 1.0) {
        mat3 m;
        m(0, 0) = m(1, 1) = m(2, 2) = s;
        return m;
    }
    static mat3 zero() { return {}; }

    vec3 col(int c) const { return {a[c], a[3 + c], a[6 + c]}; }
    vec3 row(int r) const { return {a[3 * r], a[3 * r + 1], a[3 * r + 2]}; }

    mat3 transposed() const {
        mat3 t;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) t(r, c) = (*this)(c, r);
        return t;
    }
};

inline vec3 operator*(const mat3& m, const vec3& v) {
    return {dot(m.row(0), v), dot(m.row(1), v), dot(m.row(2), v)};
}

inline mat3 operator+(const mat3& x, const mat3& y) {
    mat3 r;
    for (int i = 0; i < 9; ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
}

inline mat3 operator-(const mat3& x, const mat3& y) {
    mat3 r;
    for (int i = 0; i < 9; ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
}

inline mat3 operator*(double s, const mat3& m) {
    mat3 r;
    for (int i = 0; i < 9; ++i) r.a[i] = s * m.a[i];
    return r;
}

inline double trace(const mat3& m) { return m(0, 0) + m(1, 1) + m(2, 2); }

inline double frobenius2(const mat3& m) {
    double s = 0;
    for (double e : m.a) s += e * e;
    return s;
}

inline double max_abs(const mat3& m) {
    double s = 0;
    for (double e : m.a) s = std::max(s, std::abs(e));
    return s;
}

inline double max_asymmetry(const mat3& m) {
    double s = 0;
    for (int r = 0; r < 3; ++r)
        for (int c = r + 1; c < 3; ++c) s = std::max(s, std::abs(m(r, c) - m(c, r)));
    return s;
}

}  // namespace nlx
