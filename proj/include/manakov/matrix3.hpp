#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace manakov {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

/// Dense 3x3 complex matrix, row-major. Value type; all operations are pure.
struct Complex3x3 {
    std::array<cplx, 9> a{};

    constexpr cplx& operator()(int r, int c) { return a[3 * r + c]; }
    constexpr const cplx& operator()(int r, int c) const { return a[3 * r + c]; }

    static constexpr Complex3x3 identity() {
        Complex3x3 m;
        m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
        return m;
    }
    static constexpr Complex3x3 zero() { return {}; }
    static constexpr Complex3x3 diag(cplx d0, cplx d1, cplx d2) {
        Complex3x3 m;
        m(0, 0) = d0;
        m(1, 1) = d1;
        m(2, 2) = d2;
        return m;
    }

    Complex3x3& operator+=(const Complex3x3& o) {
        for (int k = 0; k < 9; ++k) a[k] += o.a[k];
        return *this;
    }
    Complex3x3& operator-=(const Complex3x3& o) {
        for (int k = 0; k < 9; ++k) a[k] -= o.a[k];
        return *this;
    }
    Complex3x3& operator*=(cplx s) {
        for (auto& e : a) e *= s;
        return *this;
    }
};

inline Complex3x3 operator+(Complex3x3 x, const Complex3x3& y) { return x += y; }
inline Complex3x3 operator-(Complex3x3 x, const Complex3x3& y) { return x -= y; }
inline Complex3x3 operator*(Complex3x3 x, cplx s) { return x *= s; }
inline Complex3x3 operator*(cplx s, Complex3x3 x) { return x *= s; }

inline Complex3x3 operator*(const Complex3x3& x, const Complex3x3& y) {
    Complex3x3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j) + x(i, 2) * y(2, j);
    return r;
}

using Vec3 = std::array<cplx, 3>;

inline Vec3 operator*(const Complex3x3& m, const Vec3& v) {
    return {m(0, 0) * v[0] + m(0, 1) * v[1] + m(0, 2) * v[2],
            m(1, 0) * v[0] + m(1, 1) * v[1] + m(1, 2) * v[2],
            m(2, 0) * v[0] + m(2, 1) * v[1] + m(2, 2) * v[2]};
}

inline cplx det(const Complex3x3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

/// Determinant of the matrix with the given columns.
inline cplx det_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    return c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1]) +
           c2[0] * (c0[1] * c1[2] - c0[2] * c1[1]);
}

/// Closed-form inverse via the adjugate. Caller checks det != 0.
inline Complex3x3 inverse(const Complex3x3& m) {
    Complex3x3 adj;
    adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
    adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
    adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
    adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
    adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
    adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const cplx d = m(0, 0) * adj(0, 0) + m(0, 1) * adj(1, 0) + m(0, 2) * adj(2, 0);
    return adj * (1.0 / d);
}

inline Complex3x3 adjoint(const Complex3x3& m) {
    Complex3x3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = std::conj(m(j, i));
    return r;
}

inline double max_abs(const Complex3x3& m) {
    double r = 0.0;
    for (const auto& e : m.a) r = std::max(r, std::abs(e));
    return r;
}

inline double max_abs_diff(const Complex3x3& x, const Complex3x3& y) { return max_abs(x - y); }

inline bool all_finite(const Complex3x3& m) {
    for (const auto& e : m.a)
        if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
    return true;
}

/// J_eps = diag(1, eps, eps).
inline Complex3x3 j_eps(int epsilon) { return Complex3x3::diag(1.0, double(epsilon), double(epsilon)); }

/// exp(t ad sigma) B with sigma = diag(-1, 1, 1): entries (1,2),(1,3) scale by e^{-2t},
/// entries (2,1),(3,1) by e^{2t}; everything else is untouched.
inline Complex3x3 ad_sigma_exp(cplx t, Complex3x3 b) {
    const cplx up = std::exp(2.0 * t);
    const cplx dn = std::exp(-2.0 * t);
    b(0, 1) *= dn;
    b(0, 2) *= dn;
    b(1, 0) *= up;
    b(2, 0) *= up;
    return b;
}

/// Potential matrix U = [[0, u, v], [-eps u*, 0, 0], [-eps v*, 0, 0]].
inline Complex3x3 potential_matrix(cplx u, cplx v, int epsilon) {
    Complex3x3 m;
    m(0, 1) = u;
    m(0, 2) = v;
    m(1, 0) = -double(epsilon) * std::conj(u);
    m(2, 0) = -double(epsilon) * std::conj(v);
    return m;
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
/// Independent of the structured closed form used by the Jost stepper.
Complex3x3 expm_taylor(const Complex3x3& a);

}  // namespace manakov
