#pragma once

// Small forward-mode differentiation types.
//
// Jet2 carries a value with its first and second partials in two variables
// (s1, s2); it is used to evaluate closed-form conformal factors together with
// the derivatives the sigma_k operator needs. Dual<N> carries first partials
// in N variables and is used for pointwise Jacobians.

#include <array>
#include <cmath>

namespace sigmak {

struct Jet2 {
    double v = 0, d1 = 0, d2 = 0, d11 = 0, d12 = 0, d22 = 0;

    Jet2() = default;
    Jet2(double c) : v(c) {}  // NOLINT(google-explicit-constructor)
    Jet2(double v_, double d1_, double d2_, double d11_, double d12_, double d22_)
        : v(v_), d1(d1_), d2(d2_), d11(d11_), d12(d12_), d22(d22_) {}

    static Jet2 var1(double x) { return {x, 1, 0, 0, 0, 0}; }
    static Jet2 var2(double x) { return {x, 0, 1, 0, 0, 0}; }
    /// Function of s1 alone with derivatives f, f', f''.
    static Jet2 of1(double f, double fp, double fpp) { return {f, fp, 0, fpp, 0, 0}; }
    /// Function of s2 alone.
    static Jet2 of2(double f, double fp, double fpp) { return {f, 0, fp, 0, 0, fpp}; }

    Jet2& operator+=(const Jet2& o) {
        v += o.v; d1 += o.d1; d2 += o.d2; d11 += o.d11; d12 += o.d12; d22 += o.d22;
        return *this;
    }
    Jet2& operator-=(const Jet2& o) {
        v -= o.v; d1 -= o.d1; d2 -= o.d2; d11 -= o.d11; d12 -= o.d12; d22 -= o.d22;
        return *this;
    }
};

inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.d1, -a.d2, -a.d11, -a.d12, -a.d22}; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.v * b.v,
            a.d1 * b.v + a.v * b.d1,
            a.d2 * b.v + a.v * b.d2,
            a.d11 * b.v + 2 * a.d1 * b.d1 + a.v * b.d11,
            a.d12 * b.v + a.d1 * b.d2 + a.d2 * b.d1 + a.v * b.d12,
            a.d22 * b.v + 2 * a.d2 * b.d2 + a.v * b.d22};
}

/// Chain rule: f(g) given f(g.v), f'(g.v), f''(g.v).
inline Jet2 compose(const Jet2& g, double f, double fp, double fpp) {
    return {f,
            fp * g.d1,
            fp * g.d2,
            fpp * g.d1 * g.d1 + fp * g.d11,
            fpp * g.d1 * g.d2 + fp * g.d12,
            fpp * g.d2 * g.d2 + fp * g.d22};
}

inline Jet2 inv(const Jet2& a) {
    const double i = 1.0 / a.v;
    return compose(a, i, -i * i, 2 * i * i * i);
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * inv(b); }
inline Jet2 exp(const Jet2& a) {
    const double e = std::exp(a.v);
    return compose(a, e, e, e);
}
inline Jet2 log(const Jet2& a) { return compose(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
inline Jet2 pow(const Jet2& a, double p) {
    const double f = std::pow(a.v, p);
    return compose(a, f, p * f / a.v, p * (p - 1) * f / (a.v * a.v));
}
inline Jet2 sqrt(const Jet2& a) { return pow(a, 0.5); }
inline Jet2 cos(const Jet2& a) { return compose(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet2 sin(const Jet2& a) { return compose(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }

/// atan2(y, x) with jets in both arguments.
inline Jet2 atan2(const Jet2& y, const Jet2& x) {
    const double r2 = x.v * x.v + y.v * y.v;
    // First derivatives of theta(x, y): dth/dx = -y/r2, dth/dy = x/r2.
    const double tx = -y.v / r2, ty = x.v / r2;
    const double txx = 2 * x.v * y.v / (r2 * r2), tyy = -txx;
    const double txy = (y.v * y.v - x.v * x.v) / (r2 * r2);
    Jet2 out;
    out.v = std::atan2(y.v, x.v);
    out.d1 = tx * x.d1 + ty * y.d1;
    out.d2 = tx * x.d2 + ty * y.d2;
    out.d11 = txx * x.d1 * x.d1 + 2 * txy * x.d1 * y.d1 + tyy * y.d1 * y.d1 + tx * x.d11 + ty * y.d11;
    out.d12 = txx * x.d1 * x.d2 + txy * (x.d1 * y.d2 + x.d2 * y.d1) + tyy * y.d1 * y.d2 + tx * x.d12 + ty * y.d12;
    out.d22 = txx * x.d2 * x.d2 + 2 * txy * x.d2 * y.d2 + tyy * y.d2 * y.d2 + tx * x.d22 + ty * y.d22;
    return out;
}

/// Complex number with Jet2 parts (meridian-plane points).
struct CJet {
    Jet2 re, im;
};
inline CJet operator+(const CJet& a, const CJet& b) { return {a.re + b.re, a.im + b.im}; }
inline CJet operator-(const CJet& a, const CJet& b) { return {a.re - b.re, a.im - b.im}; }
inline CJet operator*(const CJet& a, const CJet& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline CJet operator*(const CJet& a, const Jet2& s) { return {a.re * s, a.im * s}; }
inline CJet conj(const CJet& a) { return {a.re, -a.im}; }
inline Jet2 abs2(const CJet& a) { return a.re * a.re + a.im * a.im; }
inline CJet cinv(const CJet& a) {
    const Jet2 m = inv(abs2(a));
    return {a.re * m, -a.im * m};
}

template <int N>
struct Dual {
    double v = 0;
    std::array<double, N> d{};

    Dual() = default;
    Dual(double c) : v(c) {}  // NOLINT(google-explicit-constructor)
    static Dual var(double x, int i) {
        Dual r(x);
        r.d[i] = 1.0;
        return r;
    }
};

template <int N>
inline Dual<N> operator+(const Dual<N>& a, const Dual<N>& b) {
    Dual<N> r(a.v + b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
}
template <int N>
inline Dual<N> operator-(const Dual<N>& a, const Dual<N>& b) {
    Dual<N> r(a.v - b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
}
template <int N>
inline Dual<N> operator-(const Dual<N>& a) {
    Dual<N> r(-a.v);
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
}
template <int N>
inline Dual<N> operator*(const Dual<N>& a, const Dual<N>& b) {
    Dual<N> r(a.v * b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}
template <int N>
inline Dual<N> operator*(double s, const Dual<N>& a) {
    Dual<N> r(s * a.v);
    for (int i = 0; i < N; ++i) r.d[i] = s * a.d[i];
    return r;
}
template <int N>
inline Dual<N> operator*(const Dual<N>& a, double s) {
    return s * a;
}
template <int N>
inline Dual<N> operator/(const Dual<N>& a, const Dual<N>& b) {
    Dual<N> r(a.v / b.v);
    for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
    return r;
}
template <int N>
inline Dual<N> pow(const Dual<N>& a, double p) {
    const double f = std::pow(a.v, p);
    const double fp = p * std::pow(a.v, p - 1);
    Dual<N> r(f);
    for (int i = 0; i < N; ++i) r.d[i] = fp * a.d[i];
    return r;
}

inline double value_of(double x) { return x; }
template <int N>
inline double value_of(const Dual<N>& x) {
    return x.v;
}

}  // namespace sigmak
