#pragma once

// Forward-mode scalar types: Dual carries one directional derivative,
// HyperDual carries two plus the mixed second derivative.  Seeding the same
// variable in both slots of a HyperDual makes d12 the pure second derivative.
// Domain checks live in the expression evaluator, not here.

#include <cmath>

namespace mwalk::detail {

struct Dual {
    double v = 0.0;
    double d = 0.0;
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.v * b.d + a.d * b.v}; }
inline Dual operator/(Dual a, Dual b) {
    double inv = 1.0 / b.v;
    double q = a.v * inv;
    return {q, (a.d - q * b.d) * inv};
}

// g(u) with g' supplied by the caller via the chain rule.
inline Dual chain(Dual u, double g, double dg) { return {g, dg * u.d}; }

inline Dual sin(Dual a) { return chain(a, std::sin(a.v), std::cos(a.v)); }
inline Dual cos(Dual a) { return chain(a, std::cos(a.v), -std::sin(a.v)); }
inline Dual exp(Dual a) { double e = std::exp(a.v); return chain(a, e, e); }
inline Dual log(Dual a) { return chain(a, std::log(a.v), 1.0 / a.v); }
inline Dual sqrt(Dual a) {
    double s = std::sqrt(a.v);
    return chain(a, s, 0.5 / s);
}

struct HyperDual {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d12 = 0.0;
};

inline HyperDual operator+(const HyperDual& a, const HyperDual& b) {
    return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d12 + b.d12};
}
inline HyperDual operator-(const HyperDual& a, const HyperDual& b) {
    return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.d12 - b.d12};
}
inline HyperDual operator-(const HyperDual& a) { return {-a.v, -a.d1, -a.d2, -a.d12}; }
inline HyperDual operator*(const HyperDual& a, const HyperDual& b) {
    return {a.v * b.v,
            a.v * b.d1 + a.d1 * b.v,
            a.v * b.d2 + a.d2 * b.v,
            a.v * b.d12 + a.d1 * b.d2 + a.d2 * b.d1 + a.d12 * b.v};
}

// g(u) given g, g', g'':  d12 = g'·u12 + g''·u1·u2.
inline HyperDual chain(const HyperDual& u, double g, double dg, double ddg) {
    return {g, dg * u.d1, dg * u.d2, dg * u.d12 + ddg * u.d1 * u.d2};
}

inline HyperDual operator/(const HyperDual& a, const HyperDual& b) {
    double inv = 1.0 / b.v;
    HyperDual r = chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
    return a * r;
}

inline HyperDual sin(const HyperDual& a) {
    double s = std::sin(a.v), c = std::cos(a.v);
    return chain(a, s, c, -s);
}
inline HyperDual cos(const HyperDual& a) {
    double s = std::sin(a.v), c = std::cos(a.v);
    return chain(a, c, -s, -c);
}
inline HyperDual exp(const HyperDual& a) {
    double e = std::exp(a.v);
    return chain(a, e, e, e);
}
inline HyperDual log(const HyperDual& a) {
    double inv = 1.0 / a.v;
    return chain(a, std::log(a.v), inv, -inv * inv);
}
inline HyperDual sqrt(const HyperDual& a) {
    double s = std::sqrt(a.v);
    return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

// v^c for constant c, exact at integer exponents including negative bases.
inline double pow_const(double v, double c) {
    double r = std::rint(c);
    if (r == c && std::fabs(r) <= 16.0) {
        double base = v, out = 1.0;
        long n = static_cast<long>(r), k = n < 0 ? -n : n;
        while (k > 0) {
            if (k & 1) out *= base;
            base *= base;
            k >>= 1;
        }
        return n < 0 ? 1.0 / out : out;
    }
    return std::pow(v, c);
}

inline Dual pow_const(Dual a, double c) {
    if (c == 0.0) return {1.0, 0.0};
    return chain(a, pow_const(a.v, c), c * pow_const(a.v, c - 1.0));
}

inline HyperDual pow_const(const HyperDual& a, double c) {
    if (c == 0.0) return {1.0, 0.0, 0.0, 0.0};
    return chain(a, pow_const(a.v, c), c * pow_const(a.v, c - 1.0),
                 c * (c - 1.0) * pow_const(a.v, c - 2.0));
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }
inline double value_of(const HyperDual& x) { return x.v; }

}  // namespace mwalk::detail
