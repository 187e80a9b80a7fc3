#pragma once

// Exact rational arithmetic over __int128 for oracle checks in tests.
// Keeps every value reduced; aborts loudly on overflow instead of wrapping.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace testutil {

struct Rational {
    __int128 num = 0;
    __int128 den = 1;

    Rational() = default;
    Rational(long long n) : num(n), den(1) {}
    Rational(long long n, long long d) : num(n), den(d) { reduce(); }

    static __int128 gcd128(__int128 a, __int128 b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    void reduce() {
        if (den == 0) throw std::runtime_error("rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        __int128 g = gcd128(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    static void check_mul(__int128 a, __int128 b) {
        if (a == 0 || b == 0) return;
        __int128 limit = (__int128)1 << 120;
        if ((a > 0 ? a : -a) > limit / (b > 0 ? b : -b))
            throw std::runtime_error("rational: overflow");
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        Rational r;
        check_mul(a.num, b.den);
        check_mul(b.num, a.den);
        r.num = a.num * b.den + b.num * a.den;
        check_mul(a.den, b.den);
        r.den = a.den * b.den;
        r.reduce();
        return r;
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        Rational nb = b;
        nb.num = -nb.num;
        return a + nb;
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        Rational x{};
        // Cross-reduce first to keep magnitudes small.
        __int128 g1 = gcd128(a.num, b.den), g2 = gcd128(b.num, a.den);
        __int128 an = a.num / (g1 ? g1 : 1), bd = b.den / (g1 ? g1 : 1);
        __int128 bn = b.num / (g2 ? g2 : 1), ad = a.den / (g2 ? g2 : 1);
        check_mul(an, bn);
        check_mul(ad, bd);
        x.num = an * bn;
        x.den = ad * bd;
        x.reduce();
        return x;
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        Rational inv;
        inv.num = b.den;
        inv.den = b.num;
        inv.reduce();
        return a * inv;
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }

    double to_double() const { return double(num) / double(den); }
};

} // namespace testutil
