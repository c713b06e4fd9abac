#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

// Certified scalar arithmetic: nearest-rounded operations inflated by a
// deterministic ulp count in the required direction, plus an exact rational
// rail for values that stay rational along a derivation chain.  No hardware
// rounding-mode switching, so results are bit-reproducible across platforms.

namespace mrbound {

// Recorded in every certificate; replay refuses certificates produced under a
// different rounding scheme.
inline constexpr const char* kEngineVersion =
    "mrbound/1.0 round=nearest+ulp(arith:1,log2:2)";

namespace rnd {

inline double up(double x) {
    return std::nextafter(x, std::numeric_limits<double>::infinity());
}

inline double down(double x) {
    return std::nextafter(x, -std::numeric_limits<double>::infinity());
}

inline double checked(double x) {
    if (!std::isfinite(x)) throw std::overflow_error("bound overflow");
    return x;
}

// TwoSum exactness test: the rounded sum is exact iff the residual vanishes.
inline bool add_is_exact(double a, double b, double s) {
    double bv = s - a;
    double av = s - bv;
    return (a - av) + (b - bv) == 0.0;
}

inline double add_up(double a, double b) {
    double s = a + b;
    return checked(add_is_exact(a, b, s) ? s : up(s));
}

inline double add_down(double a, double b) {
    double s = a + b;
    return checked(add_is_exact(a, b, s) ? s : down(s));
}

inline double sub_up(double a, double b) { return add_up(a, -b); }
inline double sub_down(double a, double b) { return add_down(a, -b); }

inline double mul_up(double a, double b) {
    double p = a * b;
    return checked(std::fma(a, b, -p) == 0.0 ? p : up(p));
}

inline double mul_down(double a, double b) {
    double p = a * b;
    return checked(std::fma(a, b, -p) == 0.0 ? p : down(p));
}

inline double div_up(double a, double b) {
    if (b <= 0.0) throw std::domain_error("division by non-positive bound");
    double q = a / b;
    return checked(std::fma(q, b, -a) == 0.0 ? q : up(q));
}

inline double div_down(double a, double b) {
    if (b <= 0.0) throw std::domain_error("division by non-positive bound");
    double q = a / b;
    return checked(std::fma(q, b, -a) == 0.0 ? q : down(q));
}

inline double sqrt_up(double a) {
    if (a < 0.0) throw std::domain_error("sqrt of negative value");
    double s = std::sqrt(a);
    return std::fma(s, s, -a) == 0.0 ? s : up(s);
}

inline double sqrt_down(double a) {
    if (a < 0.0) throw std::domain_error("sqrt of negative value");
    double s = std::sqrt(a);
    double r = std::fma(s, s, -a) == 0.0 ? s : down(s);
    return r < 0.0 ? 0.0 : r;
}

// log2 of a positive integer.  Exact at powers of two; elsewhere libm's
// nearest result widened by 2 ulp (libm guarantees are looser than the
// IEEE-rounded core operations above).
inline double log2_up(std::int64_t n) {
    if (n < 1) throw std::domain_error("log2 of non-positive integer");
    auto u = static_cast<std::uint64_t>(n);
    if (std::has_single_bit(u)) return static_cast<double>(std::bit_width(u) - 1);
    return checked(up(up(std::log2(static_cast<double>(n)))));
}

inline double log2_down(std::int64_t n) {
    if (n < 1) throw std::domain_error("log2 of non-positive integer");
    auto u = static_cast<std::uint64_t>(n);
    if (std::has_single_bit(u)) return static_cast<double>(std::bit_width(u) - 1);
    return checked(down(down(std::log2(static_cast<double>(n)))));
}

}  // namespace rnd

// --------------------------------------------------------------------------
// Exact rational rail.  Keeps chains like (4/3)^k exact until the first
// irrational step; overflow drops the value to the float rail.

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t n, std::int64_t d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        std::int64_t g = std::gcd(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        return Rational{n, d};
    }

    static std::optional<Rational> mul(const Rational& a, const Rational& b) {
        // reduce cross factors first so intermediate products stay small
        std::int64_t g1 = std::gcd(a.num < 0 ? -a.num : a.num, b.den);
        std::int64_t g2 = std::gcd(b.num < 0 ? -b.num : b.num, a.den);
        std::int64_t n1 = a.num / g1, d2 = b.den / g1;
        std::int64_t n2 = b.num / g2, d1 = a.den / g2;
        std::int64_t n, d;
        if (__builtin_mul_overflow(n1, n2, &n)) return std::nullopt;
        if (__builtin_mul_overflow(d1, d2, &d)) return std::nullopt;
        return make(n, d);
    }

    static std::optional<Rational> add(const Rational& a, const Rational& b) {
        std::int64_t g = std::gcd(a.den, b.den);
        std::int64_t da = a.den / g;
        std::int64_t db = b.den / g;
        std::int64_t t1, t2, n, d;
        if (__builtin_mul_overflow(a.num, db, &t1)) return std::nullopt;
        if (__builtin_mul_overflow(b.num, da, &t2)) return std::nullopt;
        if (__builtin_add_overflow(t1, t2, &n)) return std::nullopt;
        if (__builtin_mul_overflow(a.den, db, &d)) return std::nullopt;
        return make(n, d);
    }

    // this <= k, exactly
    bool le_int(std::int64_t k) const {
        __int128 lhs = static_cast<__int128>(num);
        __int128 rhs = static_cast<__int128>(k) * den;
        return lhs <= rhs;
    }

    bool operator==(const Rational&) const = default;

    std::string str() const {
        return std::to_string(num) + "/" + std::to_string(den);
    }

    static std::optional<Rational> parse(std::string_view s) {
        auto slash = s.find('/');
        if (slash == std::string_view::npos || slash == 0 || slash + 1 == s.size())
            return std::nullopt;
        try {
            std::int64_t n = std::stoll(std::string(s.substr(0, slash)));
            std::int64_t d = std::stoll(std::string(s.substr(slash + 1)));
            if (d == 0) return std::nullopt;
            return make(n, d);
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
};

namespace detail {

// sign(a * 2^s - b), exact in 128-bit arithmetic with shift clamping
inline int cmp_shifted(__int128 a, int s, __int128 b) {
    if (s < 0) return -cmp_shifted(b, -s, a);
    while (s > 0) {
        constexpr __int128 kHi = static_cast<__int128>(1) << 125;
        if (a > kHi || a < -kHi) return a > 0 ? 1 : -1;  // |a*2^s| dwarfs any b
        a <<= 1;
        --s;
    }
    return a < b ? -1 : (a == b ? 0 : 1);
}

}  // namespace detail

// sign(q - num/den), exact
inline int cmp_double_rational(double q, const Rational& r) {
    if (std::isnan(q)) throw std::domain_error("NaN compared against rational");
    if (std::isinf(q)) return q > 0 ? 1 : -1;
    if (q == 0.0) return r.num == 0 ? 0 : (r.num > 0 ? -1 : 1);
    int exp = 0;
    double frac = std::frexp(q, &exp);
    auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));  // q = mant * 2^(exp-53)
    __int128 lhs = static_cast<__int128>(mant) * r.den;
    return detail::cmp_shifted(lhs, exp - 53, static_cast<__int128>(r.num));
}

// smallest double >= num/den
inline double round_up_double(const Rational& r) {
    double q = static_cast<double>(r.num) / static_cast<double>(r.den);
    while (cmp_double_rational(q, r) < 0) q = rnd::up(q);
    while (cmp_double_rational(rnd::down(q), r) >= 0) q = rnd::down(q);
    return q;
}

// largest double <= num/den
inline double round_down_double(const Rational& r) {
    double q = static_cast<double>(r.num) / static_cast<double>(r.den);
    while (cmp_double_rational(q, r) > 0) q = rnd::down(q);
    while (cmp_double_rational(rnd::up(q), r) <= 0) q = rnd::up(q);
    return q;
}

// --------------------------------------------------------------------------

/// A certified numeric value.  `hi` is the value of record: every operation
/// guarantees hi >= the exact real result.  `lo` is an informational lower
/// enclosure.  When the value is exactly rational, `exact` carries it and
/// lo/hi are the tightest doubles around it.
class BoundValue {
public:
    BoundValue() = default;

    static BoundValue make(double lo, double hi) {
        if (!std::isfinite(lo) || !std::isfinite(hi))
            throw std::overflow_error("bound overflow");
        if (lo > hi) throw std::logic_error("BoundValue with lo > hi");
        BoundValue v;
        v.lo_ = lo;
        v.hi_ = hi;
        return v;
    }

    static BoundValue from_rational(const Rational& r) {
        BoundValue v;
        v.lo_ = round_down_double(r);
        v.hi_ = round_up_double(r);
        v.exact_ = r;
        return v;
    }

    static BoundValue one() { return from_rational(Rational{1, 1}); }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::optional<Rational>& exact() const { return exact_; }

    bool operator==(const BoundValue&) const = default;

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
    std::optional<Rational> exact_;
};

inline BoundValue iv_add(const BoundValue& a, const BoundValue& b) {
    if (a.exact() && b.exact()) {
        if (auto r = Rational::add(*a.exact(), *b.exact()))
            return BoundValue::from_rational(*r);
    }
    return BoundValue::make(rnd::add_down(a.lo(), b.lo()),
                            rnd::add_up(a.hi(), b.hi()));
}

inline BoundValue iv_mul(const BoundValue& a, const BoundValue& b) {
    if (a.exact() && b.exact()) {
        if (auto r = Rational::mul(*a.exact(), *b.exact()))
            return BoundValue::from_rational(*r);
    }
    double hi = std::max({rnd::mul_up(a.lo(), b.lo()), rnd::mul_up(a.lo(), b.hi()),
                          rnd::mul_up(a.hi(), b.lo()), rnd::mul_up(a.hi(), b.hi())});
    double lo = std::min({rnd::mul_down(a.lo(), b.lo()), rnd::mul_down(a.lo(), b.hi()),
                          rnd::mul_down(a.hi(), b.lo()), rnd::mul_down(a.hi(), b.hi())});
    return BoundValue::make(lo, hi);
}

inline BoundValue iv_sqrt(const BoundValue& a) {
    if (a.hi() < 0.0) throw std::domain_error("sqrt of negative value");
    return BoundValue::make(rnd::sqrt_down(std::max(a.lo(), 0.0)),
                            rnd::sqrt_up(a.hi()));
}

inline BoundValue iv_log2(std::int64_t n) {
    if (n >= 1 && std::has_single_bit(static_cast<std::uint64_t>(n))) {
        auto k = static_cast<std::int64_t>(
            std::bit_width(static_cast<std::uint64_t>(n)) - 1);
        return BoundValue::from_rational(Rational{k, 1});
    }
    return BoundValue::make(rnd::log2_down(n), rnd::log2_up(n));
}

// --------------------------------------------------------------------------
// Bit-exact double serialization helpers shared by the certificate format.

inline std::string double_to_hex(double d) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(d)));
    return buf;
}

inline std::optional<double> double_from_hex(std::string_view s) {
    if (s.size() != 16) return std::nullopt;
    std::uint64_t bits = 0;
    for (char c : s) {
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
        else return std::nullopt;
        bits = (bits << 4) | static_cast<std::uint64_t>(v);
    }
    return std::bit_cast<double>(bits);
}

inline std::string double_to_dec(double d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

// Decimal display that never understates an upper bound.
inline std::string format_upper(double v, int places = 6) {
    long double scale = std::pow(10.0L, places);
    long double r = std::ceil(static_cast<long double>(v) * scale) / scale;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*Lf", places, r);
    return buf;
}

}  // namespace mrbound
