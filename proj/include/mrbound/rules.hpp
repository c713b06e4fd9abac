#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>

#include "mrbound/certificate.hpp"
#include "mrbound/interval.hpp"

// The bound recursions, each as a pure function from certified values at
// smaller indices to a certified value at a larger index.  Upper endpoints are
// rounded so the output hi dominates the exact formula value; denominators of
// quotients are rounded down, everything else up.

namespace mrbound {

struct RuleEval {
    bool applicable = false;
    std::string reason;  // set when not applicable
    BoundValue output;
};

inline RuleEval not_applicable(std::string why) {
    return RuleEval{false, std::move(why), {}};
}

/// D_1 = 1 and D_2 = 4/3, both exact on the rational rail.
inline RuleEval rule_base(std::int64_t n) {
    if (n == 1) return {true, {}, BoundValue::one()};
    if (n == 2) return {true, {}, BoundValue::from_rational(Rational{4, 3})};
    return not_applicable("base rule defined only for n in {1,2}");
}

/// Bisection bound D_n <= (2 + log2 n)^2 for n >= 2.
inline RuleEval rule_doob(std::int64_t n) {
    if (n < 2) return not_applicable("bisection bound needs n >= 2");
    double tu = rnd::add_up(2.0, rnd::log2_up(n));
    double td = rnd::add_down(2.0, rnd::log2_down(n));
    return {true, {}, BoundValue::make(rnd::mul_down(td, td), rnd::mul_up(tu, tu))};
}

/// Trisection bound D_n <= (log2 n / log2 3 + 2)^2 for n >= 2.
inline RuleEval rule_kounias(std::int64_t n) {
    if (n < 2) return not_applicable("trisection bound needs n >= 2");
    double qu = rnd::div_up(rnd::log2_up(n), rnd::log2_down(3));
    double qd = rnd::div_down(rnd::log2_down(n), rnd::log2_up(3));
    double tu = rnd::add_up(qu, 2.0);
    double td = rnd::add_down(qd, 2.0);
    return {true, {}, BoundValue::make(rnd::mul_down(td, td), rnd::mul_up(tu, tu))};
}

namespace detail {

inline double cls_sqrt_branch_up(double hi) {
    double s = rnd::sqrt_up(rnd::sub_up(hi, 0.75));
    double t = rnd::add_up(s, 0.5);
    return rnd::mul_up(t, t);
}

inline double cls_sqrt_branch_down(double lo) {
    double inner = std::max(rnd::sub_down(lo, 0.75), 0.0);
    double t = rnd::add_down(rnd::sqrt_down(inner), 0.5);
    return rnd::mul_down(t, t);
}

}  // namespace detail

/// Doubling recursion: D_{2n} <= 4/3 D_n while D_n <= 3, and
/// D_{2n} <= (sqrt(D_n - 3/4) + 1/2)^2 beyond; the branches agree at 3.
/// The square-root form is not a valid bound below 3 (applied at D_1 = 1 it
/// would force D_2 <= 1, contradicting D_2 = 4/3), so the threshold is hard.
inline RuleEval rule_cls_double(const BoundValue& d_n) {
    if (d_n.hi() < 0.75)
        throw std::domain_error("doubling rule input below 3/4: corrupt D value");
    if (d_n.exact()) {
        if (d_n.exact()->le_int(3)) {
            if (auto r = Rational::mul(*d_n.exact(), Rational{4, 3}))
                return {true, {}, BoundValue::from_rational(*r)};
        } else {
            return {true, {},
                    BoundValue::make(detail::cls_sqrt_branch_down(d_n.lo()),
                                     detail::cls_sqrt_branch_up(d_n.hi()))};
        }
    }
    if (d_n.hi() <= 3.0) {
        // 4*x is exact; only the /3 rounds
        double hi = rnd::div_up(4.0 * d_n.hi(), 3.0);
        double lo = rnd::div_down(4.0 * d_n.lo(), 3.0);
        return {true, {}, BoundValue::make(lo, hi)};
    }
    return {true, {},
            BoundValue::make(detail::cls_sqrt_branch_down(d_n.lo()),
                             detail::cls_sqrt_branch_up(d_n.hi()))};
}

struct ComposeEval {
    bool applicable = false;
    std::string reason;
    std::int64_t index = 0;
    BoundValue value;
};

/// Block composition: sqrt(D_{n(2m+l)}) <= sqrt(D_n) + sqrt(max{D_m, 2 D_{l-1}}),
/// strengthened to sqrt(D_n) + sqrt(D_m) when l = 2.
inline ComposeEval rule_bednorz_compose(const BoundValue& d_n, std::int64_t n,
                                        const BoundValue& d_m, std::int64_t m,
                                        const std::optional<BoundValue>& d_lminus1,
                                        std::int64_t l) {
    if (l < 2) return {false, "composition needs l >= 2", 0, {}};
    if (n < 1 || m < 1) return {false, "composition needs n, m >= 1", 0, {}};
    if (l > 2 && !d_lminus1)
        throw std::invalid_argument("composition with l > 2 requires a bound on D_{l-1}");
    std::int64_t p = 2 * m + l;
    std::int64_t index;
    if (__builtin_mul_overflow(n, p, &index))
        throw std::overflow_error("bound overflow");
    double inner_hi = d_m.hi();
    double inner_lo = d_m.lo();
    if (l > 2) {
        inner_hi = std::max(inner_hi, rnd::checked(2.0 * d_lminus1->hi()));
        inner_lo = std::max(inner_lo, 2.0 * d_lminus1->lo());
    }
    double su = rnd::add_up(rnd::sqrt_up(d_n.hi()), rnd::sqrt_up(inner_hi));
    double sd = rnd::add_down(rnd::sqrt_down(d_n.lo()), rnd::sqrt_down(std::max(inner_lo, 0.0)));
    return {true, {}, index,
            BoundValue::make(rnd::mul_down(sd, sd), rnd::mul_up(su, su))};
}

/// Interpolation: D_n <= D_m (2 + (log2 n - log2 m) / log2(2m+2))^2 for n >= m.
inline RuleEval rule_corollary1(const BoundValue& d_m, std::int64_t m, std::int64_t n) {
    if (m < 1) return not_applicable("interpolation needs m >= 1");
    if (n < m) return not_applicable("interpolation needs n >= m");
    double num_u = rnd::sub_up(rnd::log2_up(n), rnd::log2_down(m));
    double num_d = std::max(rnd::sub_down(rnd::log2_down(n), rnd::log2_up(m)), 0.0);
    double den_d = rnd::log2_down(2 * m + 2);
    double den_u = rnd::log2_up(2 * m + 2);
    double tu = rnd::add_up(2.0, rnd::div_up(num_u, den_d));
    double td = rnd::add_down(2.0, rnd::div_down(num_d, den_u));
    double hi = rnd::mul_up(d_m.hi(), rnd::mul_up(tu, tu));
    double lo = rnd::mul_down(d_m.lo(), rnd::mul_down(td, td));
    return {true, {}, BoundValue::make(lo, hi)};
}

/// D is nondecreasing in n (pad with zero variables), so a bound at n covers
/// every target <= n unchanged.
inline RuleEval rule_monotone(const BoundValue& d_n, std::int64_t n, std::int64_t target) {
    if (target > n) return not_applicable("monotone lift only re-indexes downward");
    if (target < 1) return not_applicable("target must be positive");
    return {true, {}, d_n};
}

/// A bound on C = limsup D_n / log2^2 n, with its witness parameters.
struct CBound {
    BoundValue value;
    std::int64_t witness_m = 0;
    std::int64_t witness_l = 0;
    BoundValue bound_on_dm;
    BoundValue bound_on_dl_minus_1;  // exact 1 when l = 2
};

struct CBoundEval {
    bool applicable = false;
    std::string reason;
    CBound cbound;
};

/// C <= max{D_m, 2 D_{l-1}} / log2^2(2m+l); for l = 2 the numerator is D_m
/// alone.  Denominator rounded down to keep the quotient an upper bound.
inline CBoundEval cbound_from_corollary2(const BoundValue& d_m, std::int64_t m,
                                         const std::optional<BoundValue>& d_lminus1,
                                         std::int64_t l) {
    if (l < 2) return {false, "needs l >= 2", {}};
    if (m < 1) return {false, "needs m >= 1", {}};
    if (l > 2 && !d_lminus1)
        throw std::invalid_argument("l > 2 requires a bound on D_{l-1}");
    std::int64_t p = 2 * m + l;
    double num_hi = d_m.hi();
    double num_lo = d_m.lo();
    if (l > 2) {
        num_hi = std::max(num_hi, rnd::checked(2.0 * d_lminus1->hi()));
        num_lo = std::max(num_lo, 2.0 * d_lminus1->lo());
    }
    double ld = rnd::log2_down(p);
    double lu = rnd::log2_up(p);
    double hi = rnd::div_up(num_hi, rnd::mul_down(ld, ld));
    double lo = rnd::div_down(std::max(num_lo, 0.0), rnd::mul_up(lu, lu));
    CBound cb;
    cb.value = BoundValue::make(lo, hi);
    cb.witness_m = m;
    cb.witness_l = l;
    cb.bound_on_dm = d_m;
    cb.bound_on_dl_minus_1 = (l == 2) ? BoundValue::one() : *d_lminus1;
    return {true, {}, cb};
}

}  // namespace mrbound
