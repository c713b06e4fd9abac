// Acceptance suite: every release criterion runs here at its stated tolerance
// and prints one PASS/FAIL line.  Exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mrbound/certifier.hpp"
#include "mrbound/ortho_sim.hpp"
#include "oracle.hpp"

using namespace mrbound;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void report(int criterion, bool ok, const std::string& what) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion,
                what.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// 1. bound(2) = 4/3 exactly via the rational rail, under 1 ms.
void criterion1() {
    auto t0 = Clock::now();
    auto cert = best_bound(2);
    double ms = ms_since(t0);
    bool exact = cert.final_bound.exact() &&
                 *cert.final_bound.exact() == Rational{4, 3};
    bool ok = exact && ms < 1.0;
    report(1, ok,
           fmt("bound(2) = %s exactly, %.3f ms (< 1 ms)",
               cert.final_bound.exact() ? cert.final_bound.exact()->str().c_str()
                                        : "<no rational>",
               ms));
}

// 2. bound(8) in [2.37037, 2.37047], under 10 ms.
void criterion2() {
    auto t0 = Clock::now();
    auto cert = best_bound(8);
    double ms = ms_since(t0);
    double hi = cert.final_bound.hi();
    bool ok = hi >= 2.37037 && hi <= 2.37047 && ms < 10.0;
    report(2, ok, fmt("bound(8) = %.17g in [2.37037, 2.37047], %.3f ms (< 10 ms)", hi, ms));
}

// 3. bound(64) in [5.5739, 5.5742], under 100 ms.
void criterion3() {
    auto t0 = Clock::now();
    auto cert = best_bound(64);
    double ms = ms_since(t0);
    double hi = cert.final_bound.hi();
    bool ok = hi >= 5.5739 && hi <= 5.5742 && ms < 100.0;
    report(3, ok, fmt("bound(64) = %.17g in [5.5739, 5.5742], %.2f ms (< 100 ms)", hi, ms));
}

// 4. best_cbound(64, 16) <= 0.11072 and < 1/9 with witness (64, 9), under 5 s.
void criterion4() {
    auto t0 = Clock::now();
    SearchBudget budget;
    budget.max_m = 64;
    budget.max_l = 16;
    auto cb = best_cbound(budget);
    double ms = ms_since(t0);
    double hi = cb.value.hi();
    bool ok = hi <= 0.11072 && hi < 1.0 / 9.0 && cb.witness_m == 64 &&
              cb.witness_l == 9 && ms < 5000.0;
    report(4, ok,
           fmt("best C = %.17g <= 0.11072, < 1/9, witness (m=%lld, l=%lld), %.1f ms (< 5 s)",
               hi, static_cast<long long>(cb.witness_m),
               static_cast<long long>(cb.witness_l), ms));
}

// 5. C bound from (m=2, l=2) in [0.19949, 0.19959] and < 1/5.
void criterion5() {
    auto d2 = best_bound(2).final_bound;
    auto ev = cbound_from_corollary2(d2, 2, std::nullopt, 2);
    double hi = ev.cbound.value.hi();
    bool ok = ev.applicable && hi >= 0.19949 && hi <= 0.19959 && hi < 0.2;
    report(5, ok, fmt("C(m=2,l=2) = %.17g in [0.19949, 0.19959], < 1/5", hi));
}

// 6. Envelope constants at tolerance 1e-5: (1/log2 3)^2 against its stated
// bracket, and 1/(pi^2 log2^2 e) in [0.048679, 0.048681].
void criterion6() {
    const double tol = 1e-5;
    double q = rnd::div_up(1.0, rnd::log2_down(3));
    double kounias_env = rnd::mul_up(q, q);
    // 100-digit value of (1/log2 3)^2, frozen: 0.39807235394174000860...
    const double kounias_ref = 0.39807235394174001;
    bool k_ok = std::abs(kounias_env - kounias_ref) <= tol &&
                kounias_env >= 0.39808 - tol && kounias_env <= 0.39810 + tol;

    double lower = 1.0 / (std::numbers::pi * std::numbers::pi *
                          std::numbers::log2e * std::numbers::log2e);
    bool l_ok = lower >= 0.048679 && lower <= 0.048681;
    report(6, k_ok && l_ok,
           fmt("envelopes: (1/log2 3)^2 = %.17g (bracket at tol 1e-5), "
               "1/(pi^2 log2^2 e) = %.17g in [0.048679, 0.048681]",
               kounias_env, lower));
}

// 7a. Pointwise lemma on 1e6 random complex quadruples.
bool prop_pointwise_lemma() {
    std::mt19937_64 rng(0xB0B5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto draw = [&] { return std::complex<double>(gauss(rng), gauss(rng)); };
    for (int it = 0; it < 1000000; ++it) {
        auto a = draw(), b = draw(), c = draw(), d = draw();
        double lhs = std::min(std::norm(a + b), std::norm(c + d));
        double rhs = std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d);
        if (!(lhs <= rhs + 1e-12 * rhs)) return false;
    }
    return true;
}

// 7b. 500 seeded systems with n in 1..16 never beat the certified bounds.
bool prop_sandwich_systems() {
    SearchBudget budget;
    budget.max_index = 64;
    BoundTable table(budget);
    for (int s = 0; s < 500; ++s) {
        std::int64_t n = 1 + s % 16;
        auto kind = s % 5 == 0 ? FieldKind::complex_field : FieldKind::real;
        auto sys = make_random_system(n, 4 * n, 77000 + static_cast<std::uint64_t>(s),
                                      kind);
        if (!(expected_running_max(sys) <= table.value_at(n).hi() + 1e-9))
            return false;
    }
    return true;
}

// 7c. Adversarial search reaches within 0.01 of the exact D_2 = 4/3.
bool prop_adversarial_d2(double* found) {
    auto adv = adversarial_lower_bound(2, 8, 50, 400, 1);
    *found = adv.value;
    return adv.value >= 1.3233;
}

// 7d. Directed primitives vs the 100-digit reference on 1e5 random inputs.
bool prop_interval_soundness() {
    std::mt19937_64 rng(0x50FD);
    std::uniform_real_distribution<double> mag(-40.0, 40.0);
    std::uniform_real_distribution<double> mant(1.0, 2.0);
    std::uniform_int_distribution<std::int64_t> ints(1, std::int64_t{1} << 48);
    for (int it = 0; it < 100000; ++it) {
        double a = std::ldexp(mant(rng), static_cast<int>(mag(rng)));
        double b = std::ldexp(mant(rng), static_cast<int>(mag(rng)));
        if (it % 2) a = -a;
        oracle::big ea(a), eb(b);
        if (!oracle::geq(rnd::add_up(a, b), ea + eb)) return false;
        if (!oracle::leq(rnd::add_down(a, b), ea + eb)) return false;
        if (!oracle::geq(rnd::sub_up(a, b), ea - eb)) return false;
        if (!oracle::leq(rnd::sub_down(a, b), ea - eb)) return false;
        if (!oracle::geq(rnd::mul_up(a, b), ea * eb)) return false;
        if (!oracle::leq(rnd::mul_down(a, b), ea * eb)) return false;
        if (!oracle::geq(rnd::div_up(a, std::abs(b)), ea / abs(eb))) return false;
        if (!oracle::leq(rnd::div_down(a, std::abs(b)), ea / abs(eb))) return false;
        if (!oracle::geq(rnd::sqrt_up(std::abs(a)), sqrt(abs(ea)))) return false;
        if (!oracle::leq(rnd::sqrt_down(std::abs(a)), sqrt(abs(ea)))) return false;
        std::int64_t n = ints(rng);
        oracle::big ln = oracle::log2b(oracle::big(n));
        if (!oracle::geq(rnd::log2_up(n), ln)) return false;
        if (!oracle::leq(rnd::log2_down(n), ln)) return false;
    }
    return true;
}

// 7e. Certificates for n in {2, 8, 64, 137, 1000} replay bit-exactly through
// JSON, and single-ulp tampering is caught.
bool prop_replay_bitexact() {
    for (std::int64_t n : {2LL, 8LL, 64LL, 137LL, 1000LL}) {
        auto cert = best_bound(n);
        auto back = certificate_from_json(to_json(cert));
        if (!(back == cert)) return false;
        auto rr = replay(back);
        if (rr.verdict != Verdict::valid) return false;
        if (std::bit_cast<std::uint64_t>(rr.final_bound.hi()) !=
            std::bit_cast<std::uint64_t>(cert.final_bound.hi()))
            return false;
    }
    auto cert = best_bound(64);
    auto j = to_json(cert);
    for (std::size_t k = 0; k < cert.steps.size(); ++k) {
        auto tampered = j;
        double hi = cert.steps[k].output_value.hi();
        tampered["steps"][k]["output"]["hi"]["hex"] = double_to_hex(rnd::down(hi));
        if (verify_certificate_json(tampered).verdict != Verdict::forged)
            return false;
    }
    auto tampered = j;
    tampered["final"]["hi"]["hex"] = double_to_hex(rnd::up(cert.final_bound.hi()));
    tampered["final"].erase("exact");
    return verify_certificate_json(tampered).verdict == Verdict::forged;
}

void criterion7() {
    auto t0 = Clock::now();
    bool a = prop_pointwise_lemma();
    bool b = prop_sandwich_systems();
    double d2_found = 0.0;
    bool c = prop_adversarial_d2(&d2_found);
    bool d = prop_interval_soundness();
    bool e = prop_replay_bitexact();
    double ms = ms_since(t0);
    bool ok = a && b && c && d && e && ms < 60000.0;
    report(7, ok,
           fmt("properties: lemma(1e6)=%s sandwich(500)=%s adversarial(D_2=%."
               "4f>=1.3233)=%s soundness(1e5)=%s replay{2,8,64,137,1000}=%s, "
               "%.0f ms (< 60 s)",
               a ? "ok" : "FAIL", b ? "ok" : "FAIL", d2_found, c ? "ok" : "FAIL",
               d ? "ok" : "FAIL", e ? "ok" : "FAIL", ms));
}

// 8. Decomposition chain LHS <= MID <= RHS on 200 seeded block systems.
void criterion8() {
    auto t0 = Clock::now();
    SearchBudget budget;
    budget.max_index = 16;
    BoundTable table(budget);
    int violations = 0;
    int count = 0;
    for (int s = 0; s < 200; ++s) {
        std::int64_t nb = 1 + s % 4;
        std::int64_t m = 1 + (s / 4) % 4;
        std::int64_t l = 2 + (s / 16) % 3;
        std::int64_t p = 2 * m + l;
        auto kind = s % 3 == 0 ? FieldKind::complex_field : FieldKind::real;
        auto sys = make_random_system(nb * p, 4 * nb * p,
                                      880000 + static_cast<std::uint64_t>(s), kind);
        auto rep = verify_decomposition(sys, nb, m, l, table.value_at(m).hi(),
                                        table.value_at(l - 1).hi());
        ++count;
        if (!rep.ok) ++violations;
    }
    double ms = ms_since(t0);
    report(8, violations == 0 && count == 200,
           fmt("decomposition chain on %d block systems, %d violations, %.0f ms",
               count, violations, ms));
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    auto want = [&](int c) { return selected.empty() || selected.count(c); };

    if (want(1)) criterion1();
    if (want(2)) criterion2();
    if (want(3)) criterion3();
    if (want(4)) criterion4();
    if (want(5)) criterion5();
    if (want(6)) criterion6();
    if (want(7)) criterion7();
    if (want(8)) criterion8();

    if (failures == 0)
        std::printf("acceptance: all criteria passed\n");
    else
        std::printf("acceptance: %d criteria FAILED\n", failures);
    return failures;
}
