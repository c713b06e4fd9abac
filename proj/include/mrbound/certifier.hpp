#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "mrbound/certificate.hpp"
#include "mrbound/rules.hpp"

// Value iteration over a table of certified bounds.  Every rule is monotone in
// its inputs and every update only lowers an entry, so the sweep loop
// converges to the table optimum; ties are broken lexicographically by
// (rule tag, parameters) so certificates are reproducible.

namespace mrbound {

struct SearchBudget {
    std::int64_t max_index = 0;  // cap on intermediate indices; 0 = 4 * target
    std::int64_t max_m = 64;
    std::int64_t max_l = 16;
    std::int64_t max_steps = 10'000'000;  // rule evaluations before giving up
};

namespace detail {

// Compact provenance; expanded into a DerivationStep only at extraction.
// Meaning of a/b/c per tag:
//   Doob, Kounias: a = n.  ClsDouble: a = source index k (output 2k).
//   Corollary1: a = m, b = n.  BednorzL2: a = outer n, b = m.
//   BednorzGeneral: a = outer n, b = m, c = l.  Monotone: a = source index.
struct ChosenRule {
    RuleTag tag = RuleTag::Base1;
    std::int64_t a = 0, b = 0, c = 0;
};

inline auto rule_key(const ChosenRule& r) {
    return std::tuple(static_cast<int>(r.tag), r.a, r.b, r.c);
}

struct TableEntry {
    bool present = false;
    BoundValue value;
    ChosenRule rule;
};

}  // namespace detail

class BoundTable {
public:
    explicit BoundTable(const SearchBudget& budget) : budget_(budget) {
        if (budget_.max_index < 1)
            throw std::invalid_argument("max_index must be positive");
        if (budget_.max_m < 1 || budget_.max_l < 2)
            throw std::invalid_argument("budget needs max_m >= 1 and max_l >= 2");
        entries_.resize(static_cast<std::size_t>(budget_.max_index) + 1);
        run();
    }

    std::int64_t max_index() const { return budget_.max_index; }
    bool budget_limited() const { return budget_limited_; }

    const BoundValue& value_at(std::int64_t n) const {
        check_index(n);
        return entries_[static_cast<std::size_t>(n)].value;
    }

    Certificate extract(std::int64_t target) const {
        check_index(target);
        Certificate cert;
        cert.target_n = target;
        cert.budget_limited = budget_limited_;
        std::vector<std::uint8_t> state(entries_.size(), 0);
        emit(target, state, cert.steps);
        cert.final_bound = entries_[static_cast<std::size_t>(target)].value;
        return cert;
    }

private:
    SearchBudget budget_;
    std::vector<detail::TableEntry> entries_;
    std::int64_t evals_ = 0;
    bool budget_limited_ = false;

    void check_index(std::int64_t n) const {
        if (n < 1 || n > budget_.max_index ||
            !entries_[static_cast<std::size_t>(n)].present)
            throw std::out_of_range("index outside bound table");
    }

    detail::TableEntry& entry(std::int64_t n) {
        return entries_[static_cast<std::size_t>(n)];
    }
    const detail::TableEntry& entry(std::int64_t n) const {
        return entries_[static_cast<std::size_t>(n)];
    }

    bool improves(const detail::TableEntry& e, const BoundValue& v,
                  const detail::ChosenRule& r) const {
        if (!e.present) return true;
        if (v.hi() < e.value.hi()) return true;
        if (v.hi() > e.value.hi()) return false;
        int vr = v.exact() ? 1 : 0;
        int er = e.value.exact() ? 1 : 0;
        if (vr != er) return vr > er;
        auto kv = detail::rule_key(r);
        auto ke = detail::rule_key(e.rule);
        if (kv < ke) return true;
        // same provenance re-evaluated: refresh drifted lo/exact payloads
        return kv == ke && !(v == e.value);
    }

    bool consider(std::int64_t idx, const detail::ChosenRule& r, const BoundValue& v) {
        auto& e = entry(idx);
        if (!improves(e, v, r)) return false;
        e.present = true;
        e.value = v;
        e.rule = r;
        return true;
    }

    bool over_budget() {
        if (evals_ > budget_.max_steps) {
            budget_limited_ = true;
            return true;
        }
        return false;
    }

    // Recompute the output of an entry's chosen rule from current table values.
    std::optional<BoundValue> eval_chosen(const detail::ChosenRule& r) const {
        using enum RuleTag;
        switch (r.tag) {
            case Base1: return rule_base(1).output;
            case Base2: return rule_base(2).output;
            case Doob: return rule_doob(r.a).output;
            case Kounias: return rule_kounias(r.a).output;
            case ClsDouble: return rule_cls_double(entry(r.a).value).output;
            case Corollary1:
                return rule_corollary1(entry(r.a).value, r.a, r.b).output;
            case BednorzL2:
                return rule_bednorz_compose(entry(r.a).value, r.a,
                                            entry(r.b).value, r.b, std::nullopt, 2)
                    .value;
            case BednorzGeneral:
                return rule_bednorz_compose(entry(r.a).value, r.a,
                                            entry(r.b).value, r.b,
                                            entry(r.c - 1).value, r.c)
                    .value;
            case Monotone: return entry(r.a).value;
        }
        return std::nullopt;
    }

    void run() {
        const std::int64_t mi = budget_.max_index;
        // base values and the closed forms never change: offer them once
        consider(1, {RuleTag::Base1, 0, 0, 0}, rule_base(1).output);
        if (mi >= 2) consider(2, {RuleTag::Base2, 0, 0, 0}, rule_base(2).output);
        for (std::int64_t n = 2; n <= mi; ++n) {
            ++evals_;
            consider(n, {RuleTag::Doob, n, 0, 0}, rule_doob(n).output);
            ++evals_;
            consider(n, {RuleTag::Kounias, n, 0, 0}, rule_kounias(n).output);
        }
        bool changed = true;
        while (changed && !over_budget()) {
            changed = false;
            if (sweep_cls()) changed = true;
            if (over_budget()) break;
            if (sweep_corollary1()) changed = true;
            if (over_budget()) break;
            if (sweep_bednorz()) changed = true;
            if (closure()) changed = true;
        }
        stabilize();
    }

    bool sweep_cls() {
        bool changed = false;
        for (std::int64_t k = 1; 2 * k <= budget_.max_index; ++k) {
            if (!entry(k).present) continue;
            ++evals_;
            auto ev = rule_cls_double(entry(k).value);
            if (consider(2 * k, {RuleTag::ClsDouble, k, 0, 0}, ev.output))
                changed = true;
        }
        return changed;
    }

    bool sweep_corollary1() {
        bool changed = false;
        for (std::int64_t n = 2; n <= budget_.max_index; ++n) {
            std::int64_t mm = std::min(n - 1, budget_.max_m);
            for (std::int64_t m = 1; m <= mm; ++m) {
                if (!entry(m).present) continue;
                ++evals_;
                auto ev = rule_corollary1(entry(m).value, m, n);
                if (consider(n, {RuleTag::Corollary1, m, n, 0}, ev.output))
                    changed = true;
            }
        }
        return changed;
    }

    bool sweep_bednorz() {
        bool changed = false;
        for (std::int64_t m = 1; m <= budget_.max_m; ++m) {
            if (!entry(m).present) continue;
            for (std::int64_t l = 2; l <= budget_.max_l; ++l) {
                std::int64_t p = 2 * m + l;
                if (p > budget_.max_index) break;
                if (l > 2 && !entry(l - 1).present) continue;
                std::optional<BoundValue> dl1;
                if (l > 2) dl1 = entry(l - 1).value;
                for (std::int64_t a = 1; a * p <= budget_.max_index; ++a) {
                    if (!entry(a).present) continue;
                    ++evals_;
                    auto ev = rule_bednorz_compose(entry(a).value, a,
                                                   entry(m).value, m, dl1, l);
                    detail::ChosenRule r{l == 2 ? RuleTag::BednorzL2
                                                : RuleTag::BednorzGeneral,
                                         a, m, l == 2 ? 0 : l};
                    if (consider(ev.index, r, ev.value)) changed = true;
                }
            }
        }
        return changed;
    }

    // Monotone closure: a bound at n+1 covers n.  Lifts point straight at the
    // producing index so certificates avoid chains of one-step lifts.
    bool closure() {
        bool changed = false;
        for (std::int64_t n = budget_.max_index - 1; n >= 1; --n) {
            const auto& above = entry(n + 1);
            if (!above.present) continue;
            std::int64_t src =
                above.rule.tag == RuleTag::Monotone ? above.rule.a : n + 1;
            if (consider(n, {RuleTag::Monotone, src, 0, 0}, above.value))
                changed = true;
        }
        return changed;
    }

    // Re-evaluate chosen provenance until self-consistent, so extraction can
    // materialize steps from final table values even after a budget abort.
    void stabilize() {
        for (int pass = 0; pass < 1000; ++pass) {
            bool changed = false;
            for (std::int64_t n = 1; n <= budget_.max_index; ++n) {
                auto& e = entry(n);
                if (!e.present || e.rule.tag == RuleTag::Monotone) continue;
                auto v = eval_chosen(e.rule);
                if (v && improves(e, *v, e.rule)) {
                    e.value = *v;
                    changed = true;
                }
            }
            for (std::int64_t n = budget_.max_index; n >= 1; --n) {
                auto& e = entry(n);
                if (!e.present || e.rule.tag != RuleTag::Monotone) continue;
                auto v = eval_chosen(e.rule);
                if (v && improves(e, *v, e.rule)) {
                    e.value = *v;
                    changed = true;
                }
            }
            if (!changed) return;
        }
        throw std::logic_error("bound table failed to stabilize");
    }

    void emit(std::int64_t idx, std::vector<std::uint8_t>& state,
              std::vector<DerivationStep>& steps) const {
        auto& st = state[static_cast<std::size_t>(idx)];
        if (st == 2) return;
        if (st == 1) throw std::logic_error("provenance cycle in bound table");
        st = 1;
        for (std::int64_t in : input_indices(entry(idx).rule))
            emit(in, state, steps);
        steps.push_back(materialize(idx));
        st = 2;
    }

    static std::vector<std::int64_t> input_indices(const detail::ChosenRule& r) {
        using enum RuleTag;
        switch (r.tag) {
            case Base1:
            case Base2:
            case Doob:
            case Kounias: return {};
            case ClsDouble:
            case Corollary1:
            case Monotone: return {r.a};
            case BednorzL2: return {r.a, r.b};
            case BednorzGeneral: return {r.a, r.b, r.c - 1};
        }
        return {};
    }

    DerivationStep materialize(std::int64_t idx) const {
        using enum RuleTag;
        const auto& e = entry(idx);
        DerivationStep s;
        s.rule.tag = e.rule.tag;
        s.output_index = idx;
        s.output_value = e.value;
        auto in = [&](std::int64_t i) {
            return StepInput{i, entry(i).value};
        };
        switch (e.rule.tag) {
            case Base1:
            case Base2: break;
            case Doob:
            case Kounias:
                s.rule.params["n"] = idx;
                break;
            case ClsDouble:
                s.inputs = {in(e.rule.a)};
                break;
            case Corollary1:
                s.rule.params["m"] = e.rule.a;
                s.rule.params["n"] = e.rule.b;
                s.inputs = {in(e.rule.a)};
                break;
            case BednorzL2:
                s.rule.params["n"] = e.rule.a;
                s.rule.params["m"] = e.rule.b;
                s.rule.params["l"] = 2;
                s.inputs = {in(e.rule.a), in(e.rule.b)};
                break;
            case BednorzGeneral:
                s.rule.params["n"] = e.rule.a;
                s.rule.params["m"] = e.rule.b;
                s.rule.params["l"] = e.rule.c;
                s.inputs = {in(e.rule.a), in(e.rule.b), in(e.rule.c - 1)};
                break;
            case Monotone:
                s.rule.params["from"] = e.rule.a;
                s.rule.params["target"] = idx;
                s.inputs = {in(e.rule.a)};
                break;
        }
        return s;
    }
};

/// Tightest certified bound for D_{target_n} reachable within the budget.
inline Certificate best_bound(std::int64_t target_n, SearchBudget budget = {}) {
    if (target_n < 1) throw std::invalid_argument("target_n must be >= 1");
    if (budget.max_index == 0)
        budget.max_index = std::max<std::int64_t>(4 * target_n, 8);
    if (budget.max_index < target_n) budget.max_index = target_n;
    BoundTable table(budget);
    return table.extract(target_n);
}

/// Minimizes max{D_m, 2 D_{l-1}} / log2^2(2m+l) over the budget grid; ties go
/// to the lexicographically smallest (m, l).
inline CBound best_cbound(SearchBudget budget = {}) {
    if (budget.max_m < 1 || budget.max_l < 2)
        throw std::invalid_argument("cbound budget needs max_m >= 1, max_l >= 2");
    std::int64_t need = std::max(budget.max_m, budget.max_l - 1);
    if (budget.max_index == 0)
        budget.max_index = std::max<std::int64_t>(4 * need, 8);
    BoundTable table(budget);
    std::optional<CBound> best;
    for (std::int64_t m = 1; m <= budget.max_m; ++m) {
        for (std::int64_t l = 2; l <= budget.max_l; ++l) {
            auto ev = cbound_from_corollary2(table.value_at(m), m,
                                             table.value_at(l - 1), l);
            if (!ev.applicable) continue;
            if (!best || ev.cbound.value.hi() < best->value.hi())
                best = ev.cbound;
        }
    }
    return *best;
}

// ---- certificate replay ----------------------------------------------------

enum class Verdict { valid, forged, malformed, unsupported };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::valid: return "valid";
        case Verdict::forged: return "forged";
        case Verdict::malformed: return "malformed";
        case Verdict::unsupported: return "unsupported";
    }
    return "?";
}

struct ReplayResult {
    Verdict verdict = Verdict::malformed;
    std::string detail;
    std::int64_t step_index = -1;  // 0-based step for step-level verdicts
    BoundValue final_bound;        // meaningful only when valid
};

namespace detail {

inline bool same_hi_bits(const BoundValue& a, const BoundValue& b) {
    return std::bit_cast<std::uint64_t>(a.hi()) ==
           std::bit_cast<std::uint64_t>(b.hi());
}

inline std::optional<std::int64_t> param(const DerivationStep& s, const char* name) {
    auto it = s.rule.params.find(name);
    if (it == s.rule.params.end()) return std::nullopt;
    return it->second;
}

}  // namespace detail

/// Re-executes every step from its recorded inputs and demands bit-identical
/// outputs under the recorded rounding scheme.
inline ReplayResult replay(const Certificate& cert) {
    using detail::param;
    if (cert.engine_version != kEngineVersion)
        return {Verdict::unsupported,
                "unsupported engine_version: " + cert.engine_version, -1, {}};
    if (cert.target_n < 1)
        return {Verdict::malformed, "target_n must be positive", -1, {}};
    if (cert.steps.empty())
        return {Verdict::malformed, "empty step list", -1, {}};

    std::map<std::int64_t, BoundValue> produced;
    for (std::size_t k = 0; k < cert.steps.size(); ++k) {
        const auto& s = cert.steps[k];
        auto sk = static_cast<std::int64_t>(k);
        auto malformed = [&](const std::string& why) {
            return ReplayResult{Verdict::malformed,
                                "step " + std::to_string(k) + ": " + why, sk, {}};
        };
        auto forged = [&](const std::string& why) {
            return ReplayResult{Verdict::forged,
                                "forged step " + std::to_string(k) + ": " + why,
                                sk, {}};
        };

        for (const auto& in : s.inputs) {
            auto it = produced.find(in.n);
            if (it == produced.end())
                return malformed("dangling input reference n=" + std::to_string(in.n));
            if (!detail::same_hi_bits(it->second, in.value))
                return malformed("input value for n=" + std::to_string(in.n) +
                                 " does not match the step that produced it");
        }
        if (produced.count(s.output_index))
            return malformed("duplicate output index " + std::to_string(s.output_index));

        BoundValue recomputed;
        try {
            using enum RuleTag;
            switch (s.rule.tag) {
                case Base1:
                case Base2: {
                    std::int64_t want = s.rule.tag == Base1 ? 1 : 2;
                    if (!s.inputs.empty()) return malformed("base rule takes no inputs");
                    if (s.output_index != want) return malformed("base rule index mismatch");
                    recomputed = rule_base(want).output;
                    break;
                }
                case Doob:
                case Kounias: {
                    std::int64_t n = param(s, "n").value_or(s.output_index);
                    if (n != s.output_index) return malformed("closed-form index mismatch");
                    if (!s.inputs.empty()) return malformed("closed form takes no inputs");
                    auto ev = s.rule.tag == Doob ? rule_doob(n) : rule_kounias(n);
                    if (!ev.applicable) return malformed(ev.reason);
                    recomputed = ev.output;
                    break;
                }
                case ClsDouble: {
                    if (s.inputs.size() != 1) return malformed("doubling takes one input");
                    if (s.output_index != 2 * s.inputs[0].n)
                        return malformed("doubling output index must be twice its input");
                    recomputed = rule_cls_double(s.inputs[0].value).output;
                    break;
                }
                case Corollary1: {
                    auto m = param(s, "m");
                    auto n = param(s, "n");
                    if (!m || !n) return malformed("interpolation needs params m, n");
                    if (*n != s.output_index) return malformed("interpolation index mismatch");
                    if (s.inputs.size() != 1 || s.inputs[0].n != *m)
                        return malformed("interpolation input must be D_m");
                    auto ev = rule_corollary1(s.inputs[0].value, *m, *n);
                    if (!ev.applicable) return malformed(ev.reason);
                    recomputed = ev.output;
                    break;
                }
                case BednorzL2:
                case BednorzGeneral: {
                    auto n = param(s, "n");
                    auto m = param(s, "m");
                    std::int64_t l = param(s, "l").value_or(2);
                    if (!n || !m) return malformed("composition needs params n, m");
                    if (s.rule.tag == BednorzL2 && l != 2)
                        return malformed("BednorzL2 fixes l = 2");
                    if (s.rule.tag == BednorzGeneral && l <= 2)
                        return malformed("BednorzGeneral requires l > 2");
                    std::size_t want_inputs = l == 2 ? 2 : 3;
                    if (s.inputs.size() != want_inputs)
                        return malformed("composition input arity mismatch");
                    if (s.inputs[0].n != *n || s.inputs[1].n != *m)
                        return malformed("composition inputs must be (D_n, D_m)");
                    std::optional<BoundValue> dl1;
                    if (l > 2) {
                        if (s.inputs[2].n != l - 1)
                            return malformed("third composition input must be D_{l-1}");
                        dl1 = s.inputs[2].value;
                    }
                    auto ev = rule_bednorz_compose(s.inputs[0].value, *n,
                                                   s.inputs[1].value, *m, dl1, l);
                    if (!ev.applicable) return malformed(ev.reason);
                    if (ev.index != s.output_index)
                        return malformed("composition output index must be n*(2m+l)");
                    recomputed = ev.value;
                    break;
                }
                case Monotone: {
                    if (s.inputs.size() != 1) return malformed("lift takes one input");
                    std::int64_t from = param(s, "from").value_or(s.inputs[0].n);
                    if (from != s.inputs[0].n) return malformed("lift source mismatch");
                    if (s.output_index > from)
                        return malformed("lift must not raise the index");
                    recomputed = s.inputs[0].value;
                    break;
                }
            }
        } catch (const std::exception& e) {
            return malformed(std::string("rule evaluation failed: ") + e.what());
        }
        if (!detail::same_hi_bits(recomputed, s.output_value))
            return forged(std::string(to_string(s.rule.tag)) +
                          " output does not replay bit-exactly");
        produced.emplace(s.output_index, s.output_value);
    }

    const auto& last = cert.steps.back();
    bool covers = last.output_index == cert.target_n ||
                  (last.rule.tag == RuleTag::Monotone &&
                   last.output_index >= cert.target_n);
    if (!covers)
        return {Verdict::malformed, "final step does not cover target_n", -1, {}};
    if (!detail::same_hi_bits(cert.final_bound, last.output_value))
        return {Verdict::forged, "final bound does not match last step", -1, {}};
    return {Verdict::valid,
            "replayed " + std::to_string(cert.steps.size()) + " steps", -1,
            last.output_value};
}

/// Parse + replay with the full verdict set (unknown rules map to
/// "unsupported", structural junk to "malformed").
inline ReplayResult verify_certificate_json(const nlohmann::json& j) {
    try {
        return replay(certificate_from_json(j));
    } catch (const UnsupportedRuleError& e) {
        return {Verdict::unsupported, e.what(), -1, {}};
    } catch (const std::exception& e) {
        return {Verdict::malformed, e.what(), -1, {}};
    }
}

}  // namespace mrbound
