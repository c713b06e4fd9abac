#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrbound/interval.hpp"

// Derivation steps and replayable certificates.  A certificate is a chain of
// rule applications whose every step can be recomputed independently; the hi
// endpoints are serialized as exact bit patterns so replay is bit-for-bit.

namespace mrbound {

enum class RuleTag : std::uint8_t {
    Base1,
    Base2,
    Doob,
    Kounias,
    ClsDouble,
    BednorzL2,
    BednorzGeneral,
    Corollary1,
    Monotone,
};

inline const char* to_string(RuleTag t) {
    switch (t) {
        case RuleTag::Base1: return "Base1";
        case RuleTag::Base2: return "Base2";
        case RuleTag::Doob: return "Doob";
        case RuleTag::Kounias: return "Kounias";
        case RuleTag::ClsDouble: return "ClsDouble";
        case RuleTag::BednorzL2: return "BednorzL2";
        case RuleTag::BednorzGeneral: return "BednorzGeneral";
        case RuleTag::Corollary1: return "Corollary1";
        case RuleTag::Monotone: return "Monotone";
    }
    return "?";
}

inline std::optional<RuleTag> rule_tag_from_string(std::string_view s) {
    using enum RuleTag;
    for (RuleTag t : {Base1, Base2, Doob, Kounias, ClsDouble, BednorzL2,
                      BednorzGeneral, Corollary1, Monotone})
        if (s == to_string(t)) return t;
    return std::nullopt;
}

struct RuleId {
    RuleTag tag = RuleTag::Base1;
    std::map<std::string, std::int64_t> params;

    bool operator==(const RuleId&) const = default;
};

struct StepInput {
    std::int64_t n = 0;
    BoundValue value;

    bool operator==(const StepInput&) const = default;
};

struct DerivationStep {
    RuleId rule;
    std::vector<StepInput> inputs;
    std::int64_t output_index = 0;
    BoundValue output_value;

    bool operator==(const DerivationStep&) const = default;
};

struct Certificate {
    std::int64_t target_n = 0;
    std::string engine_version = kEngineVersion;
    std::vector<DerivationStep> steps;
    BoundValue final_bound;
    bool budget_limited = false;

    bool operator==(const Certificate&) const = default;
};

// Thrown by certificate_from_json when a rule name is syntactically fine but
// unknown to this engine; distinct from structural junk so verification can
// report "unsupported" rather than "malformed".
struct UnsupportedRuleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- JSON (stable: nlohmann objects keep keys sorted) ---------------------

namespace detail {

inline void value_to_json(nlohmann::json& j, const BoundValue& v) {
    j["hi"] = {{"dec", double_to_dec(v.hi())}, {"hex", double_to_hex(v.hi())}};
    j["lo_hex"] = double_to_hex(v.lo());
    if (v.exact()) j["exact"] = v.exact()->str();
}

inline BoundValue value_from_json(const nlohmann::json& j) {
    if (!j.contains("hi") || !j["hi"].contains("hex"))
        throw std::runtime_error("value missing hi.hex");
    auto hi = double_from_hex(j["hi"]["hex"].get<std::string>());
    if (!hi) throw std::runtime_error("bad hi.hex");
    double lo = *hi;
    if (j.contains("lo_hex")) {
        auto l = double_from_hex(j["lo_hex"].get<std::string>());
        if (!l) throw std::runtime_error("bad lo_hex");
        lo = *l;
    }
    if (j.contains("exact")) {
        auto r = Rational::parse(j["exact"].get<std::string>());
        if (!r) throw std::runtime_error("bad exact rational");
        BoundValue v = BoundValue::from_rational(*r);
        // The hex bit patterns are the authority; a disagreeing rational is
        // dropped so replay can expose the mismatch as a forged step.
        if (v.hi() == *hi && v.lo() == lo) return v;
    }
    return BoundValue::make(lo, *hi);
}

}  // namespace detail

inline nlohmann::json to_json(const Certificate& cert) {
    nlohmann::json j;
    j["target_n"] = cert.target_n;
    j["engine_version"] = cert.engine_version;
    if (cert.budget_limited) j["budget_limited"] = true;
    nlohmann::json final_j = nlohmann::json::object();
    detail::value_to_json(final_j, cert.final_bound);
    j["final"] = final_j;
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : cert.steps) {
        nlohmann::json js;
        js["rule"] = to_string(s.rule.tag);
        js["params"] = nlohmann::json::object();
        for (const auto& [k, v] : s.rule.params) js["params"][k] = v;
        js["inputs"] = nlohmann::json::array();
        for (const auto& in : s.inputs) {
            nlohmann::json ji;
            ji["n"] = in.n;
            detail::value_to_json(ji, in.value);
            js["inputs"].push_back(ji);
        }
        nlohmann::json jo;
        jo["n"] = s.output_index;
        detail::value_to_json(jo, s.output_value);
        js["output"] = jo;
        steps.push_back(js);
    }
    j["steps"] = steps;
    return j;
}

inline Certificate certificate_from_json(const nlohmann::json& j) {
    Certificate cert;
    if (!j.is_object()) throw std::runtime_error("certificate is not an object");
    if (!j.contains("target_n") || !j["target_n"].is_number_integer())
        throw std::runtime_error("missing target_n");
    cert.target_n = j["target_n"].get<std::int64_t>();
    if (!j.contains("engine_version"))
        throw std::runtime_error("missing engine_version");
    cert.engine_version = j["engine_version"].get<std::string>();
    cert.budget_limited = j.value("budget_limited", false);
    if (!j.contains("final")) throw std::runtime_error("missing final");
    cert.final_bound = detail::value_from_json(j["final"]);
    if (!j.contains("steps") || !j["steps"].is_array())
        throw std::runtime_error("missing steps");
    for (const auto& js : j["steps"]) {
        DerivationStep s;
        if (!js.contains("rule")) throw std::runtime_error("step missing rule");
        auto name = js["rule"].get<std::string>();
        auto tag = rule_tag_from_string(name);
        if (!tag) throw UnsupportedRuleError("unsupported rule: " + name);
        s.rule.tag = *tag;
        if (js.contains("params"))
            for (const auto& [k, v] : js["params"].items())
                s.rule.params[k] = v.get<std::int64_t>();
        if (js.contains("inputs"))
            for (const auto& ji : js["inputs"]) {
                StepInput in;
                if (!ji.contains("n")) throw std::runtime_error("input missing n");
                in.n = ji["n"].get<std::int64_t>();
                in.value = detail::value_from_json(ji);
                s.inputs.push_back(in);
            }
        if (!js.contains("output") || !js["output"].contains("n"))
            throw std::runtime_error("step missing output");
        s.output_index = js["output"]["n"].get<std::int64_t>();
        s.output_value = detail::value_from_json(js["output"]);
        cert.steps.push_back(std::move(s));
    }
    return cert;
}

}  // namespace mrbound
