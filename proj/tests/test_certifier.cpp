#include <catch2/catch_amalgamated.hpp>

#include "mrbound/certifier.hpp"
#include "oracle.hpp"

using namespace mrbound;

TEST_CASE("single-step targets") {
    auto c1 = best_bound(1);
    REQUIRE(c1.steps.size() == 1);
    CHECK(c1.steps[0].rule.tag == RuleTag::Base1);
    CHECK(c1.final_bound.hi() == 1.0);

    auto c2 = best_bound(2);
    REQUIRE(c2.steps.size() == 1);
    CHECK(c2.steps[0].rule.tag == RuleTag::Base2);
    REQUIRE(c2.final_bound.exact());
    CHECK(*c2.final_bound.exact() == Rational{4, 3});
}

TEST_CASE("the doubling chain is found for 8 and 64") {
    auto c8 = best_bound(8);
    REQUIRE(c8.final_bound.exact());
    CHECK(*c8.final_bound.exact() == Rational{64, 27});
    REQUIRE(c8.steps.size() == 3);
    CHECK(c8.steps[0].rule.tag == RuleTag::Base2);
    CHECK(c8.steps[1].rule.tag == RuleTag::ClsDouble);
    CHECK(c8.steps[2].rule.tag == RuleTag::ClsDouble);
    CHECK(c8.steps[2].output_index == 8);

    auto c64 = best_bound(64);
    CHECK(c64.final_bound.hi() >= 5.5740029928350016);
    CHECK(c64.final_bound.hi() <= 5.5740029928350016 + 1e-11);
    {
        // independent route: the sqrt branch applied twice to (4/3)^4
        oracle::big d = pow(oracle::big(4) / 3, 4);
        d = oracle::cls_sqrt_branch(oracle::cls_sqrt_branch(d));
        CHECK(oracle::geq(c64.final_bound.hi(), d));
    }
    REQUIRE(c64.steps.size() == 6);
    CHECK(c64.steps[0].rule.tag == RuleTag::Base2);
    for (std::size_t i = 1; i < 6; ++i)
        CHECK(c64.steps[i].rule.tag == RuleTag::ClsDouble);
    CHECK(c64.steps[3].output_index == 16);
    CHECK(c64.steps[3].output_value.exact());   // (4/3)^4, still rational
    CHECK_FALSE(c64.steps[4].output_value.exact());  // sqrt branch from here on
    CHECK(c64.steps[5].output_index == 64);
}

TEST_CASE("composer dominates every single closed form up to 1024") {
    SearchBudget budget;
    budget.max_index = 1024;
    BoundTable table(budget);
    CHECK_FALSE(table.budget_limited());
    for (std::int64_t n = 2; n <= 1024; ++n) {
        double best = table.value_at(n).hi();
        CHECK(best <= rule_doob(n).output.hi());
        CHECK(best <= rule_kounias(n).output.hi());
        if (n > 2) CHECK(table.value_at(n - 1).hi() <= best);  // monotone closure
    }
}

TEST_CASE("monotone output across individual budgets") {
    double prev = 0.0;
    for (std::int64_t n = 1; n <= 64; ++n) {
        double hi = best_bound(n).final_bound.hi();
        CHECK(hi >= prev);
        prev = hi;
    }
}

TEST_CASE("identical budgets produce identical certificates") {
    auto a = to_json(best_bound(57)).dump();
    auto b = to_json(best_bound(57)).dump();
    CHECK(a == b);

    SearchBudget tweaked;
    tweaked.max_m = 32;
    auto c = to_json(best_bound(57, tweaked)).dump();
    auto d = to_json(best_bound(57, tweaked)).dump();
    CHECK(c == d);
}

TEST_CASE("certificate json round trip is the identity") {
    for (std::int64_t n : {1, 2, 8, 31, 137}) {
        auto cert = best_bound(n);
        auto back = certificate_from_json(to_json(cert));
        CHECK(back == cert);
    }
}

TEST_CASE("optimized C bound") {
    SearchBudget small;
    small.max_m = 2;
    small.max_l = 2;
    auto cb = best_cbound(small);
    CHECK(cb.witness_m == 2);
    CHECK(cb.witness_l == 2);
    CHECK(cb.value.hi() >= 0.19954012595366051);
    CHECK(cb.value.hi() <= 0.19954012595366051 + 1e-12);

    SearchBudget unit;
    unit.max_m = 1;
    unit.max_l = 2;
    auto quarter = best_cbound(unit);
    CHECK(quarter.value.hi() == 0.25);
    CHECK(quarter.witness_m == 1);

    CHECK_THROWS_AS(best_cbound(SearchBudget{0, 0, 2, 1000}), std::invalid_argument);
}

TEST_CASE("replay accepts its own certificates bit-exactly") {
    for (std::int64_t n : {2, 8, 64, 137}) {
        auto cert = best_bound(n);
        auto rr = replay(cert);
        REQUIRE(rr.verdict == Verdict::valid);
        CHECK(std::bit_cast<std::uint64_t>(rr.final_bound.hi()) ==
              std::bit_cast<std::uint64_t>(cert.final_bound.hi()));
    }
}

TEST_CASE("replay rejects tampering") {
    auto cert = best_bound(64);
    auto j = to_json(cert);

    SECTION("one output lowered by an ulp") {
        double hi = cert.steps[4].output_value.hi();
        j["steps"][4]["output"]["hi"]["hex"] = double_to_hex(rnd::down(hi));
        auto rr = verify_certificate_json(j);
        CHECK(rr.verdict == Verdict::forged);
        CHECK(rr.step_index == 4);
    }
    SECTION("one output raised by an ulp on the rational rail") {
        double hi = cert.steps[2].output_value.hi();
        j["steps"][2]["output"]["hi"]["hex"] = double_to_hex(rnd::up(hi));
        auto rr = verify_certificate_json(j);
        CHECK(rr.verdict == Verdict::forged);
        CHECK(rr.step_index == 2);
    }
    SECTION("final bound lowered") {
        j["final"]["hi"]["hex"] = double_to_hex(rnd::down(cert.final_bound.hi()));
        j["final"].erase("exact");
        auto rr = verify_certificate_json(j);
        CHECK(rr.verdict == Verdict::forged);
    }
    SECTION("dangling input") {
        auto steps = j["steps"];
        steps.erase(1);
        j["steps"] = steps;
        auto rr = verify_certificate_json(j);
        CHECK(rr.verdict == Verdict::malformed);
    }
    SECTION("unknown rule") {
        j["steps"][1]["rule"] = "Quadrisect";
        auto rr = verify_certificate_json(j);
        CHECK(rr.verdict == Verdict::unsupported);
    }
    SECTION("foreign engine version") {
        j["engine_version"] = "mrbound/0.0 round=hardware";
        auto rr = verify_certificate_json(j);
        CHECK(rr.verdict == Verdict::unsupported);
    }
    SECTION("empty step list") {
        j["steps"] = nlohmann::json::array();
        auto rr = verify_certificate_json(j);
        CHECK(rr.verdict == Verdict::malformed);
    }
}

TEST_CASE("exhausted budgets flag the certificate and stay replayable") {
    SearchBudget tiny;
    tiny.max_steps = 50;
    auto cert = best_bound(64, tiny);
    CHECK(cert.budget_limited);
    CHECK(cert.final_bound.hi() >= best_bound(64).final_bound.hi());
    auto rr = replay(cert);
    CHECK(rr.verdict == Verdict::valid);
}

TEST_CASE("overshoot certificates end with a covering lift") {
    auto cert = best_bound(137);
    CHECK(cert.steps.back().output_index == 137);
    CHECK(cert.steps.back().rule.tag == RuleTag::Monotone);
    // next-to-last step produced the covering composite index
    const auto& prev = cert.steps[cert.steps.size() - 2];
    CHECK(prev.output_index >= 137);
    CHECK(replay(cert).verdict == Verdict::valid);
}
