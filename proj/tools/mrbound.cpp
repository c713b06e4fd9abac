// mrbound: certified upper bounds for the Menchov-Rademacher constants D_n
// and C, bound certificates with replay verification, and an exact
// finite-atom simulator of orthogonal systems.
//
// Exit codes: 0 ok, 1 verification failure or table mismatch, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrbound/certifier.hpp"
#include "mrbound/ortho_sim.hpp"
#include "mrbound/report.hpp"

namespace {

using nlohmann::json;

int simulator_threads() {
    if (const char* env = std::getenv("MRBOUND_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;  // hardware default
}

struct BudgetFlags {
    std::int64_t max_index = 0;
    std::int64_t max_m = 64;
    std::int64_t max_l = 16;
    std::int64_t max_steps = 10'000'000;

    void attach(CLI::App* cmd) {
        cmd->add_option("--max-index", max_index,
                        "cap on intermediate indices (0 = 4*n)");
        cmd->add_option("--max-m", max_m, "largest m tried in compositions");
        cmd->add_option("--max-l", max_l, "largest l tried in compositions");
        cmd->add_option("--max-steps", max_steps,
                        "rule evaluations before returning best-so-far");
    }

    mrbound::SearchBudget budget() const {
        return {max_index, max_m, max_l, max_steps};
    }
};

json bound_summary_json(const mrbound::Certificate& cert) {
    json j;
    j["n"] = cert.target_n;
    j["hi"] = {{"dec", mrbound::double_to_dec(cert.final_bound.hi())},
               {"hex", mrbound::double_to_hex(cert.final_bound.hi())}};
    j["display"] = mrbound::format_upper(cert.final_bound.hi());
    if (cert.final_bound.exact()) j["exact"] = cert.final_bound.exact()->str();
    j["steps"] = cert.steps.size();
    j["budget_limited"] = cert.budget_limited;
    return j;
}

int run_bound(std::int64_t n, const BudgetFlags& flags, const std::string& format,
              bool with_cert) {
    auto cert = mrbound::best_bound(n, flags.budget());
    if (format == "json") {
        json j = bound_summary_json(cert);
        if (with_cert) j["certificate"] = mrbound::to_json(cert);
        std::cout << j.dump(2) << "\n";
    } else if (format == "csv") {
        std::cout << "n,bound,hi_hex,exact,steps,budget_limited\n"
                  << n << "," << mrbound::format_upper(cert.final_bound.hi()) << ","
                  << mrbound::double_to_hex(cert.final_bound.hi()) << ","
                  << (cert.final_bound.exact() ? cert.final_bound.exact()->str() : "")
                  << "," << cert.steps.size() << "," << (cert.budget_limited ? 1 : 0)
                  << "\n";
    } else {
        std::cout << "D_" << n << " <= " << mrbound::format_upper(cert.final_bound.hi())
                  << "\n";
        if (cert.final_bound.exact())
            std::cout << "exact = " << cert.final_bound.exact()->str() << "\n";
        std::cout << "hi bits = " << mrbound::double_to_hex(cert.final_bound.hi())
                  << "\nsteps = " << cert.steps.size() << "\n";
        if (cert.budget_limited) std::cout << "note: budget-limited result\n";
        if (with_cert) std::cout << mrbound::to_json(cert).dump(2) << "\n";
    }
    return 0;
}

int run_cbound(const BudgetFlags& flags, const std::string& format) {
    auto cb = mrbound::best_cbound(flags.budget());
    double hi = cb.value.hi();
    if (format == "json") {
        json j;
        j["hi"] = {{"dec", mrbound::double_to_dec(hi)},
                   {"hex", mrbound::double_to_hex(hi)}};
        j["display"] = mrbound::format_upper(hi);
        j["witness"] = {{"m", cb.witness_m}, {"l", cb.witness_l}};
        j["components"] = {{"D_m_hi", cb.bound_on_dm.hi()},
                           {"D_l_minus_1_hi", cb.bound_on_dl_minus_1.hi()}};
        std::cout << j.dump(2) << "\n";
    } else if (format == "csv") {
        std::cout << "c_bound,witness_m,witness_l,dm_hi,dl1_hi\n"
                  << mrbound::format_upper(hi) << "," << cb.witness_m << ","
                  << cb.witness_l << "," << cb.bound_on_dm.hi() << ","
                  << cb.bound_on_dl_minus_1.hi() << "\n";
    } else {
        std::cout << "C <= " << mrbound::format_upper(hi) << "   witness m="
                  << cb.witness_m << " l=" << cb.witness_l << "\n";
        for (double frac : {9.0, 5.0}) {  // report the tightest satisfied claim
            if (hi < 1.0 / frac) {
                std::cout << "note: < 1/" << static_cast<int>(frac) << "\n";
                break;
            }
        }
        std::cout << "components: D_m <= " << mrbound::format_upper(cb.bound_on_dm.hi())
                  << ", D_{l-1} <= "
                  << mrbound::format_upper(cb.bound_on_dl_minus_1.hi()) << "\n";
    }
    return 0;
}

int run_certify(std::int64_t n, const BudgetFlags& flags, const std::string& out) {
    auto cert = mrbound::best_bound(n, flags.budget());
    json j = mrbound::to_json(cert);
    std::ofstream f(out);
    if (!f) {
        std::cerr << "cannot open " << out << " for writing\n";
        return 2;
    }
    f << j.dump(2) << "\n";
    std::cout << "wrote certificate for D_" << n
              << " <= " << mrbound::format_upper(cert.final_bound.hi()) << " to " << out
              << "\n";
    return 0;
}

int run_verify(const std::string& in, const std::string& format) {
    std::ifstream f(in);
    if (!f) {
        std::cerr << "cannot open " << in << "\n";
        return 2;
    }
    mrbound::ReplayResult rr;
    json j = json::parse(f, nullptr, false);
    if (j.is_discarded()) {
        rr = {mrbound::Verdict::malformed, "not valid JSON", -1, {}};
    } else {
        rr = mrbound::verify_certificate_json(j);
    }
    if (format == "json") {
        json out;
        out["verdict"] = mrbound::to_string(rr.verdict);
        out["detail"] = rr.detail;
        if (rr.step_index >= 0) out["step"] = rr.step_index;
        if (rr.verdict == mrbound::Verdict::valid)
            out["hi"] = {{"dec", mrbound::double_to_dec(rr.final_bound.hi())},
                         {"hex", mrbound::double_to_hex(rr.final_bound.hi())}};
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << mrbound::to_string(rr.verdict) << ": " << rr.detail << "\n";
    }
    return rr.verdict == mrbound::Verdict::valid ? 0 : 1;
}

int run_simulate(std::int64_t n, std::int64_t atoms, int restarts, int iters,
                 std::uint64_t seed, bool complex_field, const std::string& decomp,
                 const std::string& format) {
    using namespace mrbound;
    FieldKind kind = complex_field ? FieldKind::complex_field : FieldKind::real;
    if (atoms == 0) atoms = 4 * n;

    if (!decomp.empty()) {
        std::int64_t m = 0, l = 0;
        if (std::sscanf(decomp.c_str(), "%ld,%ld", &m, &l) != 2 || m < 1 || l < 2) {
            std::cerr << "--decomp expects m,l with m >= 1, l >= 2\n";
            return 2;
        }
        std::int64_t p = 2 * m + l;
        if (n % p != 0) {
            std::cerr << "n must be a multiple of 2m+l = " << p << "\n";
            return 2;
        }
        auto sys = make_random_system(n, atoms, seed, kind);
        auto rep = verify_decomposition(sys, n / p, m, l);
        if (format == "json") {
            std::cout << to_json(rep).dump(2) << "\n";
        } else {
            std::printf(
                "decomposition m=%lld l=%lld blocks=%lld: LHS %.9f <= MID %.9f <= RHS "
                "%.9f : %s\n",
                static_cast<long long>(m), static_cast<long long>(l),
                static_cast<long long>(n / p), rep.lhs, rep.mid, rep.rhs,
                rep.ok ? "ok" : "VIOLATED");
        }
        return rep.ok ? 0 : 1;
    }

    auto adv = adversarial_lower_bound(n, atoms, restarts, iters, seed, kind,
                                       simulator_threads());
    auto cert = best_bound(n);
    double hi = cert.final_bound.hi();
    bool sandwich = adv.value <= hi + 1e-9;
    if (format == "json") {
        json j;
        j["n"] = n;
        j["atoms"] = atoms;
        j["lower_estimate"] = adv.value;
        j["certified_hi"] = hi;
        j["sandwich_ok"] = sandwich;
        j["witness"] = to_json(adv.witness);
        std::cout << j.dump(2) << "\n";
    } else if (format == "csv") {
        std::cout << "n,lower_estimate,certified_hi,sandwich_ok\n"
                  << n << "," << double_to_dec(adv.value) << "," << double_to_dec(hi)
                  << "," << (sandwich ? 1 : 0) << "\n";
    } else {
        std::printf("adversarial lower estimate for D_%lld: %.6f\n",
                    static_cast<long long>(n), adv.value);
        std::printf("sandwich: %.6f <= D_%lld <= %s\n", adv.value,
                    static_cast<long long>(n), format_upper(hi).c_str());
        if (!sandwich) std::printf("SANDWICH VIOLATED\n");
    }
    return sandwich ? 0 : 1;
}

int run_table(const std::string& format) {
    auto rows = mrbound::paper_table();
    if (format == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
            json j;
            j["label"] = r.label;
            j["param"] = r.param;
            if (r.paper_value) j["paper"] = *r.paper_value;
            j["computed"] = r.computed_value;
            if (r.computed_exact) j["exact"] = r.computed_exact->str();
            j["status"] = r.status;
            if (!r.note.empty()) j["note"] = r.note;
            arr.push_back(j);
        }
        std::cout << arr.dump(2) << "\n";
    } else if (format == "csv") {
        std::cout << "label,param,paper,computed,status,note\n";
        for (const auto& r : rows) {
            std::cout << '"' << r.label << "\"," << r.param << ",";
            if (r.paper_value) std::cout << mrbound::double_to_dec(*r.paper_value);
            std::cout << "," << mrbound::double_to_dec(r.computed_value) << ","
                      << r.status << ",\"" << r.note << "\"\n";
        }
    } else {
        std::printf("%-24s %-12s %-14s %-18s %-8s %s\n", "claim", "param", "paper",
                    "computed", "status", "note");
        for (const auto& r : rows) {
            char paper[32] = "-";
            if (r.paper_value)
                std::snprintf(paper, sizeof paper, "%.10g", *r.paper_value);
            std::printf("%-24s %-12s %-14s %-18.12g %-8s %s\n", r.label.c_str(),
                        r.param.c_str(), paper, r.computed_value, r.status.c_str(),
                        r.note.c_str());
        }
    }
    bool ok = mrbound::all_rows_match(rows);
    if (!ok) std::cerr << "table contains MISMATCH rows\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "certified upper bounds for the Menchov-Rademacher constants D_n and C"};
    app.require_subcommand(1);

    std::string format = "text";

    auto* bound = app.add_subcommand("bound", "certified upper bound for D_n");
    std::int64_t bound_n = 0;
    bool bound_cert = false;
    BudgetFlags bound_budget;
    bound->add_option("--n", bound_n, "target index")
        ->required()
        ->check(CLI::PositiveNumber);
    bound_budget.attach(bound);
    bound->add_flag("--cert", bound_cert, "print the full certificate");
    bound->add_option("--format", format)
        ->check(CLI::IsMember({"text", "json", "csv"}));

    auto* cbound = app.add_subcommand("cbound", "optimized bound on C");
    BudgetFlags cbound_budget;
    cbound->add_option("--max-m", cbound_budget.max_m, "witness m budget")
        ->check(CLI::PositiveNumber);
    cbound->add_option("--max-l", cbound_budget.max_l, "witness l budget")
        ->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40));
    cbound->add_option("--max-steps", cbound_budget.max_steps, "search budget");
    cbound->add_option("--format", format)
        ->check(CLI::IsMember({"text", "json", "csv"}));

    auto* certify = app.add_subcommand("certify", "write a bound certificate");
    std::int64_t certify_n = 0;
    std::string certify_out;
    BudgetFlags certify_budget;
    certify->add_option("--n", certify_n, "target index")
        ->required()
        ->check(CLI::PositiveNumber);
    certify->add_option("--out", certify_out, "output JSON file")->required();
    certify_budget.attach(certify);

    auto* verify = app.add_subcommand("verify", "replay and check a certificate");
    std::string verify_in;
    verify->add_option("--in", verify_in, "certificate JSON file")->required();
    verify->add_option("--format", format)
        ->check(CLI::IsMember({"text", "json"}));

    auto* simulate =
        app.add_subcommand("simulate", "exact finite-atom orthogonal systems");
    std::int64_t sim_n = 0, sim_atoms = 0;
    int sim_restarts = 20, sim_iters = 400;
    std::uint64_t sim_seed = 1;
    bool sim_complex = false;
    std::string sim_decomp;
    simulate->add_option("--n", sim_n, "number of variables")
        ->required()
        ->check(CLI::PositiveNumber);
    simulate->add_option("--atoms", sim_atoms, "equiprobable atoms (0 = 4n)");
    simulate->add_option("--restarts", sim_restarts, "ascent restarts")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--iters", sim_iters, "ascent iterations")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim_seed, "random seed");
    simulate->add_flag("--complex", sim_complex, "complex-valued system");
    simulate->add_option("--decomp", sim_decomp,
                         "check the block decomposition for m,l");
    simulate->add_option("--format", format)
        ->check(CLI::IsMember({"text", "json", "csv"}));

    auto* table = app.add_subcommand("table", "reproduce published numeric claims");
    bool table_paper = false;
    table->add_flag("--paper", table_paper, "emit one row per published claim");
    table->add_option("--format", format)
        ->check(CLI::IsMember({"text", "json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (bound->parsed()) return run_bound(bound_n, bound_budget, format, bound_cert);
        if (cbound->parsed()) return run_cbound(cbound_budget, format);
        if (certify->parsed()) return run_certify(certify_n, certify_budget, certify_out);
        if (verify->parsed()) return run_verify(verify_in, format);
        if (simulate->parsed())
            return run_simulate(sim_n, sim_atoms, sim_restarts, sim_iters, sim_seed,
                                sim_complex, sim_decomp, format);
        if (table->parsed()) {
            if (!table_paper) {
                std::cerr << "table requires --paper\n";
                return 2;
            }
            return run_table(format);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
