#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rollsafe/batch.hpp"
#include "rollsafe/errors.hpp"
#include "rollsafe/harness.hpp"
#include "rollsafe/scenario.hpp"
#include "rollsafe/trace_io.hpp"

namespace fs = std::filesystem;
using namespace rollsafe;

namespace {

constexpr int kExitSafe = 0;
constexpr int kExitError = 1;
constexpr int kExitViolation = 2;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool expect_violation = false;
};

Scenario load(const Common& c) {
    Scenario s = c.config.empty() ? default_scenario() : load_scenario(c.config);
    if (c.seed) s.seed = *c.seed;
    return s;
}

// With --expect-violation the roles flip: seeing the violation is success.
int outcome(bool violated, bool expect_violation) {
    if (expect_violation) return violated ? kExitSafe : kExitViolation;
    return violated ? kExitViolation : kExitSafe;
}

void print_row(const RunSummary& s) {
    std::printf("%-22s min_h=% .6f  final_dist=%.4f  infeasible=%zu  env_viol=%zu  %s\n", s.variant.c_str(),
                s.min_h, s.final_distance, s.infeasible_count, s.envelope_violations,
                s.violated ? "UNSAFE" : "safe");
}

int cmd_simulate(const Common& c, const std::string& out_dir) {
    const Scenario sc = load(c);
    fs::create_directories(out_dir);
    const auto res = run(sc);
    write_trace_csv((fs::path(out_dir) / ("trace_" + sc.variant.key() + ".csv")).string(), res.trace);
    write_text_file((fs::path(out_dir) / "summary.json").string(), run_to_json(sc, res.summary));
    print_row(res.summary);
    if (!res.summary.completed) {
        std::cerr << "run aborted: " << res.summary.error << '\n';
        return kExitError;
    }
    return outcome(res.summary.violated, c.expect_violation);
}

int cmd_compare(const Common& c, const std::string& variants, const std::string& out_dir) {
    const Scenario sc = load(c);
    const auto list = parse_variant_list(variants);
    fs::create_directories(out_dir);
    std::vector<RunResult> results;
    const auto rows = compare_parallel(sc, list, &results);
    bool violated = false;
    bool aborted = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        write_trace_csv((fs::path(out_dir) / ("trace_" + rows[i].variant.key() + ".csv")).string(),
                        results[i].trace);
        print_row(rows[i].summary);
        violated = violated || rows[i].summary.violated;
        aborted = aborted || !rows[i].summary.completed;
    }
    write_text_file((fs::path(out_dir) / "summary.json").string(), comparison_to_json(sc, rows));
    if (aborted) return kExitError;
    return outcome(violated, c.expect_violation);
}

int cmd_verify(const Common& c) {
    const Scenario sc = load(c);
    const auto rep = verify_scenario(sc);
    for (const auto& s : rep.schedules) {
        std::printf("schedule %-32s %s  min_margin=% .6g", s.name.c_str(), s.pass ? "pass" : "FAIL", s.min_margin);
        if (s.first_violation_t) std::printf("  first_violation_t=%.4f", *s.first_violation_t);
        std::printf("\n");
    }
    for (const auto& a : rep.audits) {
        std::printf("audit %s points=%zu degenerate=%zu necessary_violations=%zu bounded_violations=%zu %s\n",
                    a.barrier.c_str(), a.points_checked, a.degenerate_points, a.necessary_violations,
                    a.bounded_input_violations, a.pass() ? "pass" : "FAIL");
    }
    return outcome(!rep.pass(), c.expect_violation);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rollover safety filter simulator"};
    app.require_subcommand(1);

    Common common;
    std::string out_dir = "out";
    std::string variants;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", common.config, "scenario JSON file");
        if (config_required) opt->required();
        opt->check(CLI::ExistingFile);
        sub->add_option("--seed", common.seed, "override the config seed");
        sub->add_flag("--expect-violation", common.expect_violation,
                      "exit 0 when a violation is found and 2 when the run stays safe");
    };

    auto* sim = app.add_subcommand("simulate", "run the configured filter and write trace + summary");
    add_common(sim, true);
    sim->add_option("--out", out_dir, "output directory")->required();

    auto* cmp = app.add_subcommand("compare", "run several filters on shared signals");
    add_common(cmp, true);
    cmp->add_option("--variants", variants, "comma list, e.g. none,dacbf_def4,pssf_const:0.8")->required();
    cmp->add_option("--out", out_dir, "output directory")->required();

    auto* ver = app.add_subcommand("verify", "schedule checks and CBF audits only");
    add_common(ver, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitError;
    }

    try {
        if (sim->parsed()) return cmd_simulate(common, out_dir);
        if (cmp->parsed()) return cmd_compare(common, variants, out_dir);
        if (ver->parsed()) return cmd_verify(common);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
