// s2esim: validate, run and sweep sensor-to-edge latency scenarios.
//
// Exit codes: 0 ok, 2 validation failure, 3 I/O error, 4 usage error.

#include <cstdio>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>

#include "s2e/report.hpp"
#include "s2e/scenario.hpp"

namespace {

enum Exit : int { kOk = 0, kValidation = 2, kIo = 3, kUsage = 4 };

struct Options {
    std::string config;
    std::uint64_t seed = 1;
    std::uint64_t seed_count = 0;
    unsigned parallel = 1;
    std::string out = "report";
    std::string format = "json";
    bool deterministic = false;
};

// Loads the scenario or prints diagnostics; returns the exit code on failure.
int load(const std::string& path, std::optional<s2e::Scenario>& sc) {
    try {
        sc = s2e::load_scenario_file(path);
        return kOk;
    } catch (const s2e::IoError& e) {
        std::cerr << "s2esim: " << e.what() << "\n";
        return kIo;
    } catch (const s2e::config::ConfigError& e) {
        for (const auto& d : e.diagnostics()) std::cerr << s2e::config::format(d, path) << "\n";
        return kValidation;
    }
}

void print_summary(const s2e::RunStats& stats, const s2e::Scenario& sc) {
    const auto& e2e = stats.end_to_end;
    const auto sfrt = s2e::worst_case_sfrt(s2e::safety_params(sc));
    const auto dist = s2e::safety_distance(sfrt, sc.safety.approach_speed_mps);
    std::printf("samples %llu  losses %llu\n", static_cast<unsigned long long>(e2e.count()),
                static_cast<unsigned long long>(stats.losses));
    if (!e2e.empty()) {
        std::printf("end-to-end mean %.3f ms  p99 %.1f ms  max %.3f ms\n", e2e.mean_us() / 1000.0,
                    e2e.percentile(99).count() / 1000.0, e2e.max().count() / 1000.0);
        std::printf("W-Master to PLC output mean %.3f ms\n", stats.wmaster_to_plc.mean_us() / 1000.0);
    }
    std::printf("worst-case SFRT %.1f ms  safety distance %.4f m (%.1f m at %.1f m/s)\n", sfrt.count() / 1000.0,
                dist.meters, dist.presented_m, sc.safety.approach_speed_mps);
}

int write_report(const Options& o, const s2e::Scenario& sc, const s2e::RunStats& stats,
                 const std::vector<std::uint64_t>& seeds, const std::vector<s2e::RunResult>* per_seed) {
    const auto fmt = o.format == "csv" ? s2e::report::Format::csv : s2e::report::Format::json;
    try {
        const auto files = s2e::report::write(o.out, fmt, sc, stats, {seeds, o.deterministic}, per_seed);
        for (const auto& f : files) std::printf("wrote %s/%s\n", o.out.c_str(), f.c_str());
    } catch (const s2e::report::WriteError& e) {
        std::cerr << "s2esim: " << e.what() << "\n";
        return kIo;
    }
    print_summary(stats, sc);
    return kOk;
}

int cmd_validate(const Options& o) {
    std::optional<s2e::Scenario> sc;
    if (int rc = load(o.config, sc); rc != kOk) return rc;
    std::printf("%s: ok (%zu devices on %zu track(s), %zu segments, worst-case SFRT %lld us)\n", o.config.c_str(),
                sc->cell.device_count(), sc->cell.tracks.size(), sc->segments.size(),
                static_cast<long long>(s2e::worst_case_sfrt(s2e::safety_params(*sc)).count()));
    return kOk;
}

int cmd_run(const Options& o) {
    std::optional<s2e::Scenario> sc;
    if (int rc = load(o.config, sc); rc != kOk) return rc;
    const auto result = s2e::run(*sc, o.seed);
    return write_report(o, *sc, s2e::summarize(result), {o.seed}, nullptr);
}

int cmd_sweep(const Options& o) {
    std::optional<s2e::Scenario> sc;
    if (int rc = load(o.config, sc); rc != kOk) return rc;
    std::vector<std::uint64_t> seeds(o.seed_count);
    std::iota(seeds.begin(), seeds.end(), o.seed);
    const auto sw = s2e::sweep(*sc, seeds, o.parallel);
    return write_report(o, *sc, sw.merged, seeds, &sw.runs);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sensor-to-edge latency simulator (IO-Link Wireless, 5G, software PLC)", "s2esim"};
    app.set_version_flag("--version", std::string(S2E_VERSION));
    app.require_subcommand(1);
    Options o;

    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("config", o.config, "Scenario file")->required();

    auto add_report_flags = [&](CLI::App* cmd) {
        cmd->add_option("config", o.config, "Scenario file")->required();
        cmd->add_option("--seed", o.seed, "Seed (first seed for sweep)")->capture_default_str();
        cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
        cmd->add_option("--format", o.format, "Report format")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
        cmd->add_flag("--deterministic", o.deterministic, "Zero timestamps for byte-identical reports");
    };
    auto* run = app.add_subcommand("run", "Run a scenario once");
    add_report_flags(run);
    auto* sweep = app.add_subcommand("sweep", "Run a scenario over consecutive seeds and merge");
    add_report_flags(sweep);
    sweep->add_option("--seeds", o.seed_count, "Number of seeds")->required()->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1000000}));
    sweep->add_option("--parallel", o.parallel, "Worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (*validate) return cmd_validate(o);
    if (*run) return cmd_run(o);
    return cmd_sweep(o);
}
