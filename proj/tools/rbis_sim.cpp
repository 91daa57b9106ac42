// rbis_sim: command-line front end of the simulator.
//
// Exit status: 0 on success, 1 on any error, 2 when --check-class fails.

#include "rbissim/runner.hpp"
#include "rbissim/scenario.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace rbissim;

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_class_failed = 2;

std::string default_out_dir()
{
    if (const char* env = std::getenv("RBIS_SIM_OUT"); env && *env) return env;
    return "rbis_sim_out";
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

Scenario load_with_seed(const std::string& path, const std::optional<std::uint64_t>& seed)
{
    Scenario sc = load_scenario(path);
    if (seed) sc.seed = *seed;
    return sc;
}

void print_summary(std::ostream& out, const RunResult& r)
{
    out << r.scenario.name << " (" << to_string(r.scenario.method) << ", seed " << r.scenario.seed << ")\n";
    if (const auto s = r.summary()) {
        out << "  samples " << s->n << "  median " << format_double(s->median) << " ns  p99 " << format_double(s->p99)
            << " ns  max " << format_double(s->max) << " ns\n";
    }
    else {
        out << "  no synchronized samples\n";
    }
    if (r.unsynchronized_samples > 0) out << "  unsynchronized samples " << r.unsynchronized_samples << '\n';
    if (r.demo) {
        out << "  demonstrator: skew " << r.demo->outcome.trigger_skew.ns << " ns  max |ds| "
            << format_double(r.demo->outcome.delta_s_max * 1e3) << " mm\n";
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete-event simulator for beacon-based time synchronization over Wi-Fi"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = default_out_dir();
    std::optional<std::string> check_class;
    std::string format = "json";

    auto* run = app.add_subcommand("run", "run a scenario and write trace, report and series files");
    run->add_option("--scenario", scenario_path, "scenario file (TOML)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "override the scenario's master seed");
    run->add_option("--out", out_dir, "output directory (default: $RBIS_SIM_OUT or ./rbis_sim_out)");
    run->add_option("--check-class", check_class, "fail with status 2 unless the maximum error meets this class")
        ->check(CLI::IsMember({"I", "II", "III"}));
    run->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));

    std::string parameter;
    std::vector<double> values;
    auto* sw = app.add_subcommand("sweep", "run a scenario once per value of one numeric field");
    sw->add_option("--scenario", scenario_path, "scenario file (TOML)")->required()->check(CLI::ExistingFile);
    sw->add_option("--param", parameter, "dotted path of the field, e.g. ap.0.beacon_interval_tu")->required();
    sw->add_option("--values", values, "values to sweep")->required()->delimiter(',');
    sw->add_option("--seed", seed, "override the master seed");
    sw->add_option("--out", out_dir, "output directory");

    std::string ref_file;
    std::string sta_file;
    auto* replay = app.add_subcommand("analyze-replay", "recompute offsets from two beacon replay files");
    replay->add_option("reference", ref_file, "replay file of the reference station")->required()->check(CLI::ExistingFile);
    replay->add_option("station", sta_file, "replay file of the station")->required()->check(CLI::ExistingFile);
    replay->add_option("--out", out_dir, "output directory");

    auto* dump = app.add_subcommand("dump-offsets", "run a scenario and print the AP offset database as CSV");
    dump->add_option("--scenario", scenario_path, "scenario file (TOML)")->required()->check(CLI::ExistingFile);
    dump->add_option("--seed", seed, "override the scenario's master seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const RunResult r = run_scenario(load_with_seed(scenario_path, seed));
            write_outputs(r, out_dir, format == "csv" ? ReportFormat::csv : ReportFormat::json);
            print_summary(std::cout, r);
            std::cout << "  outputs in " << out_dir << '\n';
            if (check_class) {
                const UseCaseClass c = parse_use_case(*check_class);
                const auto s = r.summary();
                const bool pass = s && classify(*s, c, Criterion::max);
                std::cout << "  class " << *check_class << " on max: " << (pass ? "pass" : "fail") << '\n';
                if (!pass) return exit_class_failed;
            }
            return exit_ok;
        }
        if (*sw) {
            const std::string text = read_file(scenario_path);
            const auto points = sweep(text, parameter, values, seed, scenario_path);
            const std::string csv = sweep_csv(parameter, points);
            std::filesystem::create_directories(out_dir);
            std::ofstream(std::filesystem::path(out_dir) / "sweep.csv", std::ios::binary) << csv;
            std::cout << csv;
            return exit_ok;
        }
        if (*replay) {
            const auto analysis = analyze_replay(read_replay_file(ref_file), read_replay_file(sta_file));
            std::filesystem::create_directories(out_dir);
            std::ofstream csv(std::filesystem::path(out_dir) / "replay_offsets.csv", std::ios::binary);
            csv << "bssid,tsf,station_rx_ns,reference_rx_ns,offset_ns\n";
            for (const auto& o : analysis.offsets)
                csv << o.beacon.bssid.to_string() << ',' << o.beacon.tsf << ',' << o.station_rx.ns << ','
                    << o.reference_rx.ns << ',' << o.offset.ns << '\n';
            std::cout << "matched beacons " << analysis.offsets.size() << '\n';
            if (const auto& s = analysis.summary) {
                std::cout << "prediction error |e|: median " << format_double(s->median) << " ns  max "
                          << format_double(s->max) << " ns over " << s->n << " steps\n";
            }
            return exit_ok;
        }
        if (*dump) {
            const RunResult r = run_scenario(load_with_seed(scenario_path, seed));
            write_offsets_csv(std::cout, r.offset_db);
            return exit_ok;
        }
    }
    catch (const std::exception& e) {
        std::cerr << "rbis_sim: " << e.what() << '\n';
        return exit_error;
    }
    return exit_error;
}
