// aqmsim: batch front-end for the AQM simulation library.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "aqm/scenario.hpp"

namespace fs = std::filesystem;
using aqm::cli::json;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json doc;
    in >> doc;
    return doc;
}

void emit_error(const std::string& message, const std::string& field = "") {
    json err = {{"error", message}};
    if (!field.empty()) err["field"] = field;
    std::cerr << err.dump() << "\n";
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir, std::uint64_t seed,
            bool seed_given, int workers) {
    json doc = read_json_file(scenario_path);
    auto diagnostics = aqm::cli::validate_scenario(doc);
    if (!diagnostics.empty()) {
        for (const auto& d : diagnostics) emit_error("invalid scenario", d);
        return 2;
    }
    aqm::cli::Scenario scenario = aqm::cli::parse_scenario(doc);
    if (seed_given) scenario.seed = seed;

    fs::create_directories(out_dir);
    // experiments that write artifacts pick the directory up from their params
    if (scenario.experiment == "hologram" &&
        (!scenario.params.contains("output_dir") ||
         scenario.params["output_dir"].get<std::string>().empty()))
        scenario.params["output_dir"] = out_dir;

    auto result = aqm::cli::run_scenario(scenario, aqm::ExecMode::Parallel, workers);

    std::string csv_name = scenario.output.empty() ? scenario.experiment + ".csv" : scenario.output;
    fs::path csv_path = fs::path(out_dir) / csv_name;
    {
        std::ofstream out(csv_path);
        out << aqm::cli::to_csv(result.table);
        if (!out) throw std::runtime_error("failed writing " + csv_path.string());
    }
    {
        std::ofstream meta(csv_path.string() + ".meta.json");
        meta << result.metadata.dump(2) << "\n";
    }
    std::cout << csv_path.string() << "\n";
    if (!result.errors.empty()) {
        for (const auto& e : result.errors)
            emit_error("sweep row failed (recorded in sidecar): " + e.message,
                       "row " + std::to_string(e.index));
    }
    return 0;
}

int cmd_validate(const std::string& scenario_path) {
    json doc = read_json_file(scenario_path);
    auto diagnostics = aqm::cli::validate_scenario(doc);
    if (diagnostics.empty()) {
        std::cout << "ok\n";
        return 0;
    }
    for (const auto& d : diagnostics) std::cout << d << "\n";
    return 2;
}

int cmd_list() {
    for (const auto& e : aqm::cli::list_experiments())
        std::cout << e.name << "\t" << e.description << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"aqmsim: accidental-quantum-measurement simulations for trapped-ion addressing"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int workers = 0;

    auto* run = app.add_subcommand("run", "execute a scenario and write CSV + metadata");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--out", out_dir, "output directory (default .)");
    run->add_option("--workers", workers, "worker threads for the sweep (default: all)");

    auto* validate = app.add_subcommand("validate", "check a scenario without executing it");
    validate->add_option("scenario", scenario_path, "scenario JSON file")->required();

    app.add_subcommand("list", "list the named experiments");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(scenario_path, out_dir, seed, seed_opt->count() > 0, workers);
        if (validate->parsed()) return cmd_validate(scenario_path);
        return cmd_list();
    } catch (const std::exception& e) {
        emit_error(e.what());
        return 1;
    }
}
